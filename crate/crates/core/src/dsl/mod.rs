//! The `.net` model language.
//!
//! Line-oriented: one declaration per line, `#` starts a comment (but `#t`
//! directly followed by an identifier is a counter reference).
//!
//! ```text
//! meta title "two-step chain"
//! place p0 init 1
//! place p1 cap 3 init 0 label "buffer"
//! place p2 init 0
//! trans t1 in p0 out p1 counted
//! trans t2 in p1 out p2:2 inhibit p2 read p0 guard p1 >= 1 and not #t1 > 4
//! forbidden done := p2 >= 1
//! audit a1 := counter t1 > 2
//! audit a2 := rate t1 max 2 per 3
//! audit a3 := occupancy p1 >= 2
//! audit a4 := pressure done <= 1
//! ratelimit t1 max 2 per 3
//! mode normal initial
//! mode restricted disable t2
//! mode restricted override t1 := p0 >= 1
//! ```

mod lexer;
mod macros;
mod parser;
mod serialize;

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::net::{validate_net, NetModel, StructureError};

pub use macros::{
    expand_macros, rate_limit_budget_place, rate_limit_tick_done_transition, rate_limit_tick_transition,
    MacroError, MacroModel, RateLimit,
};
pub(crate) use parser::Parser;
pub use parser::parse_predicate;
pub use serialize::serialize_model;
pub(crate) use lexer::Tok;
pub(crate) use serialize::{place_decl, quote, transition_decl};

/// Model text plus where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSource {
    pub text: String,
    pub origin: String,
}

impl ModelSource {
    pub fn new(text: impl Into<String>) -> Self {
        ModelSource {
            text: text.into(),
            origin: "<memory>".into(),
        }
    }

    pub fn from_path(path: &Path) -> std::io::Result<Self> {
        Ok(ModelSource {
            text: std::fs::read_to_string(path)?,
            origin: path.display().to_string(),
        })
    }
}

/// Syntax error with a 1-based position into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>, expected: Vec<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// Why a model could not be loaded. Syntax, macro and structure failures are
/// kept apart so tooling can tell them apart.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{}", render_parse_errors(.0))]
    Syntax(Vec<ParseError>),
    #[error(transparent)]
    Macro(#[from] MacroError),
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Structure(Vec<StructureError>),
}

fn render_parse_errors(errs: &[ParseError]) -> String {
    errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

/// Parses without expanding macros.
pub fn parse_unexpanded(src: &ModelSource) -> Result<MacroModel, Vec<ParseError>> {
    Parser::new(&src.text).map_err(|e| vec![e])?.document()
}

/// Parses, expands macros and validates.
pub fn parse_model(src: &ModelSource) -> Result<NetModel, ModelError> {
    let mm = parse_unexpanded(src).map_err(ModelError::Syntax)?;
    let model = expand_macros(mm)?;
    let errors = validate_net(&model);
    if errors.is_empty() {
        Ok(model)
    } else {
        Err(ModelError::Structure(errors))
    }
}
