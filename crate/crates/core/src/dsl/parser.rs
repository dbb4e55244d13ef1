use std::collections::BTreeMap;

use crate::audit::{AuditKind, AuditRule};
use crate::dsl::lexer::{lex, Spanned, Tok};
use crate::dsl::macros::{MacroModel, RateLimit};
use crate::dsl::ParseError;
use crate::net::{
    is_valid_identifier, ArcKind, ArcRef, Cmp, ModeDef, NamedPredicate, NetModel, PlaceDef, Predicate,
    TransitionDef, KEYWORDS,
};

const TRANS_CLAUSES: &[&str] = &["in", "out", "inhibit", "read", "guard", "counted", "label"];

pub(crate) struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(crate) fn new(text: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn here(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    pub(crate) fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let here = self.here();
        ParseError::new(
            here.line,
            here.col,
            message,
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub(crate) fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error(format!("unexpected {}", self.peek().describe()), expected)
    }

    pub(crate) fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn at_end_of_statement(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof)
    }

    pub(crate) fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&[kw]))
        }
    }

    pub(crate) fn expect_ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                if !is_valid_identifier(&s) {
                    return Err(self.error(format!("invalid identifier `{s}`"), &["identifier"]));
                }
                self.bump();
                Ok(s)
            }
            Tok::Ident(s) => Err(self.error(
                format!("`{s}` is a reserved word and cannot be used as an identifier"),
                &["identifier"],
            )),
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    pub(crate) fn expect_u32(&mut self, what: &str) -> PResult<u32> {
        match *self.peek() {
            Tok::Int(n) if n < 0 => Err(self.error(
                format!("{what} must be a nonnegative integer, found {n}"),
                &["nonnegative integer"],
            )),
            Tok::Int(n) => {
                let v = u32::try_from(n)
                    .map_err(|_| self.error(format!("{what} {n} is too large"), &["nonnegative integer"]))?;
                self.bump();
                Ok(v)
            }
            _ => Err(self.unexpected(&["nonnegative integer"])),
        }
    }

    pub(crate) fn expect_positive(&mut self, what: &str) -> PResult<u32> {
        let at = self.here().clone();
        let v = self.expect_u32(what)?;
        if v == 0 {
            return Err(ParseError::new(
                at.line,
                at.col,
                format!("{what} must be at least 1"),
                vec!["positive integer".into()],
            ));
        }
        Ok(v)
    }

    pub(crate) fn expect_string(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["string"])),
        }
    }

    pub(crate) fn expect_tok(&mut self, want: Tok, name: &str) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn expect_cmp(&mut self) -> PResult<Cmp> {
        match *self.peek() {
            Tok::Cmp(c) => {
                self.bump();
                Ok(c)
            }
            _ => Err(self.unexpected(&["<", "<=", "=", ">=", ">"])),
        }
    }

    pub(crate) fn expect_end_of_statement(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected(&["end of line"])),
        }
    }

    pub(crate) fn skip_blank_lines(&mut self) {
        while matches!(self.peek(), Tok::Newline) {
            self.bump();
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    /// Skips the rest of the current statement after an error.
    pub(crate) fn recover(&mut self) {
        while !self.at_end_of_statement() {
            self.bump();
        }
        self.bump();
    }

    // ----- predicates -----

    pub(crate) fn predicate(&mut self) -> PResult<Predicate> {
        let mut parts = vec![self.conjunction()?];
        while self.eat_keyword("or") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Predicate::Or(parts) })
    }

    fn conjunction(&mut self) -> PResult<Predicate> {
        let mut parts = vec![self.unary()?];
        while self.eat_keyword("and") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Predicate::And(parts) })
    }

    fn unary(&mut self) -> PResult<Predicate> {
        if self.eat_keyword("not") {
            return Ok(Predicate::Not(Box::new(self.unary()?)));
        }
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.predicate()?;
                self.expect_tok(Tok::RParen, ")")?;
                Ok(inner)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Predicate::Const(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Predicate::Const(false))
            }
            Tok::Ident(s) if s == "mode" => {
                self.bump();
                self.expect_tok(Tok::Cmp(Cmp::Eq), "=")?;
                Ok(Predicate::Mode(self.expect_ident()?))
            }
            Tok::Counter(t) => {
                if !is_valid_identifier(&t) {
                    return Err(self.error(format!("invalid identifier `{t}`"), &["identifier"]));
                }
                self.bump();
                let cmp = self.expect_cmp()?;
                let value = self.expect_u32("counter bound")?;
                Ok(Predicate::counter(t, cmp, value))
            }
            Tok::Ident(_) => {
                let place = self.expect_ident()?;
                let cmp = self.expect_cmp()?;
                let value = self.expect_u32("token bound")?;
                Ok(Predicate::tokens(place, cmp, value))
            }
            _ => Err(self.unexpected(&["place", "#transition", "mode", "not", "(", "true", "false"])),
        }
    }

    // ----- statements -----

    pub(crate) fn arc_list(&mut self) -> PResult<Vec<ArcRef>> {
        let mut arcs = Vec::new();
        loop {
            match self.peek() {
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                    let place = self.expect_ident()?;
                    let weight = if *self.peek() == Tok::Colon {
                        self.bump();
                        self.expect_positive("arc weight")?
                    } else {
                        1
                    };
                    arcs.push(ArcRef::new(place, weight));
                }
                _ => break,
            }
        }
        if arcs.is_empty() {
            return Err(self.unexpected(&["place"]));
        }
        Ok(arcs)
    }

    pub(crate) fn place(&mut self, model: &mut NetModel) -> PResult<()> {
        let id = self.expect_ident()?;
        let mut place = PlaceDef::new(id, 0);
        while !self.at_end_of_statement() {
            if self.eat_keyword("cap") {
                place.capacity = Some(self.expect_positive("capacity")?);
            } else if self.eat_keyword("init") {
                place.initial = self.expect_u32("initial token count")?;
            } else if self.eat_keyword("label") {
                place.label = self.expect_string()?;
            } else {
                return Err(self.unexpected(&["cap", "init", "label", "end of line"]));
            }
        }
        model.places.push(place);
        Ok(())
    }

    pub(crate) fn transition(&mut self, model: &mut NetModel) -> PResult<()> {
        let id = self.expect_ident()?;
        let mut t = TransitionDef::new(id);
        while !self.at_end_of_statement() {
            let kw = match self.peek() {
                Tok::Ident(s) if TRANS_CLAUSES.contains(&s.as_str()) => s.clone(),
                _ => return Err(self.unexpected(TRANS_CLAUSES)),
            };
            self.bump();
            match kw.as_str() {
                "counted" => t.counted = true,
                "label" => t.label = self.expect_string()?,
                "guard" => t.guard = Some(self.predicate()?),
                kind => {
                    let kind = ArcKind::from_keyword(kind).expect("clause keyword");
                    let arcs = self.arc_list()?;
                    t.arcs_mut(kind).extend(arcs);
                }
            }
        }
        model.transitions.push(t);
        Ok(())
    }

    fn audit(&mut self, model: &mut NetModel) -> PResult<()> {
        let id = self.expect_ident()?;
        self.expect_tok(Tok::Assign, ":=")?;
        let kind = if self.eat_keyword("counter") {
            let transition = self.expect_ident()?;
            self.expect_tok(Tok::Cmp(Cmp::Gt), ">")?;
            AuditKind::CounterThreshold {
                transition,
                threshold: self.expect_u32("threshold")?,
            }
        } else if self.eat_keyword("rate") {
            let transition = self.expect_ident()?;
            self.expect_keyword("max")?;
            let max = self.expect_u32("rate bound")?;
            self.expect_keyword("per")?;
            let window = self.expect_positive("window")?;
            AuditKind::RateThreshold {
                transition,
                max,
                window,
            }
        } else if self.eat_keyword("occupancy") {
            let place = self.expect_ident()?;
            let cmp = self.expect_cmp()?;
            AuditKind::OccupancyThreshold {
                place,
                cmp,
                level: self.expect_u32("level")?,
            }
        } else if self.eat_keyword("pressure") {
            let predicate = self.expect_ident()?;
            self.expect_tok(Tok::Cmp(Cmp::Le), "<=")?;
            AuditKind::PressureThreshold {
                predicate,
                max_distance: self.expect_u32("distance")?,
            }
        } else {
            return Err(self.unexpected(&["counter", "rate", "occupancy", "pressure"]));
        };
        model.audit_rules.push(AuditRule { id, kind });
        Ok(())
    }

    fn mode(&mut self, model: &mut NetModel, initial_mode: &mut Option<String>) -> PResult<()> {
        let id = self.expect_ident()?;
        let ix = match model.modes.iter().position(|m| m.id == id) {
            Some(ix) => ix,
            None => {
                model.modes.push(ModeDef::new(id.clone()));
                model.modes.len() - 1
            }
        };
        while !self.at_end_of_statement() {
            if self.eat_keyword("initial") {
                *initial_mode = Some(id.clone());
            } else if self.eat_keyword("disable") {
                let mut any = false;
                while let Tok::Ident(s) = self.peek() {
                    if KEYWORDS.contains(&s.as_str()) {
                        break;
                    }
                    let t = self.expect_ident()?;
                    model.modes[ix].disabled.insert(t);
                    any = true;
                }
                if !any {
                    return Err(self.unexpected(&["transition"]));
                }
            } else if self.eat_keyword("override") {
                let t = self.expect_ident()?;
                self.expect_tok(Tok::Assign, ":=")?;
                let g = self.predicate()?;
                model.modes[ix].guard_overrides.insert(t, g);
            } else {
                return Err(self.unexpected(&["initial", "disable", "override", "end of line"]));
            }
        }
        Ok(())
    }

    fn statement(&mut self, mm: &mut MacroModel) -> PResult<()> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => {
                return Err(self.unexpected(&[
                    "place", "trans", "forbidden", "audit", "mode", "ratelimit", "meta",
                ]))
            }
        };
        match kw.as_str() {
            "place" => {
                self.bump();
                self.place(&mut mm.model)?
            }
            "trans" => {
                self.bump();
                self.transition(&mut mm.model)?
            }
            "forbidden" => {
                self.bump();
                let name = self.expect_ident()?;
                self.expect_tok(Tok::Assign, ":=")?;
                let predicate = self.predicate()?;
                mm.model.forbidden.push(NamedPredicate { name, predicate });
            }
            "audit" => {
                self.bump();
                self.audit(&mut mm.model)?
            }
            "mode" => {
                self.bump();
                self.mode(&mut mm.model, &mut mm.initial_mode)?
            }
            "ratelimit" => {
                self.bump();
                let at = self.here().clone();
                let transition = self.expect_ident()?;
                self.expect_keyword("max")?;
                let max = self.expect_u32("rate limit")?;
                self.expect_keyword("per")?;
                let per = self.expect_u32("rate window")?;
                mm.rate_limits.push(RateLimit {
                    transition,
                    max,
                    per,
                    line: at.line,
                    column: at.col,
                });
            }
            "meta" => {
                self.bump();
                let key = self.expect_ident()?;
                let value = self.expect_string()?;
                mm.model.metadata.insert(key, value);
            }
            _ => {
                return Err(self.unexpected(&[
                    "place", "trans", "forbidden", "audit", "mode", "ratelimit", "meta",
                ]))
            }
        }
        self.expect_end_of_statement()
    }

    /// Parses a whole document into a model whose macros are not yet expanded.
    pub(crate) fn document(mut self) -> Result<MacroModel, Vec<ParseError>> {
        let mut mm = MacroModel {
            model: NetModel {
                metadata: BTreeMap::new(),
                ..NetModel::default()
            },
            rate_limits: Vec::new(),
            initial_mode: None,
        };
        let mut errors = Vec::new();
        loop {
            self.skip_blank_lines();
            if self.at_eof() {
                break;
            }
            if let Err(e) = self.statement(&mut mm) {
                errors.push(e);
                self.recover();
            }
        }
        if errors.is_empty() {
            Ok(mm)
        } else {
            Err(errors)
        }
    }
}

/// Parses a standalone predicate expression.
pub fn parse_predicate(text: &str) -> Result<Predicate, ParseError> {
    let mut p = Parser::new(text)?;
    let pred = p.predicate()?;
    p.skip_blank_lines();
    if !p.at_eof() {
        return Err(p.unexpected(&["end of input"]));
    }
    Ok(pred)
}
