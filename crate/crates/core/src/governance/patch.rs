use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dsl::{place_decl, quote, transition_decl, ParseError, Parser, Tok};
use crate::net::{ArcKind, NamedPredicate, NetModel, PlaceDef, Predicate, TransitionDef};

/// One structural edit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EditOp {
    AddPlace(PlaceDef),
    RemovePlace(String),
    AddTransition(TransitionDef),
    RemoveTransition(String),
    /// For inhibitor arcs `weight` is the threshold.
    AddArc {
        transition: String,
        kind: ArcKind,
        place: String,
        weight: u32,
    },
    RemoveArc {
        transition: String,
        kind: ArcKind,
        place: String,
    },
    SetGuard {
        transition: String,
        guard: Option<Predicate>,
    },
    SetCapacity {
        place: String,
        capacity: Option<u32>,
    },
    AddForbidden(NamedPredicate),
    RemoveForbidden(String),
    /// Label of a place or transition.
    SetLabel {
        target: String,
        label: String,
    },
    /// Moves the mode token to `mode` in the initial marking.
    SwitchMode(String),
}

impl EditOp {
    /// The op as one line of patch text.
    pub fn to_line(&self) -> String {
        match self {
            EditOp::AddPlace(p) => format!("add place {}", place_decl(p)),
            EditOp::RemovePlace(p) => format!("remove place {p}"),
            EditOp::AddTransition(t) => format!("add trans {}", transition_decl(t)),
            EditOp::RemoveTransition(t) => format!("remove trans {t}"),
            EditOp::AddArc {
                transition,
                kind,
                place,
                weight,
            } => {
                if *weight == 1 {
                    format!("add arc {transition} {} {place}", kind.keyword())
                } else {
                    format!("add arc {transition} {} {place}:{weight}", kind.keyword())
                }
            }
            EditOp::RemoveArc {
                transition,
                kind,
                place,
            } => format!("remove arc {transition} {} {place}", kind.keyword()),
            EditOp::SetGuard { transition, guard } => match guard {
                Some(g) => format!("set guard {transition} := {g}"),
                None => format!("set guard {transition} := none"),
            },
            EditOp::SetCapacity { place, capacity } => match capacity {
                Some(c) => format!("set cap {place} {c}"),
                None => format!("set cap {place} none"),
            },
            EditOp::AddForbidden(f) => format!("add forbidden {} := {}", f.name, f.predicate),
            EditOp::RemoveForbidden(f) => format!("remove forbidden {f}"),
            EditOp::SetLabel { target, label } => format!("set label {target} {}", quote(label)),
            EditOp::SwitchMode(m) => format!("switch mode {m}"),
        }
    }
}

/// An ordered list of edits with provenance.
///
/// Text form, one statement per line:
///
/// ```text
/// author "ops team"
/// rationale "cap reliance"
/// add arc t4 inhibit p3:2
/// set guard t6 := p4 >= 2
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Patch {
    pub ops: Vec<EditOp>,
    pub author: String,
    pub rationale: String,
}

impl Patch {
    pub fn new(ops: Vec<EditOp>) -> Self {
        Patch {
            ops,
            ..Patch::default()
        }
    }

    pub fn with_author(mut self, author: impl Into<String>) -> Self {
        self.author = author.into();
        self
    }

    pub fn with_rationale(mut self, rationale: impl Into<String>) -> Self {
        self.rationale = rationale.into();
        self
    }

    fn ops_text(&self) -> String {
        self.ops.iter().map(|op| op.to_line() + "\n").collect()
    }

    /// SHA-256 of the op lines; author and rationale do not contribute.
    pub fn id(&self) -> String {
        hex::encode(Sha256::digest(self.ops_text().as_bytes()))
    }

    /// First 12 hex digits of [`Patch::id`].
    pub fn short_id(&self) -> String {
        self.id()[..12].to_string()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.author.is_empty() {
            let _ = writeln!(out, "author {}", quote(&self.author));
        }
        if !self.rationale.is_empty() {
            let _ = writeln!(out, "rationale {}", quote(&self.rationale));
        }
        out.push_str(&self.ops_text());
        out
    }
}

/// Parses patch text. Errors are collected per line.
pub fn parse_patch(text: &str) -> Result<Patch, Vec<ParseError>> {
    let mut p = Parser::new(text).map_err(|e| vec![e])?;
    let mut patch = Patch::default();
    let mut errors = Vec::new();
    loop {
        p.skip_blank_lines();
        if p.at_eof() {
            break;
        }
        match statement(&mut p, &mut patch).and_then(|_| p.expect_end_of_statement()) {
            Ok(()) => {}
            Err(e) => {
                errors.push(e);
                p.recover();
            }
        }
    }
    if errors.is_empty() {
        Ok(patch)
    } else {
        Err(errors)
    }
}

const STATEMENTS: &[&str] = &["author", "rationale", "add", "remove", "set", "switch"];

fn arc_kind(p: &mut Parser) -> Result<ArcKind, ParseError> {
    let kind = match p.peek() {
        Tok::Ident(s) => ArcKind::from_keyword(s),
        _ => None,
    };
    match kind {
        Some(k) => {
            p.bump();
            Ok(k)
        }
        None => Err(p.unexpected(&["in", "out", "inhibit", "read"])),
    }
}

fn statement(p: &mut Parser, patch: &mut Patch) -> Result<(), ParseError> {
    if p.eat_keyword("author") {
        patch.author = p.expect_string()?;
    } else if p.eat_keyword("rationale") {
        patch.rationale = p.expect_string()?;
    } else if p.eat_keyword("switch") {
        p.expect_keyword("mode")?;
        patch.ops.push(EditOp::SwitchMode(p.expect_ident()?));
    } else if p.eat_keyword("add") {
        if p.eat_keyword("place") {
            let mut scratch = NetModel::default();
            p.place(&mut scratch)?;
            patch.ops.push(EditOp::AddPlace(scratch.places.remove(0)));
        } else if p.eat_keyword("trans") {
            let mut scratch = NetModel::default();
            p.transition(&mut scratch)?;
            patch.ops.push(EditOp::AddTransition(scratch.transitions.remove(0)));
        } else if p.eat_keyword("arc") {
            let transition = p.expect_ident()?;
            let kind = arc_kind(p)?;
            let mut arcs = p.arc_list()?;
            if arcs.len() != 1 {
                return Err(p.error("`add arc` takes exactly one place", &["end of line"]));
            }
            let arc = arcs.remove(0);
            patch.ops.push(EditOp::AddArc {
                transition,
                kind,
                place: arc.place,
                weight: arc.weight,
            });
        } else if p.eat_keyword("forbidden") {
            let name = p.expect_ident()?;
            p.expect_tok(Tok::Assign, ":=")?;
            let predicate = p.predicate()?;
            patch.ops.push(EditOp::AddForbidden(NamedPredicate { name, predicate }));
        } else {
            return Err(p.unexpected(&["place", "trans", "arc", "forbidden"]));
        }
    } else if p.eat_keyword("remove") {
        if p.eat_keyword("place") {
            patch.ops.push(EditOp::RemovePlace(p.expect_ident()?));
        } else if p.eat_keyword("trans") {
            patch.ops.push(EditOp::RemoveTransition(p.expect_ident()?));
        } else if p.eat_keyword("arc") {
            let transition = p.expect_ident()?;
            let kind = arc_kind(p)?;
            let place = p.expect_ident()?;
            patch.ops.push(EditOp::RemoveArc {
                transition,
                kind,
                place,
            });
        } else if p.eat_keyword("forbidden") {
            patch.ops.push(EditOp::RemoveForbidden(p.expect_ident()?));
        } else {
            return Err(p.unexpected(&["place", "trans", "arc", "forbidden"]));
        }
    } else if p.eat_keyword("set") {
        if p.eat_keyword("guard") {
            let transition = p.expect_ident()?;
            p.expect_tok(Tok::Assign, ":=")?;
            let guard = if p.eat_keyword("none") {
                None
            } else {
                Some(p.predicate()?)
            };
            patch.ops.push(EditOp::SetGuard { transition, guard });
        } else if p.eat_keyword("cap") {
            let place = p.expect_ident()?;
            let capacity = if p.eat_keyword("none") {
                None
            } else {
                Some(p.expect_positive("capacity")?)
            };
            patch.ops.push(EditOp::SetCapacity { place, capacity });
        } else if p.eat_keyword("label") {
            let target = p.expect_ident()?;
            let label = p.expect_string()?;
            patch.ops.push(EditOp::SetLabel { target, label });
        } else {
            return Err(p.unexpected(&["guard", "cap", "label"]));
        }
    } else {
        return Err(p.unexpected(STATEMENTS));
    }
    Ok(())
}
