use std::fmt::Write as _;

use crate::audit::AuditKind;
use crate::dsl::ModelSource;
use crate::net::{ArcKind, ArcRef, NetModel, PlaceDef, TransitionDef};

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_arcs(out: &mut String, kind: ArcKind, arcs: &[ArcRef]) {
    if arcs.is_empty() {
        return;
    }
    out.push(' ');
    out.push_str(kind.keyword());
    for a in arcs {
        if a.weight == 1 {
            let _ = write!(out, " {}", a.place);
        } else {
            let _ = write!(out, " {}:{}", a.place, a.weight);
        }
    }
}

/// Place declaration without the leading keyword.
pub(crate) fn place_decl(p: &PlaceDef) -> String {
    let mut out = p.id.clone();
    if let Some(cap) = p.capacity {
        let _ = write!(out, " cap {cap}");
    }
    let _ = write!(out, " init {}", p.initial);
    if !p.label.is_empty() {
        let _ = write!(out, " label {}", quote(&p.label));
    }
    out
}

/// Transition declaration without the leading keyword; the guard comes last
/// because it extends to the end of the line.
pub(crate) fn transition_decl(t: &TransitionDef) -> String {
    let mut out = t.id.clone();
    for kind in ArcKind::ALL {
        write_arcs(&mut out, kind, t.arcs(kind));
    }
    if t.counted {
        out.push_str(" counted");
    }
    if !t.label.is_empty() {
        let _ = write!(out, " label {}", quote(&t.label));
    }
    if let Some(g) = &t.guard {
        let _ = write!(out, " guard {g}");
    }
    out
}

/// Canonical text: metadata, places, transitions, forbidden predicates,
/// audit rules, then modes; each block sorted by identifier.
///
/// Structurally equal models serialize to byte-identical text, and parsing
/// the output yields a model structurally equal to the input.
pub fn serialize_model(model: &NetModel) -> ModelSource {
    let m = model.canonical();
    let mut out = String::new();
    for (k, v) in &m.metadata {
        let _ = writeln!(out, "meta {k} {}", quote(v));
    }
    if !m.metadata.is_empty() {
        out.push('\n');
    }
    for p in &m.places {
        let _ = writeln!(out, "place {}", place_decl(p));
    }
    if !m.transitions.is_empty() {
        out.push('\n');
    }
    for t in &m.transitions {
        let _ = writeln!(out, "trans {}", transition_decl(t));
    }
    if !m.forbidden.is_empty() {
        out.push('\n');
    }
    for f in &m.forbidden {
        let _ = writeln!(out, "forbidden {} := {}", f.name, f.predicate);
    }
    if !m.audit_rules.is_empty() {
        out.push('\n');
    }
    for r in &m.audit_rules {
        let rule = match &r.kind {
            AuditKind::CounterThreshold {
                transition,
                threshold,
            } => format!("counter {transition} > {threshold}"),
            AuditKind::RateThreshold {
                transition,
                max,
                window,
            } => format!("rate {transition} max {max} per {window}"),
            AuditKind::OccupancyThreshold { place, cmp, level } => {
                format!("occupancy {place} {cmp} {level}")
            }
            AuditKind::PressureThreshold {
                predicate,
                max_distance,
            } => format!("pressure {predicate} <= {max_distance}"),
        };
        let _ = writeln!(out, "audit {} := {rule}", r.id);
    }
    if !m.modes.is_empty() {
        out.push('\n');
    }
    for mode in &m.modes {
        out.push_str("mode ");
        out.push_str(&mode.id);
        if !mode.disabled.is_empty() {
            out.push_str(" disable");
            for t in &mode.disabled {
                out.push(' ');
                out.push_str(t);
            }
        }
        out.push('\n');
        for (t, g) in &mode.guard_overrides {
            let _ = writeln!(out, "mode {} override {t} := {g}", mode.id);
        }
    }
    ModelSource::new(out)
}
