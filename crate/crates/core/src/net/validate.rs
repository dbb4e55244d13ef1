use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::audit::AuditKind;
use crate::net::model::{ArcKind, NetModel};
use crate::net::predicate::Predicate;

/// Words the model language reserves; they cannot be used as identifiers.
pub const KEYWORDS: &[&str] = &[
    "place", "trans", "in", "out", "inhibit", "read", "guard", "counted", "label", "cap", "init",
    "forbidden", "audit", "mode", "ratelimit", "max", "per", "and", "or", "not", "true", "false",
    "meta", "disable", "override", "counter", "rate", "occupancy", "pressure", "initial", "none",
];

/// A violated well-formedness rule, naming the offending element.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("arc endpoint `{0}` is not a declared place")]
    UnknownEndpoint(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("{context} references unknown {kind} `{name}`")]
    UnknownReference {
        context: String,
        kind: &'static str,
        name: String,
    },
    #[error("arc {transition}/{place} has weight 0")]
    ZeroWeight { transition: String, place: String },
    #[error("place `{0}` has capacity 0")]
    ZeroCapacity(String),
    #[error("place `{place}` starts with {initial} tokens, above capacity {capacity}")]
    InitialExceedsCapacity {
        place: String,
        initial: u32,
        capacity: u32,
    },
    #[error("transition `{transition}` lists place `{place}` twice as {role}")]
    DuplicateArc {
        transition: String,
        place: String,
        role: &'static str,
    },
    #[error("transition `{transition}` can never fire: its inhibitor on `{place}` blocks the tokens it needs")]
    ConflictingArcRoles { transition: String, place: String },
    #[error("{context} reads the counter of `{transition}`, which is not counted")]
    CounterNotTracked { context: String, transition: String },
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("mode `{0}` has no mode place")]
    ModePlaceMissing(String),
    #[error("mode places must hold exactly one token in total, found {0}")]
    ModeTokenCount(u32),
    #[error("audit rule `{rule}`: {reason}")]
    InvalidAuditRule { rule: String, reason: String },
}

pub fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&s)
}

/// Checks every `NetModel` invariant; an empty result means the model is well-formed.
pub fn validate_net(model: &NetModel) -> Vec<StructureError> {
    let mut errors = Vec::new();

    let mut seen: HashSet<&str> = HashSet::new();
    for id in model
        .places
        .iter()
        .map(|p| p.id.as_str())
        .chain(model.transitions.iter().map(|t| t.id.as_str()))
    {
        if !is_valid_identifier(id) {
            errors.push(StructureError::InvalidIdentifier(id.to_string()));
        }
        if !seen.insert(id) {
            errors.push(StructureError::DuplicateId(id.to_string()));
        }
    }

    let places: HashMap<&str, _> = model.places.iter().map(|p| (p.id.as_str(), p)).collect();
    let transitions: HashMap<&str, _> = model.transitions.iter().map(|t| (t.id.as_str(), t)).collect();
    let modes: HashSet<&str> = model.modes.iter().map(|m| m.id.as_str()).collect();

    for p in &model.places {
        match p.capacity {
            Some(0) => errors.push(StructureError::ZeroCapacity(p.id.clone())),
            Some(cap) if p.initial > cap => errors.push(StructureError::InitialExceedsCapacity {
                place: p.id.clone(),
                initial: p.initial,
                capacity: cap,
            }),
            _ => {}
        }
    }

    for t in &model.transitions {
        for kind in ArcKind::ALL {
            let mut in_role = HashSet::new();
            for arc in t.arcs(kind) {
                if !places.contains_key(arc.place.as_str()) {
                    errors.push(StructureError::UnknownEndpoint(arc.place.clone()));
                }
                if arc.weight == 0 {
                    errors.push(StructureError::ZeroWeight {
                        transition: t.id.clone(),
                        place: arc.place.clone(),
                    });
                }
                if !in_role.insert(arc.place.as_str()) {
                    errors.push(StructureError::DuplicateArc {
                        transition: t.id.clone(),
                        place: arc.place.clone(),
                        role: kind.keyword(),
                    });
                }
            }
        }
        for inh in &t.inhibitors {
            let needed = t
                .inputs
                .iter()
                .chain(&t.reads)
                .filter(|a| a.place == inh.place)
                .map(|a| a.weight)
                .max();
            if needed.is_some_and(|w| inh.weight <= w) {
                errors.push(StructureError::ConflictingArcRoles {
                    transition: t.id.clone(),
                    place: inh.place.clone(),
                });
            }
        }
        if let Some(g) = &t.guard {
            check_predicate(&format!("guard of `{}`", t.id), g, &places, &transitions, &modes, &mut errors);
        }
    }

    let mut names = HashSet::new();
    for f in &model.forbidden {
        if !is_valid_identifier(&f.name) {
            errors.push(StructureError::InvalidIdentifier(f.name.clone()));
        }
        if !names.insert(f.name.as_str()) {
            errors.push(StructureError::DuplicateName {
                kind: "forbidden predicate",
                name: f.name.clone(),
            });
        }
        check_predicate(
            &format!("forbidden `{}`", f.name),
            &f.predicate,
            &places,
            &transitions,
            &modes,
            &mut errors,
        );
    }

    let mut rule_ids = HashSet::new();
    for rule in &model.audit_rules {
        if !is_valid_identifier(&rule.id) {
            errors.push(StructureError::InvalidIdentifier(rule.id.clone()));
        }
        if !rule_ids.insert(rule.id.as_str()) {
            errors.push(StructureError::DuplicateName {
                kind: "audit rule",
                name: rule.id.clone(),
            });
        }
        let ctx = format!("audit rule `{}`", rule.id);
        match &rule.kind {
            AuditKind::CounterThreshold { transition, .. } => match transitions.get(transition.as_str()) {
                None => errors.push(unknown(&ctx, "transition", transition)),
                Some(t) if !t.counted => errors.push(StructureError::CounterNotTracked {
                    context: ctx.clone(),
                    transition: transition.clone(),
                }),
                _ => {}
            },
            AuditKind::RateThreshold {
                transition, window, ..
            } => {
                if !transitions.contains_key(transition.as_str()) {
                    errors.push(unknown(&ctx, "transition", transition));
                }
                if *window == 0 {
                    errors.push(StructureError::InvalidAuditRule {
                        rule: rule.id.clone(),
                        reason: "window must be at least 1 step".into(),
                    });
                }
            }
            AuditKind::OccupancyThreshold { place, .. } => {
                if !places.contains_key(place.as_str()) {
                    errors.push(unknown(&ctx, "place", place));
                }
            }
            AuditKind::PressureThreshold { predicate, .. } => {
                if model.forbidden_predicate(predicate).is_none() {
                    errors.push(unknown(&ctx, "forbidden predicate", predicate));
                }
            }
        }
    }

    let mut mode_ids = HashSet::new();
    let mut mode_tokens = 0u32;
    for mode in &model.modes {
        if !is_valid_identifier(&mode.id) {
            errors.push(StructureError::InvalidIdentifier(mode.id.clone()));
        }
        if !mode_ids.insert(mode.id.as_str()) {
            errors.push(StructureError::DuplicateName {
                kind: "mode",
                name: mode.id.clone(),
            });
        }
        match places.get(mode.place_id().as_str()) {
            Some(p) => mode_tokens += p.initial,
            None => errors.push(StructureError::ModePlaceMissing(mode.id.clone())),
        }
        let ctx = format!("mode `{}`", mode.id);
        for t in mode.disabled.iter().chain(mode.guard_overrides.keys()) {
            if !transitions.contains_key(t.as_str()) {
                errors.push(unknown(&ctx, "transition", t));
            }
        }
        for g in mode.guard_overrides.values() {
            check_predicate(&ctx, g, &places, &transitions, &modes, &mut errors);
        }
    }
    if !model.modes.is_empty() && mode_tokens != 1 {
        errors.push(StructureError::ModeTokenCount(mode_tokens));
    }

    errors
}

fn unknown(context: &str, kind: &'static str, name: &str) -> StructureError {
    StructureError::UnknownReference {
        context: context.to_string(),
        kind,
        name: name.to_string(),
    }
}

fn check_predicate(
    context: &str,
    pred: &Predicate,
    places: &HashMap<&str, &crate::net::model::PlaceDef>,
    transitions: &HashMap<&str, &crate::net::model::TransitionDef>,
    modes: &HashSet<&str>,
    errors: &mut Vec<StructureError>,
) {
    for p in pred.places() {
        if !places.contains_key(p) {
            errors.push(unknown(context, "place", p));
        }
    }
    for t in pred.counters() {
        match transitions.get(t) {
            None => errors.push(unknown(context, "transition", t)),
            Some(def) if !def.counted => errors.push(StructureError::CounterNotTracked {
                context: context.to_string(),
                transition: t.to_string(),
            }),
            _ => {}
        }
    }
    for m in pred.modes() {
        if !modes.contains(m) {
            errors.push(unknown(context, "mode", m));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::model::{PlaceDef, TransitionDef};
    use crate::net::predicate::Cmp;

    fn simple() -> NetModel {
        NetModel {
            places: vec![PlaceDef::new("p", 1), PlaceDef::new("q", 0)],
            transitions: vec![TransitionDef::new("t").input("p", 1).output("q", 1)],
            ..NetModel::default()
        }
    }

    #[test]
    fn clean_model_has_no_errors() {
        assert!(validate_net(&simple()).is_empty());
    }

    #[test]
    fn duplicate_place_is_reported() {
        let mut m = simple();
        m.places.push(PlaceDef::new("p", 0));
        assert_eq!(validate_net(&m), vec![StructureError::DuplicateId("p".into())]);
    }

    #[test]
    fn place_and_transition_ids_are_disjoint() {
        let mut m = simple();
        m.places.push(PlaceDef::new("t", 0));
        assert_eq!(validate_net(&m), vec![StructureError::DuplicateId("t".into())]);
    }

    #[test]
    fn arc_to_undeclared_place() {
        let mut m = simple();
        m.transitions[0].outputs.push(crate::net::model::ArcRef::new("px", 1));
        assert_eq!(validate_net(&m), vec![StructureError::UnknownEndpoint("px".into())]);
    }

    #[test]
    fn weights_and_capacities_must_be_positive() {
        let mut m = simple();
        m.transitions[0].inputs[0].weight = 0;
        m.places[1].capacity = Some(0);
        let errs = validate_net(&m);
        assert!(errs.contains(&StructureError::ZeroWeight {
            transition: "t".into(),
            place: "p".into()
        }));
        assert!(errs.contains(&StructureError::ZeroCapacity("q".into())));
    }

    #[test]
    fn initial_marking_respects_capacity() {
        let mut m = simple();
        m.places[0].capacity = Some(1);
        m.places[0].initial = 2;
        assert_eq!(
            validate_net(&m),
            vec![StructureError::InitialExceedsCapacity {
                place: "p".into(),
                initial: 2,
                capacity: 1
            }]
        );
    }

    #[test]
    fn inhibitor_at_or_below_input_weight_conflicts() {
        let mut ok = simple();
        ok.transitions[0] = ok.transitions[0].clone().inhibitor("p", 2);
        assert_eq!(validate_net(&ok), vec![]);
        let mut m = simple();
        m.transitions[0] = m.transitions[0].clone().inhibitor("p", 1);
        assert_eq!(
            validate_net(&m),
            vec![StructureError::ConflictingArcRoles {
                transition: "t".into(),
                place: "p".into()
            }]
        );
    }

    #[test]
    fn counter_atoms_need_counted_transitions() {
        let mut m = simple();
        m.transitions[0].guard = Some(Predicate::counter("t", Cmp::Lt, 3));
        assert!(matches!(
            validate_net(&m).as_slice(),
            [StructureError::CounterNotTracked { .. }]
        ));
        m.transitions[0].counted = true;
        assert!(validate_net(&m).is_empty());
    }

    #[test]
    fn reserved_words_are_not_identifiers() {
        assert!(!is_valid_identifier("place"));
        assert!(!is_valid_identifier("1p"));
        assert!(!is_valid_identifier("p-1"));
        assert!(is_valid_identifier("p_bad"));
    }
}
