use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{check_all, ExplorationBound, Verdict, VerdictKind};
use crate::audit::AuditKind;
use crate::governance::patch::{EditOp, Patch};
use crate::net::{validate_net, ArcRef, Net, NetModel, Predicate, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchError {
    #[error("op {op}: cannot remove `{target}`, still referenced by {referenced_by}")]
    DanglingReference {
        op: usize,
        target: String,
        referenced_by: String,
    },
    #[error("op {op}: unknown {kind} `{target}`")]
    UnknownTarget {
        op: usize,
        kind: &'static str,
        target: String,
    },
    #[error("input model is invalid: {0}")]
    InvalidInput(String),
    #[error("patched model is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    ResultingModelInvalid(Vec<StructureError>),
}

fn unknown(op: usize, kind: &'static str, target: &str) -> PatchError {
    PatchError::UnknownTarget {
        op,
        kind,
        target: target.to_string(),
    }
}

fn dangling(op: usize, target: &str, by: String) -> PatchError {
    PatchError::DanglingReference {
        op,
        target: target.to_string(),
        referenced_by: by,
    }
}

/// Every predicate of the model with a description of where it lives.
fn predicates(model: &NetModel) -> Vec<(String, &Predicate)> {
    let mut out = Vec::new();
    for t in &model.transitions {
        if let Some(g) = &t.guard {
            out.push((format!("guard of `{}`", t.id), g));
        }
    }
    for f in &model.forbidden {
        out.push((format!("forbidden predicate `{}`", f.name), &f.predicate));
    }
    for m in &model.modes {
        for (t, g) in &m.guard_overrides {
            out.push((format!("override of `{t}` in mode `{}`", m.id), g));
        }
    }
    out
}

fn place_user(model: &NetModel, place: &str) -> Option<String> {
    if let Some(t) = model.transitions.iter().find(|t| t.adjacent_places().contains(place)) {
        return Some(format!("transition `{}`", t.id));
    }
    if let Some((ctx, _)) = predicates(model).into_iter().find(|(_, p)| p.places().contains(place)) {
        return Some(ctx);
    }
    model.audit_rules.iter().find_map(|r| match &r.kind {
        AuditKind::OccupancyThreshold { place: p, .. } if p == place => Some(format!("audit rule `{}`", r.id)),
        _ => None,
    })
}

fn transition_user(model: &NetModel, transition: &str) -> Option<String> {
    if let Some((ctx, _)) = predicates(model)
        .into_iter()
        .find(|(_, p)| p.counters().contains(transition))
    {
        return Some(ctx);
    }
    if let Some(r) = model.audit_rules.iter().find(|r| match &r.kind {
        AuditKind::CounterThreshold { transition: t, .. } | AuditKind::RateThreshold { transition: t, .. } => {
            t == transition
        }
        _ => false,
    }) {
        return Some(format!("audit rule `{}`", r.id));
    }
    model
        .modes
        .iter()
        .find(|m| m.disabled.contains(transition) || m.guard_overrides.contains_key(transition))
        .map(|m| format!("mode `{}`", m.id))
}

fn apply_op(model: &mut NetModel, i: usize, op: &EditOp) -> Result<(), PatchError> {
    match op {
        EditOp::AddPlace(p) => model.places.push(p.clone()),
        EditOp::AddTransition(t) => model.transitions.push(t.clone()),
        EditOp::RemovePlace(p) => {
            let pos = model
                .places
                .iter()
                .position(|x| &x.id == p)
                .ok_or_else(|| unknown(i, "place", p))?;
            if let Some(by) = place_user(model, p) {
                return Err(dangling(i, p, by));
            }
            model.places.remove(pos);
        }
        EditOp::RemoveTransition(t) => {
            let pos = model
                .transitions
                .iter()
                .position(|x| &x.id == t)
                .ok_or_else(|| unknown(i, "transition", t))?;
            if let Some(by) = transition_user(model, t) {
                return Err(dangling(i, t, by));
            }
            model.transitions.remove(pos);
        }
        EditOp::AddArc {
            transition,
            kind,
            place,
            weight,
        } => {
            if model.place(place).is_none() {
                return Err(unknown(i, "place", place));
            }
            let t = model
                .transition_mut(transition)
                .ok_or_else(|| unknown(i, "transition", transition))?;
            t.arcs_mut(*kind).push(ArcRef::new(place.clone(), *weight));
        }
        EditOp::RemoveArc {
            transition,
            kind,
            place,
        } => {
            let t = model
                .transition_mut(transition)
                .ok_or_else(|| unknown(i, "transition", transition))?;
            let arcs = t.arcs_mut(*kind);
            let pos = arcs
                .iter()
                .position(|a| &a.place == place)
                .ok_or_else(|| unknown(i, "arc", &format!("{} {transition} {place}", kind.keyword())))?;
            arcs.remove(pos);
        }
        EditOp::SetGuard { transition, guard } => {
            model
                .transition_mut(transition)
                .ok_or_else(|| unknown(i, "transition", transition))?
                .guard = guard.clone();
        }
        EditOp::SetCapacity { place, capacity } => {
            model
                .place_mut(place)
                .ok_or_else(|| unknown(i, "place", place))?
                .capacity = *capacity;
        }
        EditOp::AddForbidden(f) => model.forbidden.push(f.clone()),
        EditOp::RemoveForbidden(name) => {
            let pos = model
                .forbidden
                .iter()
                .position(|f| &f.name == name)
                .ok_or_else(|| unknown(i, "forbidden predicate", name))?;
            if let Some(r) = model.audit_rules.iter().find(
                |r| matches!(&r.kind, AuditKind::PressureThreshold { predicate, .. } if predicate == name),
            ) {
                return Err(dangling(i, name, format!("audit rule `{}`", r.id)));
            }
            model.forbidden.remove(pos);
        }
        EditOp::SetLabel { target, label } => {
            if let Some(p) = model.place_mut(target) {
                p.label = label.clone();
            } else if let Some(t) = model.transition_mut(target) {
                t.label = label.clone();
            } else {
                return Err(unknown(i, "place or transition", target));
            }
        }
        EditOp::SwitchMode(mode) => {
            if !model.modes.iter().any(|m| &m.id == mode) {
                return Err(unknown(i, "mode", mode));
            }
            let target = crate::net::mode_place_id(mode);
            let ids: Vec<String> = model.modes.iter().map(|m| m.place_id()).collect();
            for p in model.places.iter_mut().filter(|p| ids.contains(&p.id)) {
                p.initial = u32::from(p.id == target);
            }
        }
    }
    Ok(())
}

/// Applies every op in order to a copy of `model`. On any error nothing is
/// returned and `model` is unchanged.
pub fn apply_patch(model: &NetModel, patch: &Patch) -> Result<NetModel, PatchError> {
    let mut next = model.clone();
    for (i, op) in patch.ops.iter().enumerate() {
        apply_op(&mut next, i, op)?;
    }
    let errors = validate_net(&next);
    if !errors.is_empty() {
        return Err(PatchError::ResultingModelInvalid(errors));
    }
    Ok(next)
}

/// Verdicts for one forbidden predicate before and after a patch; `None`
/// when the predicate does not exist on that side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateComparison {
    pub name: String,
    pub before: Option<Verdict>,
    pub after: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regression {
    pub predicate: String,
    pub after: VerdictKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub patch_id: String,
    pub bound: ExplorationBound,
    pub comparisons: Vec<PredicateComparison>,
    pub states_before: usize,
    pub states_after: usize,
    pub truncated_before: bool,
    pub truncated_after: bool,
    /// Predicates that were Safe before and are Unsafe or Unknown after.
    pub regressions: Vec<Regression>,
    pub predicates_added: Vec<String>,
    pub predicates_removed: Vec<String>,
    /// Same name, different formula.
    pub predicates_changed: Vec<String>,
}

impl VerificationReport {
    pub fn predicate_set_changed(&self) -> bool {
        !(self.predicates_added.is_empty() && self.predicates_removed.is_empty() && self.predicates_changed.is_empty())
    }

    pub fn has_unsafe_regression(&self) -> bool {
        self.regressions.iter().any(|r| r.after == VerdictKind::Unsafe)
    }

    pub fn comparison(&self, name: &str) -> Option<&PredicateComparison> {
        self.comparisons.iter().find(|c| c.name == name)
    }
}

/// Applies the patch and checks every forbidden predicate on both sides.
pub fn verify_patch(model: &NetModel, patch: &Patch, bound: &ExplorationBound) -> Result<VerificationReport, PatchError> {
    verify_patch_with_workers(model, patch, bound, 1)
}

pub fn verify_patch_with_workers(
    model: &NetModel,
    patch: &Patch,
    bound: &ExplorationBound,
    workers: usize,
) -> Result<VerificationReport, PatchError> {
    let after_model = apply_patch(model, patch)?;
    let before_net = Net::new(model.clone()).map_err(|e| PatchError::InvalidInput(e.to_string()))?;
    let after_net = Net::new(after_model.clone()).expect("apply_patch validates its result");
    let before = check_all(&before_net, bound, workers);
    let after = check_all(&after_net, bound, workers);

    let names: BTreeSet<&str> = model
        .forbidden
        .iter()
        .chain(&after_model.forbidden)
        .map(|f| f.name.as_str())
        .collect();
    let mut report = VerificationReport {
        patch_id: patch.id(),
        bound: *bound,
        comparisons: Vec::new(),
        states_before: before.states,
        states_after: after.states,
        truncated_before: before.truncated,
        truncated_after: after.truncated,
        regressions: Vec::new(),
        predicates_added: Vec::new(),
        predicates_removed: Vec::new(),
        predicates_changed: Vec::new(),
    };
    for name in names {
        let b = before.verdict(name).cloned();
        let a = after.verdict(name).cloned();
        match (model.forbidden_predicate(name), after_model.forbidden_predicate(name)) {
            (None, Some(_)) => report.predicates_added.push(name.to_string()),
            (Some(_), None) => report.predicates_removed.push(name.to_string()),
            (Some(x), Some(y)) if x != y => report.predicates_changed.push(name.to_string()),
            _ => {}
        }
        if let (Some(b), Some(a)) = (&b, &a) {
            if b.kind() == VerdictKind::Safe && a.kind() != VerdictKind::Safe {
                report.regressions.push(Regression {
                    predicate: name.to_string(),
                    after: a.kind(),
                });
            }
        }
        report.comparisons.push(PredicateComparison {
            name: name.to_string(),
            before: b,
            after: a,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{ArcKind, Cmp, NamedPredicate, PlaceDef, TransitionDef};

    fn chain() -> NetModel {
        NetModel {
            places: vec![PlaceDef::new("p0", 1), PlaceDef::new("p1", 0), PlaceDef::new("p2", 0)],
            transitions: vec![
                TransitionDef::new("t1").input("p0", 1).output("p1", 1),
                TransitionDef::new("t2").input("p1", 1).output("p2", 1),
            ],
            forbidden: vec![NamedPredicate {
                name: "done".into(),
                predicate: Predicate::tokens("p2", Cmp::Ge, 1),
            }],
            ..NetModel::default()
        }
    }

    #[test]
    fn removing_a_referenced_place_is_dangling() {
        let err = apply_patch(&chain(), &Patch::new(vec![EditOp::RemovePlace("p1".into())])).unwrap_err();
        assert!(matches!(err, PatchError::DanglingReference { .. }));
    }

    #[test]
    fn empty_patch_is_identity() {
        let m = chain();
        assert!(apply_patch(&m, &Patch::default()).unwrap().structurally_eq(&m));
    }

    #[test]
    fn failure_midway_is_atomic() {
        let m = chain();
        let patch = Patch::new(vec![
            EditOp::SetCapacity {
                place: "p0".into(),
                capacity: Some(1),
            },
            EditOp::SetGuard {
                transition: "nope".into(),
                guard: None,
            },
        ]);
        assert!(matches!(apply_patch(&m, &patch), Err(PatchError::UnknownTarget { .. })));
        assert_eq!(m, chain());
    }

    #[test]
    fn invalid_result_is_rejected() {
        let patch = Patch::new(vec![EditOp::AddPlace(PlaceDef::new("p0", 0))]);
        assert!(matches!(
            apply_patch(&chain(), &patch),
            Err(PatchError::ResultingModelInvalid(_))
        ));
    }

    #[test]
    fn blocking_t2_makes_done_safe() {
        let patch = Patch::new(vec![EditOp::AddArc {
            transition: "t2".into(),
            kind: ArcKind::Read,
            place: "p0".into(),
            weight: 1,
        }]);
        let r = verify_patch(&chain(), &patch, &ExplorationBound::default()).unwrap();
        let c = r.comparison("done").unwrap();
        assert_eq!(c.before.as_ref().unwrap().kind(), VerdictKind::Unsafe);
        assert_eq!(c.after.as_ref().unwrap().kind(), VerdictKind::Safe);
        assert!(r.regressions.is_empty());
        assert!(!r.predicate_set_changed());
    }

    #[test]
    fn removing_a_predicate_is_flagged() {
        let patch = Patch::new(vec![EditOp::RemoveForbidden("done".into())]);
        let r = verify_patch(&chain(), &patch, &ExplorationBound::default()).unwrap();
        assert_eq!(r.predicates_removed, vec!["done".to_string()]);
        assert!(r.predicate_set_changed());
    }

    #[test]
    fn label_patch_keeps_verdicts() {
        let patch = Patch::new(vec![EditOp::SetLabel {
            target: "t1".into(),
            label: "start".into(),
        }]);
        let r = verify_patch(&chain(), &patch, &ExplorationBound::default()).unwrap();
        let c = r.comparison("done").unwrap();
        assert_eq!(c.before, c.after);
    }
}
