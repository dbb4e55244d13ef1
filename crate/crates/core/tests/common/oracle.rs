//! Brute-force reference semantics written directly against the model
//! definition, with markings keyed by identifier.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use respetri_core::net::{mode_place_id, NetModel, Predicate, TransitionDef};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NamedMarking {
    pub tokens: BTreeMap<String, u32>,
    pub counters: BTreeMap<String, u32>,
}

pub fn initial(model: &NetModel) -> NamedMarking {
    NamedMarking {
        tokens: model.places.iter().map(|p| (p.id.clone(), p.initial)).collect(),
        counters: model
            .transitions
            .iter()
            .filter(|t| t.counted)
            .map(|t| (t.id.clone(), 0))
            .collect(),
    }
}

fn compare(cmp: respetri_core::net::Cmp, lhs: u32, rhs: u32) -> bool {
    use respetri_core::net::Cmp::*;
    match cmp {
        Lt => lhs < rhs,
        Le => lhs <= rhs,
        Eq => lhs == rhs,
        Ge => lhs >= rhs,
        Gt => lhs > rhs,
    }
}

pub fn holds(pred: &Predicate, m: &NamedMarking) -> bool {
    match pred {
        Predicate::Const(b) => *b,
        Predicate::Tokens { place, cmp, value } => compare(*cmp, m.tokens[place], *value),
        Predicate::Counter { transition, cmp, value } => compare(*cmp, m.counters[transition], *value),
        Predicate::Mode(id) => m.tokens.get(&mode_place_id(id)).copied().unwrap_or(0) > 0,
        Predicate::And(ps) => ps.iter().all(|p| holds(p, m)),
        Predicate::Or(ps) => ps.iter().any(|p| holds(p, m)),
        Predicate::Not(p) => !holds(p, m),
    }
}

fn guard_of<'a>(model: &'a NetModel, t: &'a TransitionDef, m: &NamedMarking) -> Option<&'a Predicate> {
    let active = model
        .modes
        .iter()
        .find(|mode| m.tokens.get(&mode.place_id()).copied().unwrap_or(0) > 0);
    active
        .and_then(|mode| mode.guard_overrides.get(&t.id))
        .or(t.guard.as_ref())
}

fn net_change(t: &TransitionDef) -> BTreeMap<&str, i64> {
    let mut d: BTreeMap<&str, i64> = BTreeMap::new();
    for a in &t.inputs {
        *d.entry(&a.place).or_default() -= i64::from(a.weight);
    }
    for a in &t.outputs {
        *d.entry(&a.place).or_default() += i64::from(a.weight);
    }
    d
}

pub fn enabled(model: &NetModel, t: &TransitionDef, m: &NamedMarking) -> bool {
    for a in t.inputs.iter().chain(&t.reads) {
        if m.tokens[&a.place] < a.weight {
            return false;
        }
    }
    for a in &t.inhibitors {
        if m.tokens[&a.place] >= a.weight {
            return false;
        }
    }
    if let Some(g) = guard_of(model, t, m) {
        if !holds(g, m) {
            return false;
        }
    }
    for (place, delta) in net_change(t) {
        let cap = model.place(place).unwrap().capacity;
        if let Some(cap) = cap {
            if delta > 0 && i64::from(m.tokens[place]) + delta > i64::from(cap) {
                return false;
            }
        }
    }
    true
}

pub fn fire(t: &TransitionDef, m: &NamedMarking) -> NamedMarking {
    let mut next = m.clone();
    for (place, delta) in net_change(t) {
        let v = next.tokens.get_mut(place).unwrap();
        *v = (i64::from(*v) + delta) as u32;
    }
    if t.counted {
        *next.counters.get_mut(&t.id).unwrap() += 1;
    }
    next
}

pub fn successors(model: &NetModel, m: &NamedMarking) -> Vec<(String, NamedMarking)> {
    model
        .transitions
        .iter()
        .filter(|t| enabled(model, t, m))
        .map(|t| (t.id.clone(), fire(t, m)))
        .collect()
}

/// Reachable markings and labelled edges, dropping any successor whose
/// uncapacitated place or counter exceeds `cut`.
#[derive(Debug, Clone)]
pub struct OracleGraph {
    pub nodes: BTreeSet<NamedMarking>,
    pub edges: BTreeSet<(NamedMarking, String, NamedMarking)>,
    pub truncated: bool,
    /// Shortest firing distance from the initial marking.
    pub distance: BTreeMap<NamedMarking, usize>,
}

pub fn enumerate(model: &NetModel, cut: u32) -> OracleGraph {
    let over = |m: &NamedMarking| {
        m.tokens
            .iter()
            .any(|(p, &n)| model.place(p).unwrap().capacity.is_none() && n > cut)
            || m.counters.values().any(|&c| c > cut)
    };
    let start = initial(model);
    let mut g = OracleGraph {
        nodes: BTreeSet::from([start.clone()]),
        edges: BTreeSet::new(),
        truncated: false,
        distance: BTreeMap::from([(start.clone(), 0)]),
    };
    let mut queue = VecDeque::from([start]);
    while let Some(m) = queue.pop_front() {
        let d = g.distance[&m];
        for (t, next) in successors(model, &m) {
            if over(&next) {
                g.truncated = true;
                continue;
            }
            g.edges.insert((m.clone(), t, next.clone()));
            if g.nodes.insert(next.clone()) {
                g.distance.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    g
}

/// Shortest distance to a marking satisfying `pred`, if the enumerated graph has one.
pub fn shortest_hit(g: &OracleGraph, pred: &Predicate) -> Option<usize> {
    g.nodes.iter().filter(|m| holds(pred, m)).map(|m| g.distance[m]).min()
}

/// Replays `firings` from the initial marking under the reference semantics.
pub fn replay(model: &NetModel, firings: &[String]) -> Option<Vec<NamedMarking>> {
    let mut out = vec![initial(model)];
    for id in firings {
        let t = model.transition(id)?;
        let cur = out.last().unwrap();
        if !enabled(model, t, cur) {
            return None;
        }
        out.push(fire(t, cur));
    }
    Some(out)
}
