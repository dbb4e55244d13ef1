use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::explore::{explore_with_workers, shortest_witness, violation_trace, ExplorationBound, ReachGraph};
use crate::analysis::karp_miller::{karp_miller_compiled, karp_miller_eligible};
use crate::net::{CompiledPredicate, Marking, Net};

/// Firing sequence from the initial marking with every intermediate marking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationTrace {
    pub firings: Vec<String>,
    /// `firings.len() + 1` entries, starting with the initial marking.
    pub markings: Vec<Marking>,
}

impl ViolationTrace {
    pub fn final_marking(&self) -> &Marking {
        self.markings.last().expect("trace always holds the start marking")
    }

    /// Replays the firings from the start marking and checks the recorded markings.
    pub fn replays_on(&self, net: &Net) -> bool {
        match net.replay(&self.markings[0], &self.firings) {
            Ok(ms) => ms == self.markings,
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SafeProof {
    /// The bounded exploration finished without truncation.
    ExhaustiveBounded { states: usize },
    /// The Karp–Miller tree has no node covering the predicate.
    Coverability { tree_nodes: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Safe(SafeProof),
    Unsafe(ViolationTrace),
    Unknown { states_explored: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub predicate: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Safe,
    Unsafe,
    Unknown,
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self.outcome {
            Outcome::Safe(_) => VerdictKind::Safe,
            Outcome::Unsafe(_) => VerdictKind::Unsafe,
            Outcome::Unknown { .. } => VerdictKind::Unknown,
        }
    }

    pub fn trace(&self) -> Option<&ViolationTrace> {
        match &self.outcome {
            Outcome::Unsafe(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_safe(&self) -> bool {
        self.kind() == VerdictKind::Safe
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown forbidden predicate `{0}`")]
    UnknownPredicate(String),
}

/// Decides whether the named forbidden predicate is reachable.
///
/// Unsafe carries a shortest trace; Safe is either an untruncated exhaustive
/// exploration or a coverability proof for upward-closed predicates; anything
/// else is Unknown.
pub fn check_forbidden(net: &Net, name: &str, bound: &ExplorationBound) -> Result<Verdict, CheckError> {
    check_forbidden_with_workers(net, name, bound, 1)
}

pub fn check_forbidden_with_workers(
    net: &Net,
    name: &str,
    bound: &ExplorationBound,
    workers: usize,
) -> Result<Verdict, CheckError> {
    let pred = net
        .forbidden(name)
        .ok_or_else(|| CheckError::UnknownPredicate(name.to_string()))?;
    let graph = explore_with_workers(net, bound, workers);
    Ok(decide(net, &graph, name, &pred, bound))
}

/// Verdicts for every forbidden predicate of a model, sharing one exploration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub states: usize,
    pub edges: usize,
    pub truncated: bool,
    pub verdicts: Vec<Verdict>,
}

impl CheckSummary {
    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.predicate == name)
    }
}

pub fn check_all(net: &Net, bound: &ExplorationBound, workers: usize) -> CheckSummary {
    let graph = explore_with_workers(net, bound, workers);
    let verdicts = net
        .model()
        .forbidden
        .iter()
        .map(|f| {
            let pred = net.forbidden(&f.name).expect("declared predicate compiles");
            decide(net, &graph, &f.name, &pred, bound)
        })
        .collect();
    CheckSummary {
        states: graph.len(),
        edges: graph.edges().len(),
        truncated: graph.truncated(),
        verdicts,
    }
}

fn decide(net: &Net, graph: &ReachGraph, name: &str, pred: &CompiledPredicate, bound: &ExplorationBound) -> Verdict {
    let verdict = |outcome| Verdict {
        predicate: name.to_string(),
        outcome,
    };
    if let Some(trace) = violation_trace(net, graph, pred) {
        return verdict(Outcome::Unsafe(trace));
    }
    if !graph.truncated() {
        return verdict(Outcome::Safe(SafeProof::ExhaustiveBounded { states: graph.len() }));
    }
    if karp_miller_eligible(pred.source()) {
        let km = karp_miller_compiled(net, pred, bound.max_states, bound.max_tokens_per_place);
        match km.covered {
            Some(false) => {
                return verdict(Outcome::Safe(SafeProof::Coverability {
                    tree_nodes: km.tree.len(),
                }))
            }
            Some(true) => {
                if let Some(trace) = shortest_witness(net, pred, bound.max_states) {
                    return verdict(Outcome::Unsafe(trace));
                }
            }
            None => {}
        }
    }
    verdict(Outcome::Unknown {
        states_explored: graph.len(),
    })
}
