use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::explore::ReachGraph;
use crate::net::{CompiledPredicate, Marking, Net};

/// Firing distance to the nearest satisfying marking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Distance {
    Finite(u64),
    /// No satisfying marking is reachable inside the explored graph.
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<u64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Unreachable => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PressureReading {
    pub distance: Distance,
    /// Whether the underlying graph was cut off, in which case `Unreachable`
    /// only means "not within the explored part".
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PressureError {
    #[error("marking is not a node of the explored graph")]
    NodeNotInGraph,
}

/// Distances from every graph node to the predicate, by backward BFS.
#[derive(Debug, Clone)]
pub struct PressureMap<'g> {
    graph: &'g ReachGraph,
    dist: Vec<Option<u64>>,
}

impl<'g> PressureMap<'g> {
    pub fn compute(graph: &'g ReachGraph, pred: &CompiledPredicate) -> Self {
        let n = graph.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in graph.edges() {
            preds[e.to].push(e.from);
        }
        let mut dist = vec![None; n];
        let mut queue = VecDeque::new();
        for (i, m) in graph.nodes().iter().enumerate() {
            if pred.eval(m) {
                dist[i] = Some(0);
                queue.push_back(i);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap() + 1;
            for &u in &preds[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d);
                    queue.push_back(u);
                }
            }
        }
        PressureMap { graph, dist }
    }

    pub fn graph(&self) -> &ReachGraph {
        self.graph
    }

    pub fn distance_at(&self, node: usize) -> Distance {
        self.dist[node].map_or(Distance::Unreachable, Distance::Finite)
    }

    /// `None` when `m` is not a node of the graph.
    pub fn distance_of(&self, m: &Marking) -> Option<Distance> {
        self.graph.node_index(m).map(|i| self.distance_at(i))
    }
}

pub fn reachability_pressure(
    graph: &ReachGraph,
    m: &Marking,
    pred: &CompiledPredicate,
) -> Result<PressureReading, PressureError> {
    let map = PressureMap::compute(graph, pred);
    let distance = map.distance_of(m).ok_or(PressureError::NodeNotInGraph)?;
    Ok(PressureReading {
        distance,
        truncated: graph.truncated(),
    })
}

/// Pressure of `m` if it is at most `limit`, found by a forward search of
/// depth `limit` on the net itself rather than on an explored graph.
pub fn pressure_within(net: &Net, m: &Marking, pred: &CompiledPredicate, limit: u32) -> Option<u64> {
    if pred.eval(m) {
        return Some(0);
    }
    let mut seen: HashSet<Marking> = HashSet::from([m.clone()]);
    let mut frontier = vec![m.clone()];
    for depth in 1..=u64::from(limit) {
        let mut next = Vec::new();
        for u in &frontier {
            for t in net.enabled_indices(u) {
                let v = net.fire_ix(u, t);
                if pred.eval(&v) {
                    return Some(depth);
                }
                if seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{explore, ExplorationBound};
    use crate::net::{Cmp, Net, NetModel, PlaceDef, Predicate, TransitionDef};

    #[test]
    fn chain_pressure_counts_remaining_firings() {
        let net = Net::new(NetModel {
            places: vec![PlaceDef::new("p0", 1), PlaceDef::new("p1", 0), PlaceDef::new("p2", 0)],
            transitions: vec![
                TransitionDef::new("t1").input("p0", 1).output("p1", 1),
                TransitionDef::new("t2").input("p1", 1).output("p2", 1),
            ],
            ..NetModel::default()
        })
        .unwrap();
        let g = explore(&net, &ExplorationBound::default());
        let pred = net.compile(&Predicate::tokens("p2", Cmp::Ge, 1)).unwrap();
        let root = net.initial_marking().clone();
        assert_eq!(
            reachability_pressure(&g, &root, &pred).unwrap().distance,
            Distance::Finite(2)
        );
        let after = net.fire(&root, "t1").unwrap();
        assert_eq!(
            reachability_pressure(&g, &after, &pred).unwrap().distance,
            Distance::Finite(1)
        );
        assert_eq!(pressure_within(&net, &root, &pred, 2), Some(2));
        assert_eq!(pressure_within(&net, &root, &pred, 1), None);
        let stray = net.marking_from(&[("p0", 5)]).unwrap();
        assert_eq!(
            reachability_pressure(&g, &stray, &pred),
            Err(PressureError::NodeNotInGraph)
        );
        let never = net.compile(&Predicate::tokens("p2", Cmp::Ge, 2)).unwrap();
        assert_eq!(
            reachability_pressure(&g, &root, &never).unwrap().distance,
            Distance::Unreachable
        );
    }
}
