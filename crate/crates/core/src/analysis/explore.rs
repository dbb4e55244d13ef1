use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::verdict::ViolationTrace;
use crate::net::{CompiledPredicate, Marking, Net};

/// Limits on explicit-state exploration. Hitting any of them truncates the
/// graph instead of failing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationBound {
    pub max_states: usize,
    pub max_depth: usize,
    /// Applies to uncapacitated places and to firing counters.
    pub max_tokens_per_place: u32,
}

impl Default for ExplorationBound {
    fn default() -> Self {
        ExplorationBound {
            max_states: 1_000_000,
            max_depth: 10_000,
            max_tokens_per_place: 64,
        }
    }
}

/// A fired transition between two graph nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub transition: usize,
    pub to: usize,
}

/// Explored marking graph. Node 0 is the initial marking; nodes are numbered
/// in breadth-first discovery order and every edge satisfies
/// `to == fire(from, transition)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachGraph {
    nodes: Vec<Marking>,
    index: HashMap<Marking, usize>,
    depth: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
    edges: Vec<Edge>,
    /// `edges[edge_start[i]..edge_start[i + 1]]` leave node `i`.
    edge_start: Vec<usize>,
    truncated: bool,
    bound: ExplorationBound,
}

impl ReachGraph {
    pub fn root(&self) -> &Marking {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[Marking] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn bound(&self) -> &ExplorationBound {
        &self.bound
    }

    pub fn node_index(&self, m: &Marking) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// BFS depth, i.e. the length of the shortest firing sequence from the root.
    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    pub fn out_edges(&self, node: usize) -> &[Edge] {
        &self.edges[self.edge_start[node]..self.edge_start[node + 1]]
    }

    /// Nodes whose shortest distance from the root is at most `d`.
    pub fn nodes_within_depth(&self, d: usize) -> HashSet<&Marking> {
        self.nodes
            .iter()
            .zip(&self.depth)
            .filter(|(_, &k)| k <= d)
            .map(|(m, _)| m)
            .collect()
    }

    /// Shortest firing sequence from the root to `node`, ties broken by
    /// discovery order and then declaration order of transitions.
    pub fn path_to(&self, net: &Net, node: usize) -> ViolationTrace {
        let mut firings = Vec::new();
        let mut markings = vec![self.nodes[node].clone()];
        let mut cur = node;
        while let Some((prev, t)) = self.parent[cur] {
            firings.push(net.transition_id(t).to_string());
            markings.push(self.nodes[prev].clone());
            cur = prev;
        }
        firings.reverse();
        markings.reverse();
        ViolationTrace { firings, markings }
    }

    /// Graphviz rendering for inspection.
    pub fn to_dot(&self, net: &Net) -> String {
        let mut out = String::from("digraph reach {\n");
        for (i, m) in self.nodes.iter().enumerate() {
            out.push_str(&format!("  n{i} [label=\"{}\"];\n", net.display_marking(m)));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  n{} -> n{} [label=\"{}\"];\n",
                e.from,
                e.to,
                net.transition_id(e.transition)
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Breadth-first exploration on the calling thread.
pub fn explore(net: &Net, bound: &ExplorationBound) -> ReachGraph {
    explore_with_workers(net, bound, 1)
}

/// Breadth-first exploration where successor generation of each BFS layer is
/// split across `workers` threads. Successors are merged in frontier order,
/// so the graph is identical for every worker count.
pub fn explore_with_workers(net: &Net, bound: &ExplorationBound, workers: usize) -> ReachGraph {
    let pool = if workers > 1 {
        rayon::ThreadPoolBuilder::new().num_threads(workers).build().ok()
    } else {
        None
    };

    let root = net.initial_marking().clone();
    let mut g = ReachGraph {
        nodes: vec![root.clone()],
        index: HashMap::from([(root, 0)]),
        depth: vec![0],
        parent: vec![None],
        edges: Vec::new(),
        edge_start: vec![0],
        truncated: false,
        bound: *bound,
    };
    let over_cap = |m: &Marking| {
        m.tokens
            .iter()
            .zip(&net.capacities)
            .any(|(&n, cap)| cap.is_none() && n > bound.max_tokens_per_place)
            || m.counters.iter().any(|&c| c > bound.max_tokens_per_place)
    };
    let successors = |m: &Marking| -> Vec<(usize, Marking)> {
        net.enabled_indices(m)
            .into_iter()
            .map(|t| (t, net.fire_ix(m, t)))
            .collect()
    };

    let mut frontier: Vec<usize> = vec![0];
    let mut level = 0usize;
    while !frontier.is_empty() {
        if level >= bound.max_depth {
            if frontier
                .iter()
                .any(|&u| !net.enabled_indices(&g.nodes[u]).is_empty())
            {
                g.truncated = true;
            }
            break;
        }
        let layer: Vec<Vec<(usize, Marking)>> = match &pool {
            Some(pool) if frontier.len() >= 32 => pool.install(|| {
                frontier
                    .par_iter()
                    .map(|&u| successors(&g.nodes[u]))
                    .collect()
            }),
            _ => frontier.iter().map(|&u| successors(&g.nodes[u])).collect(),
        };
        let mut next = Vec::new();
        for (&u, succ) in frontier.iter().zip(layer) {
            debug_assert_eq!(g.edge_start.len(), u + 1);
            for (t, m) in succ {
                if over_cap(&m) {
                    g.truncated = true;
                    continue;
                }
                let v = match g.index.get(&m) {
                    Some(&v) => v,
                    None => {
                        if g.nodes.len() >= bound.max_states {
                            g.truncated = true;
                            continue;
                        }
                        let v = g.nodes.len();
                        g.index.insert(m.clone(), v);
                        g.nodes.push(m);
                        g.depth.push(level + 1);
                        g.parent.push(Some((u, t)));
                        next.push(v);
                        v
                    }
                };
                g.edges.push(Edge {
                    from: u,
                    transition: t,
                    to: v,
                });
            }
            g.edge_start.push(g.edges.len());
        }
        frontier = next;
        level += 1;
    }
    // nodes never expanded (depth cut or discovered last) have no out-edges
    while g.edge_start.len() < g.nodes.len() + 1 {
        g.edge_start.push(g.edges.len());
    }
    g
}

/// Shortest trace to a marking satisfying `pred`, if the graph contains one.
pub fn violation_trace(net: &Net, graph: &ReachGraph, pred: &CompiledPredicate) -> Option<ViolationTrace> {
    graph
        .nodes
        .iter()
        .position(|m| pred.eval(m))
        .map(|i| graph.path_to(net, i))
}

/// Breadth-first search for a satisfying marking without a token cut-off;
/// used to produce concrete witnesses once coverability is established.
pub(crate) fn shortest_witness(net: &Net, pred: &CompiledPredicate, max_states: usize) -> Option<ViolationTrace> {
    let bound = ExplorationBound {
        max_states,
        max_depth: usize::MAX,
        max_tokens_per_place: u32::MAX,
    };
    // the graph is grown layer by layer; stop early by checking each layer
    let root = net.initial_marking();
    if pred.eval(root) {
        return Some(ViolationTrace {
            firings: vec![],
            markings: vec![root.clone()],
        });
    }
    let mut index: HashMap<Marking, usize> = HashMap::from([(root.clone(), 0)]);
    let mut nodes = vec![root.clone()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for t in net.enabled_indices(&nodes[u]) {
                let m = net.fire_ix(&nodes[u], t);
                if index.contains_key(&m) {
                    continue;
                }
                if nodes.len() >= bound.max_states {
                    return None;
                }
                let v = nodes.len();
                let hit = pred.eval(&m);
                index.insert(m.clone(), v);
                nodes.push(m);
                parent.push(Some((u, t)));
                if hit {
                    let mut firings = Vec::new();
                    let mut markings = vec![nodes[v].clone()];
                    let mut cur = v;
                    while let Some((p, t)) = parent[cur] {
                        firings.push(net.transition_id(t).to_string());
                        markings.push(nodes[p].clone());
                        cur = p;
                    }
                    firings.reverse();
                    markings.reverse();
                    return Some(ViolationTrace { firings, markings });
                }
                next.push(v);
            }
        }
        frontier = next;
    }
    None
}
