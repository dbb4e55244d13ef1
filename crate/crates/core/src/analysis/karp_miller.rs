use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::VerdictKind;
use crate::net::{CompiledPredicate, Net, Predicate};

const OMEGA: u64 = u64::MAX;

/// A token or counter value in a coverability node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Count {
    Finite(u32),
    Omega,
}

impl Count {
    fn from_raw(v: u64) -> Self {
        if v == OMEGA {
            Count::Omega
        } else {
            Count::Finite(v as u32)
        }
    }

    /// True when this count is at least `n`.
    pub fn covers(self, n: u32) -> bool {
        match self {
            Count::Omega => true,
            Count::Finite(k) => k >= n,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Omega => f.write_str("ω"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KmNode {
    pub tokens: Vec<Count>,
    pub counters: Vec<Count>,
    pub parent: Option<usize>,
    /// Transition fired from the parent.
    pub via: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KarpMillerResult {
    pub tree: Vec<KmNode>,
    /// False when the node budget ran out before the tree was finished.
    pub complete: bool,
    /// `Some(true)` if a node satisfies the predicate, `Some(false)` if the
    /// finished tree has none, `None` if undecided.
    pub covered: Option<bool>,
}

impl KarpMillerResult {
    /// Unsafe when covered, Safe when the finished tree proves it is not,
    /// Unknown otherwise.
    pub fn verdict(&self) -> VerdictKind {
        match self.covered {
            Some(true) => VerdictKind::Unsafe,
            Some(false) => VerdictKind::Safe,
            None => VerdictKind::Unknown,
        }
    }

    /// True when some node covers `tokens` place by place (counters ignored).
    pub fn covers_tokens(&self, tokens: &[u32]) -> bool {
        self.tree
            .iter()
            .any(|n| n.tokens.iter().zip(tokens).all(|(c, &k)| c.covers(k)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KarpMillerError {
    #[error("predicate `{0}` is not upward-closed")]
    NotUpwardClosed(String),
    #[error("predicate `{0}` mentions counters or modes")]
    UnsupportedAtom(String),
    #[error("predicate refers to an unknown place: {0}")]
    UnknownReference(String),
}

pub(crate) fn karp_miller_eligible(pred: &Predicate) -> bool {
    pred.is_upward_closed() && !pred.has_counter_or_mode_atoms()
}

/// Builds a Karp–Miller coverability tree and decides whether any reachable
/// marking covers the upward-closed `pred`.
///
/// Places are accelerated to ω only when more tokens there can never disable
/// a transition: no capacity, no inhibitor arc and no guard atom that more
/// tokens could falsify. Other uncapacitated places and counters are cut off
/// above [`KM_TOKEN_CUT`] tokens, which leaves the tree incomplete. Equal
/// labels are expanded once.
pub fn karp_miller(net: &Net, pred: &Predicate, max_nodes: usize) -> Result<KarpMillerResult, KarpMillerError> {
    if !pred.is_upward_closed() {
        return Err(KarpMillerError::NotUpwardClosed(pred.to_string()));
    }
    if pred.has_counter_or_mode_atoms() {
        return Err(KarpMillerError::UnsupportedAtom(pred.to_string()));
    }
    let compiled = net
        .compile(pred)
        .map_err(|e| KarpMillerError::UnknownReference(e.to_string()))?;
    Ok(karp_miller_compiled(net, &compiled, max_nodes, KM_TOKEN_CUT))
}

/// Token cut-off for places and counters that cannot be accelerated.
pub const KM_TOKEN_CUT: u32 = 64;

fn accelerable(net: &Net) -> Vec<bool> {
    let np = net.place_count();
    let nc = net.counter_ids().count();
    let mut down_p = vec![false; np];
    let mut down_c = vec![false; nc];
    for t in &net.transitions {
        for &(p, _) in &t.inhibitors {
            down_p[p] = true;
        }
        if let Some(g) = &t.guard {
            g.collect_downward(false, &mut down_p, &mut down_c);
        }
    }
    for overrides in &net.mode_overrides {
        for g in overrides.values() {
            g.collect_downward(false, &mut down_p, &mut down_c);
        }
    }
    (0..np)
        .map(|p| net.capacities[p].is_none() && !down_p[p])
        .chain(down_c.iter().map(|&d| !d))
        .collect()
}

pub(crate) fn karp_miller_compiled(
    net: &Net,
    pred: &CompiledPredicate,
    max_nodes: usize,
    cut: u32,
) -> KarpMillerResult {
    let np = net.place_count();
    let safe = accelerable(net);
    let bounded: Vec<bool> = (0..safe.len())
        .map(|i| i < np && net.capacities[i].is_some())
        .collect();
    let beyond_cut = |v: &[u64]| {
        v.iter()
            .enumerate()
            .any(|(i, &x)| !safe[i] && !bounded[i] && x != OMEGA && x > u64::from(cut))
    };
    let init = net.initial_marking();
    let root: Vec<u64> = init
        .tokens
        .iter()
        .chain(&init.counters)
        .map(|&v| u64::from(v))
        .collect();

    let holds = |v: &[u64]| pred.expr.eval_with(&|p| v[p], &|s| v[np + s]);
    let enabled = |v: &[u64], t: usize| -> bool {
        let ct = &net.transitions[t];
        if ct.inputs.iter().chain(&ct.reads).any(|&(p, w)| v[p] < u64::from(w)) {
            return false;
        }
        if ct.inhibitors.iter().any(|&(p, thr)| v[p] >= u64::from(thr)) {
            return false;
        }
        let mode = net.mode_places.iter().position(|&p| v[p] > 0);
        if let Some(g) = net.effective_guard(mode, t) {
            if !g.eval_with(&|p| v[p], &|s| v[np + s]) {
                return false;
            }
        }
        ct.delta.iter().all(|&(p, d)| match net.capacities[p] {
            Some(cap) if d > 0 => v[p] != OMEGA && v[p] as i64 + d <= i64::from(cap),
            _ => true,
        })
    };
    let fire = |v: &[u64], t: usize| -> Vec<u64> {
        let ct = &net.transitions[t];
        let mut next = v.to_vec();
        for &(p, d) in &ct.delta {
            if next[p] != OMEGA {
                next[p] = (next[p] as i64 + d) as u64;
            }
        }
        if let Some(s) = ct.counter {
            if next[np + s] != OMEGA {
                next[np + s] += 1;
            }
        }
        next
    };

    let mut labels: Vec<Vec<u64>> = vec![root.clone()];
    let mut parents: Vec<Option<(usize, usize)>> = vec![None];
    let mut seen: HashSet<Vec<u64>> = HashSet::from([root]);
    let mut queue = VecDeque::from([0usize]);
    let mut complete = true;
    let mut covered = holds(&labels[0]);

    'outer: while let Some(n) = queue.pop_front() {
        if covered {
            break;
        }
        for t in 0..net.transition_count() {
            if !enabled(&labels[n], t) {
                continue;
            }
            let mut next = fire(&labels[n], t);
            let mut anc = Some(n);
            while let Some(a) = anc {
                let la = &labels[a];
                if la.iter().zip(&next).all(|(x, y)| x <= y) && *la != next {
                    let grows: Vec<usize> = (0..next.len()).filter(|&i| la[i] < next[i]).collect();
                    if grows.iter().all(|&i| safe[i]) {
                        for i in grows {
                            next[i] = OMEGA;
                        }
                    }
                }
                anc = parents[a].map(|(p, _)| p);
            }
            if seen.contains(&next) {
                continue;
            }
            if beyond_cut(&next) {
                complete = false;
                continue;
            }
            if labels.len() >= max_nodes {
                complete = false;
                break 'outer;
            }
            let hit = holds(&next);
            seen.insert(next.clone());
            labels.push(next);
            parents.push(Some((n, t)));
            queue.push_back(labels.len() - 1);
            if hit {
                covered = true;
                break 'outer;
            }
        }
    }

    let tree = labels
        .iter()
        .zip(&parents)
        .map(|(v, par)| KmNode {
            tokens: v[..np].iter().map(|&x| Count::from_raw(x)).collect(),
            counters: v[np..].iter().map(|&x| Count::from_raw(x)).collect(),
            parent: par.map(|(p, _)| p),
            via: par.map(|(_, t)| net.transition_id(t).to_string()),
        })
        .collect();
    KarpMillerResult {
        tree,
        complete: complete || covered,
        covered: if covered {
            Some(true)
        } else if complete {
            Some(false)
        } else {
            None
        },
    }
}
