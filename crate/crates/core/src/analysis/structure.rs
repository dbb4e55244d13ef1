use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::net::NetModel;

/// Elementary cycle of the place/transition graph, starting at its
/// lexicographically smallest node.
pub type Cycle = Vec<String>;

pub const DEFAULT_CYCLE_LENGTH: usize = 16;

fn flow_graph(model: &NetModel) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut succ: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for p in &model.places {
        succ.entry(p.id.as_str()).or_default();
    }
    for t in &model.transitions {
        succ.entry(t.id.as_str()).or_default();
        for a in t.inputs.iter().chain(&t.reads) {
            succ.entry(a.place.as_str()).or_default().insert(t.id.as_str());
        }
        for a in t.outputs.iter().chain(&t.reads) {
            succ.entry(t.id.as_str()).or_default().insert(a.place.as_str());
        }
    }
    succ
}

/// All elementary cycles with at most `max_len` nodes. A read arc links its
/// place and transition in both directions. Output is sorted.
pub fn find_cycles(model: &NetModel, max_len: usize) -> Vec<Cycle> {
    let succ = flow_graph(model);
    let mut out = Vec::new();
    for &start in succ.keys() {
        let mut path = vec![start];
        let mut on_path = BTreeSet::from([start]);
        dfs(&succ, start, start, max_len, &mut path, &mut on_path, &mut out);
    }
    out.sort();
    out
}

fn dfs<'a>(
    succ: &BTreeMap<&'a str, BTreeSet<&'a str>>,
    start: &'a str,
    node: &'a str,
    max_len: usize,
    path: &mut Vec<&'a str>,
    on_path: &mut BTreeSet<&'a str>,
    out: &mut Vec<Cycle>,
) {
    for &next in &succ[node] {
        if next == start {
            out.push(path.iter().map(|s| s.to_string()).collect());
        } else if next > start && !on_path.contains(next) && path.len() < max_len {
            path.push(next);
            on_path.insert(next);
            dfs(succ, start, next, max_len, path, on_path, out);
            on_path.remove(next);
            path.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SiphonsAndTraps {
    pub siphons: Vec<BTreeSet<String>>,
    pub traps: Vec<BTreeSet<String>>,
}

/// Minimal siphons and traps with at most `max_size` places, found by
/// enumerating subsets in increasing size and skipping supersets of earlier
/// hits. Guards and inhibitors are ignored; a read arc counts as consuming
/// and producing its place.
pub fn siphons_and_traps(model: &NetModel, max_size: usize) -> SiphonsAndTraps {
    let places: Vec<&str> = {
        let mut v: Vec<&str> = model.places.iter().map(|p| p.id.as_str()).collect();
        v.sort_unstable();
        v
    };
    let ix: BTreeMap<&str, usize> = places.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    // pre[p]: transitions producing into p; post[p]: transitions consuming from p
    let mut pre = vec![BTreeSet::new(); places.len()];
    let mut post = vec![BTreeSet::new(); places.len()];
    for (ti, t) in model.transitions.iter().enumerate() {
        for a in t.outputs.iter().chain(&t.reads) {
            pre[ix[a.place.as_str()]].insert(ti);
        }
        for a in t.inputs.iter().chain(&t.reads) {
            post[ix[a.place.as_str()]].insert(ti);
        }
    }
    let union = |sets: &[BTreeSet<usize>], s: &[usize]| -> BTreeSet<usize> {
        s.iter().flat_map(|&p| sets[p].iter().copied()).collect()
    };

    let mut siphons: Vec<Vec<usize>> = Vec::new();
    let mut traps: Vec<Vec<usize>> = Vec::new();
    let contains_any = |found: &[Vec<usize>], s: &[usize]| found.iter().any(|f| f.iter().all(|x| s.contains(x)));
    for size in 1..=max_size.min(places.len()) {
        for s in combinations(places.len(), size) {
            let (pre_s, post_s) = (union(&pre, &s), union(&post, &s));
            if !contains_any(&siphons, &s) && pre_s.is_subset(&post_s) {
                siphons.push(s.clone());
            }
            if !contains_any(&traps, &s) && post_s.is_subset(&pre_s) {
                traps.push(s);
            }
        }
    }
    let named = |sets: Vec<Vec<usize>>| -> Vec<BTreeSet<String>> {
        sets.into_iter()
            .map(|s| s.into_iter().map(|i| places[i].to_string()).collect())
            .collect()
    };
    SiphonsAndTraps {
        siphons: named(siphons),
        traps: named(traps),
    }
}

fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{PlaceDef, TransitionDef};

    fn chain() -> NetModel {
        NetModel {
            places: vec![PlaceDef::new("p0", 1), PlaceDef::new("p1", 0), PlaceDef::new("p2", 0)],
            transitions: vec![
                TransitionDef::new("t1").input("p0", 1).output("p1", 1),
                TransitionDef::new("t2").input("p1", 1).output("p2", 1),
            ],
            ..NetModel::default()
        }
    }

    #[test]
    fn acyclic_chain_has_no_cycles() {
        assert!(find_cycles(&chain(), DEFAULT_CYCLE_LENGTH).is_empty());
    }

    #[test]
    fn cycles_are_rotated_and_unique() {
        let mut m = chain();
        m.transitions.push(TransitionDef::new("back").input("p2", 1).output("p0", 1));
        let cycles = find_cycles(&m, DEFAULT_CYCLE_LENGTH);
        assert_eq!(cycles, vec![vec!["back", "p0", "t1", "p1", "t2", "p2"]]);
        assert!(find_cycles(&m, 5).is_empty());
    }

    #[test]
    fn source_is_siphon_and_sink_is_trap() {
        let st = siphons_and_traps(&chain(), 3);
        assert!(st.siphons.contains(&BTreeSet::from(["p0".to_string()])));
        assert!(st.traps.contains(&BTreeSet::from(["p2".to_string()])));
    }

    #[test]
    fn combinations_enumerate_in_order() {
        let all: Vec<Vec<usize>> = combinations(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(combinations(2, 3).count(), 0);
    }
}
