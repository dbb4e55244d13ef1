#![allow(dead_code)]

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use respetri_core::audit::{AuditKind, AuditRule};
use respetri_core::dsl::{expand_macros, MacroModel};
use respetri_core::net::{validate_net, Cmp, ModeDef, NamedPredicate, NetModel, PlaceDef, Predicate, TransitionDef};

/// Shape of generated nets.
#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    pub max_places: usize,
    pub max_transitions: usize,
    pub max_initial: u32,
    /// Probability that a place gets a capacity.
    pub capacity_prob: f64,
    pub guards: bool,
    pub counters: bool,
    /// Labels, metadata, audit rules and modes, for syntax round trips.
    pub decorations: bool,
    pub predicates: usize,
}

impl GenOptions {
    /// Small nets whose every place is capacitated, so the reachable set is finite.
    pub fn bounded() -> Self {
        GenOptions {
            max_places: 5,
            max_transitions: 5,
            max_initial: 3,
            capacity_prob: 1.0,
            guards: true,
            counters: false,
            decorations: false,
            predicates: 3,
        }
    }

    pub fn uncapped() -> Self {
        GenOptions {
            capacity_prob: 0.5,
            ..Self::bounded()
        }
    }

    pub fn full_syntax() -> Self {
        GenOptions {
            capacity_prob: 0.5,
            counters: true,
            decorations: true,
            ..Self::bounded()
        }
    }
}

const CMPS: [Cmp; 5] = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt];
const LABEL_CHARS: &[char] = &['a', 'b', ' ', 'Z', '"', '\\', 'é', '-', '#', '0'];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn label(r: &mut ChaCha8Rng) -> String {
    let n = r.gen_range(0..8);
    (0..n).map(|_| *LABEL_CHARS.choose(r).unwrap()).collect()
}

fn weight(r: &mut ChaCha8Rng) -> u32 {
    if r.gen_bool(0.8) {
        1
    } else {
        2
    }
}

fn token_atom(r: &mut ChaCha8Rng, places: &[String]) -> Predicate {
    Predicate::tokens(
        places.choose(r).unwrap().clone(),
        *CMPS.choose(r).unwrap(),
        r.gen_range(0..=4),
    )
}

/// Random predicate over token atoms (and counter atoms when `counted` is
/// non-empty), nesting at most two levels.
pub fn random_predicate(r: &mut ChaCha8Rng, places: &[String], counted: &[String]) -> Predicate {
    fn atom(r: &mut ChaCha8Rng, places: &[String], counted: &[String]) -> Predicate {
        if !counted.is_empty() && r.gen_bool(0.2) {
            Predicate::counter(counted.choose(r).unwrap().clone(), *CMPS.choose(r).unwrap(), r.gen_range(0..=3))
        } else {
            token_atom(r, places)
        }
    }
    match r.gen_range(0..6) {
        0 | 1 => atom(r, places, counted),
        2 => Predicate::And(vec![atom(r, places, counted), atom(r, places, counted)]),
        3 => Predicate::Or(vec![atom(r, places, counted), atom(r, places, counted)]),
        4 => Predicate::not(atom(r, places, counted)),
        _ => Predicate::And(vec![
            Predicate::Or(vec![atom(r, places, counted), atom(r, places, counted)]),
            Predicate::not(atom(r, places, counted)),
        ]),
    }
}

/// Random upward-closed predicate: conjunctions and disjunctions of `>=`/`>` atoms.
pub fn random_upward_predicate(r: &mut ChaCha8Rng, places: &[String]) -> Predicate {
    let atom = |r: &mut ChaCha8Rng| {
        Predicate::tokens(
            places.choose(r).unwrap().clone(),
            if r.gen_bool(0.5) { Cmp::Ge } else { Cmp::Gt },
            r.gen_range(0..=4),
        )
    };
    match r.gen_range(0..3) {
        0 => atom(r),
        1 => Predicate::And(vec![atom(r), atom(r)]),
        _ => Predicate::Or(vec![atom(r), Predicate::And(vec![atom(r), atom(r)])]),
    }
}

/// A valid random model. Predicates are named `f0`, `f1`, ...
pub fn random_model(seed: u64, opts: &GenOptions) -> NetModel {
    let mut r = rng(seed);
    let np = r.gen_range(2.min(opts.max_places)..=opts.max_places);
    let nt = r.gen_range(1..=opts.max_transitions);
    let mut model = NetModel::default();
    for i in 0..np {
        let initial = if r.gen_bool(0.15) { 0 } else { r.gen_range(1.min(opts.max_initial)..=opts.max_initial) };
        let mut p = PlaceDef::new(format!("p{i}"), initial);
        if r.gen_bool(opts.capacity_prob) {
            p = p.with_capacity(r.gen_range(initial.max(1)..=initial + 4));
        }
        if opts.decorations && r.gen_bool(0.3) {
            p = p.with_label(label(&mut r));
        }
        model.places.push(p);
    }
    let place_ids: Vec<String> = model.places.iter().map(|p| p.id.clone()).collect();
    for i in 0..nt {
        let mut t = TransitionDef::new(format!("t{i}"));
        for p in &place_ids {
            if r.gen_bool(0.25) {
                t = t.input(p, weight(&mut r));
            }
            if r.gen_bool(0.3) {
                t = t.output(p, weight(&mut r));
            }
            if r.gen_bool(0.1) {
                t = t.read(p, weight(&mut r));
            }
        }
        if t.inputs.is_empty() && t.outputs.is_empty() {
            let p = place_ids.choose(&mut r).unwrap();
            t = if r.gen_bool(0.5) { t.input(p, 1) } else { t.output(p, 1) };
        }
        for p in &place_ids {
            if r.gen_bool(0.08) {
                let needed = t
                    .inputs
                    .iter()
                    .chain(&t.reads)
                    .filter(|a| &a.place == p)
                    .map(|a| a.weight)
                    .max()
                    .unwrap_or(0);
                t = t.inhibitor(p, needed + r.gen_range(1..=2));
            }
        }
        if opts.counters && r.gen_bool(0.3) {
            t = t.counted();
        }
        if opts.decorations && r.gen_bool(0.3) {
            t = t.with_label(label(&mut r));
        }
        model.transitions.push(t);
    }
    let counted: Vec<String> = model
        .transitions
        .iter()
        .filter(|t| t.counted)
        .map(|t| t.id.clone())
        .collect();
    if opts.guards {
        for i in 0..nt {
            if r.gen_bool(0.15) {
                model.transitions[i].guard = Some(random_predicate(&mut r, &place_ids, &counted));
            }
        }
    }
    for k in 0..opts.predicates {
        model.forbidden.push(NamedPredicate {
            name: format!("f{k}"),
            predicate: random_predicate(&mut r, &place_ids, &counted),
        });
    }
    if opts.decorations {
        decorate(&mut r, &mut model, &place_ids, &counted);
    }
    let errors = validate_net(&model);
    assert!(errors.is_empty(), "generator produced an invalid model: {errors:?}");
    model
}

fn decorate(r: &mut ChaCha8Rng, model: &mut NetModel, places: &[String], counted: &[String]) {
    if r.gen_bool(0.5) {
        model.metadata = BTreeMap::from([("title".to_string(), label(r)), ("author".to_string(), label(r))]);
    }
    let mut rules = Vec::new();
    if let Some(t) = counted.choose(r) {
        rules.push(AuditKind::CounterThreshold {
            transition: t.clone(),
            threshold: r.gen_range(0..5),
        });
    }
    if r.gen_bool(0.5) {
        rules.push(AuditKind::RateThreshold {
            transition: model.transitions.choose(r).unwrap().id.clone(),
            max: r.gen_range(1..3),
            window: r.gen_range(1..5),
        });
    }
    if r.gen_bool(0.5) {
        rules.push(AuditKind::OccupancyThreshold {
            place: places.choose(r).unwrap().clone(),
            cmp: *CMPS.choose(r).unwrap(),
            level: r.gen_range(0..4),
        });
    }
    if !model.forbidden.is_empty() && r.gen_bool(0.5) {
        rules.push(AuditKind::PressureThreshold {
            predicate: model.forbidden.choose(r).unwrap().name.clone(),
            max_distance: r.gen_range(0..3),
        });
    }
    model.audit_rules = rules
        .into_iter()
        .enumerate()
        .map(|(i, kind)| AuditRule { id: format!("a{i}"), kind })
        .collect();

    if r.gen_bool(0.4) {
        let transitions: Vec<String> = model.transitions.iter().map(|t| t.id.clone()).collect();
        let n = r.gen_range(1..=3);
        let modes: Vec<ModeDef> = (0..n)
            .map(|i| {
                let mut m = ModeDef::new(format!("m{i}"));
                if i > 0 {
                    m.disabled = transitions.iter().filter(|_| r.gen_bool(0.3)).cloned().collect::<BTreeSet<_>>();
                    if r.gen_bool(0.5) {
                        let t = transitions.choose(r).unwrap().clone();
                        m.guard_overrides.insert(t, token_atom(r, places));
                    }
                }
                m
            })
            .collect();
        model.modes = modes;
        let expanded = expand_macros(MacroModel::from(std::mem::take(model))).expect("modes expand");
        *model = expanded;
    }
}

/// The reference view of a marking of `net`.
pub fn named(net: &respetri_core::net::Net, m: &respetri_core::net::Marking) -> oracle::NamedMarking {
    oracle::NamedMarking {
        tokens: (0..net.place_count())
            .map(|i| (net.place_id(i).to_string(), m.tokens[i]))
            .collect(),
        counters: net
            .counter_ids()
            .zip(&m.counters)
            .map(|(id, &c)| (id.to_string(), c))
            .collect(),
    }
}
