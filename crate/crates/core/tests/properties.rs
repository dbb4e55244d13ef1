mod common;

use proptest::prelude::*;

use common::oracle;
use common::{named, random_model, GenOptions};
use respetri_core::analysis::{explore, explore_with_workers, Distance, ExplorationBound, PressureMap};
use respetri_core::audit::{approach_episodes, run_to_jsonl, simulate, SimPolicy};
use respetri_core::dsl::{parse_model, serialize_model};
use respetri_core::net::Net;

fn small_bound() -> ExplorationBound {
    ExplorationBound {
        max_tokens_per_place: 4,
        ..ExplorationBound::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let m = random_model(seed, &GenOptions::full_syntax());
        let text = serialize_model(&m);
        let back = parse_model(&text).unwrap();
        prop_assert!(back.structurally_eq(&m));
        prop_assert_eq!(serialize_model(&back).text, text.text);
    }

    #[test]
    fn declaration_order_does_not_change_the_text(seed in any::<u64>()) {
        let m = random_model(seed, &GenOptions::full_syntax());
        let mut shuffled = m.clone();
        shuffled.places.reverse();
        shuffled.transitions.reverse();
        for t in &mut shuffled.transitions {
            t.inputs.reverse();
            t.outputs.reverse();
        }
        prop_assert_eq!(serialize_model(&shuffled).text, serialize_model(&m).text);
    }

    #[test]
    fn enabling_and_firing_agree_with_the_reference(seed in any::<u64>()) {
        let m = random_model(seed, &GenOptions::full_syntax());
        let net = Net::new(m.clone()).unwrap();
        let g = explore(&net, &small_bound());
        for marking in g.nodes() {
            let reference = named(&net, marking);
            for t in &m.transitions {
                let enabled = net.is_enabled(marking, &t.id).unwrap();
                prop_assert_eq!(enabled, oracle::enabled(&m, t, &reference), "{} at {:?}", t.id, reference);
                if enabled {
                    let next = net.fire(marking, &t.id).unwrap();
                    prop_assert!(net.is_valid_marking(&next));
                    prop_assert_eq!(named(&net, &next), oracle::fire(t, &reference));
                } else {
                    prop_assert!(net.fire(marking, &t.id).is_err());
                }
            }
        }
    }

    #[test]
    fn pressure_drops_by_at_most_one_per_firing(seed in any::<u64>()) {
        let m = random_model(seed, &GenOptions::bounded());
        let net = Net::new(m.clone()).unwrap();
        let g = explore(&net, &small_bound());
        for f in &m.forbidden {
            let pm = PressureMap::compute(&g, &net.forbidden(&f.name).unwrap());
            for e in g.edges() {
                let (du, dv) = (pm.distance_at(e.from), pm.distance_at(e.to));
                if let Distance::Finite(b) = dv {
                    prop_assert!(du <= Distance::Finite(b + 1));
                }
            }
            for (i, marking) in g.nodes().iter().enumerate() {
                let zero = pm.distance_at(i) == Distance::Finite(0);
                prop_assert_eq!(zero, oracle::holds(&f.predicate, &named(&net, marking)));
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_the_graph(seed in any::<u64>(), workers in 2usize..9) {
        let m = random_model(seed, &GenOptions::uncapped());
        let net = Net::new(m).unwrap();
        prop_assert_eq!(explore_with_workers(&net, &small_bound(), workers), explore(&net, &small_bound()));
    }

    #[test]
    fn seeded_runs_are_reproducible_and_replay(seed in any::<u64>(), run_seed in any::<u64>()) {
        let m = random_model(seed, &GenOptions::full_syntax());
        let net = Net::new(m).unwrap();
        let a = simulate(&net, &SimPolicy::UniformRandom { seed: run_seed }, 30).unwrap();
        let b = simulate(&net, &SimPolicy::UniformRandom { seed: run_seed }, 30).unwrap();
        prop_assert_eq!(run_to_jsonl(&net, &a), run_to_jsonl(&net, &b));
        prop_assert_eq!(net.replay(net.initial_marking(), &a.trace.firings).unwrap(), a.trace.markings.clone());
        match a.deadlock {
            Some(step) => {
                prop_assert_eq!(step, a.steps());
                prop_assert!(net.enabled_set(a.trace.final_marking()).is_empty());
            }
            None => prop_assert_eq!(a.steps(), 30),
        }
    }

    #[test]
    fn approach_episodes_are_maximal_strict_descents(values in proptest::collection::vec(0u64..6, 0..40)) {
        let series: Vec<Distance> = values.iter().map(|&v| Distance::Finite(v)).collect();
        let episodes = approach_episodes(&series);
        for ep in &episodes {
            prop_assert!(ep.end >= ep.start + 2);
            for i in ep.start..ep.end {
                prop_assert!(series[i + 1] < series[i]);
            }
            prop_assert!(ep.start == 0 || series[ep.start] >= series[ep.start - 1]);
            prop_assert!(ep.end + 1 == series.len() || series[ep.end + 1] >= series[ep.end]);
        }
        for i in 0..series.len().saturating_sub(2) {
            if series[i + 1] < series[i] && series[i + 2] < series[i + 1] {
                prop_assert!(episodes.iter().any(|ep| ep.start <= i && i + 2 <= ep.end));
            }
        }
        for w in episodes.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
    }
}
