use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::analysis::{explore, Distance, ExplorationBound, PressureMap, ReachGraph, ViolationTrace};
use crate::audit::rules::{evaluate_audit_rules, Alarm};
use crate::net::{Net, NetError, Predicate};

/// How the next transition is chosen among the enabled ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimPolicy {
    UniformRandom { seed: u64 },
    /// First enabled transition of `order`; if none is enabled, a uniform pick
    /// among the enabled set.
    Priority { order: Vec<String>, seed: u64 },
    /// Fires exactly this sequence; the run ends when it is exhausted.
    Scripted(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trace: ViolationTrace,
    /// Counter values at every step, step 0 included.
    pub counter_series: Vec<Vec<u32>>,
    pub alarms: Vec<Alarm>,
    pub pressure_series: Option<Vec<Distance>>,
    /// Step at which no transition was enabled, if the run stopped early.
    pub deadlock: Option<usize>,
}

impl RunRecord {
    pub fn steps(&self) -> usize {
        self.trace.firings.len()
    }

    /// Number of times `transition` appears in the trace.
    pub fn firing_count(&self, transition: &str) -> usize {
        self.trace.firings.iter().filter(|t| *t == transition).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("step {step}: scripted transition `{transition}` is not enabled")]
    ScriptedFiringDisabled { step: usize, transition: String },
}

/// Runs the token game for up to `steps` firings. Identical inputs give
/// identical records.
pub fn simulate(net: &Net, policy: &SimPolicy, steps: usize) -> Result<RunRecord, SimError> {
    let mut rng = match policy {
        SimPolicy::UniformRandom { seed } | SimPolicy::Priority { seed, .. } => ChaCha8Rng::seed_from_u64(*seed),
        SimPolicy::Scripted(_) => ChaCha8Rng::seed_from_u64(0),
    };
    let mut m = net.initial_marking().clone();
    let mut firings = Vec::new();
    let mut markings = vec![m.clone()];
    let mut deadlock = None;

    for step in 0..steps {
        let enabled = net.enabled_set(&m);
        let choice = match policy {
            SimPolicy::Scripted(script) => {
                let Some(t) = script.get(step) else { break };
                if !enabled.contains(&t.as_str()) {
                    return Err(SimError::ScriptedFiringDisabled {
                        step: step + 1,
                        transition: t.clone(),
                    });
                }
                t.clone()
            }
            _ if enabled.is_empty() => {
                deadlock = Some(step);
                break;
            }
            SimPolicy::Priority { order, .. } => match order.iter().find(|t| enabled.contains(&t.as_str())) {
                Some(t) => t.clone(),
                None => enabled[rng.gen_range(0..enabled.len())].to_string(),
            },
            SimPolicy::UniformRandom { .. } => enabled[rng.gen_range(0..enabled.len())].to_string(),
        };
        m = net.fire(&m, &choice).expect("chosen from the enabled set");
        markings.push(m.clone());
        firings.push(choice);
    }
    if deadlock.is_none() && matches!(policy, SimPolicy::Scripted(_)) && net.enabled_set(&m).is_empty() {
        deadlock = Some(firings.len());
    }

    let mut run = RunRecord {
        counter_series: markings.iter().map(|m| m.counters.clone()).collect(),
        trace: ViolationTrace { firings, markings },
        alarms: Vec::new(),
        pressure_series: None,
        deadlock,
    };
    run.alarms = evaluate_audit_rules(net, &run);
    Ok(run)
}

/// A maximal stretch of strictly decreasing pressure, `start..=end` in steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproachEpisode {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftReport {
    pub series: Vec<Distance>,
    /// Stretches of at least three consecutive strictly decreasing values.
    pub episodes: Vec<ApproachEpisode>,
    pub graph_truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DriftError {
    #[error("step {step}: marking lies outside the explored graph")]
    PressureUnavailable { step: usize },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Pressure towards `pred` at every marking of the run, exploring the net
/// with the default bound.
pub fn drift_report(net: &Net, run: &RunRecord, pred: &Predicate) -> Result<DriftReport, DriftError> {
    let graph = explore(net, &ExplorationBound::default());
    drift_report_on(net, &graph, run, pred)
}

/// Same as [`drift_report`] with a caller-supplied graph.
pub fn drift_report_on(
    net: &Net,
    graph: &ReachGraph,
    run: &RunRecord,
    pred: &Predicate,
) -> Result<DriftReport, DriftError> {
    let pred = net.compile(pred)?;
    let map = PressureMap::compute(graph, &pred);
    let series = run
        .trace
        .markings
        .iter()
        .enumerate()
        .map(|(step, m)| map.distance_of(m).ok_or(DriftError::PressureUnavailable { step }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DriftReport {
        episodes: approach_episodes(&series),
        series,
        graph_truncated: graph.truncated(),
    })
}

pub fn approach_episodes(series: &[Distance]) -> Vec<ApproachEpisode> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=series.len() {
        if i == series.len() || series[i] >= series[i - 1] {
            if i - start >= 3 {
                out.push(ApproachEpisode { start, end: i - 1 });
            }
            start = i;
        }
    }
    out
}

/// One JSON object per line and step: step index, fired transition (null at
/// step 0), tokens, counters, the ids of alarms raised at that step and, when
/// present, the pressure.
pub fn run_to_jsonl(net: &Net, run: &RunRecord) -> String {
    let mut out = String::new();
    for (step, m) in run.trace.markings.iter().enumerate() {
        let tokens: BTreeMap<&str, u32> = (0..net.place_count())
            .map(|p| (net.place_id(p), m.tokens[p]))
            .collect();
        let counters: BTreeMap<&str, u32> = net.counter_ids().zip(m.counters.iter().copied()).collect();
        let alarms: Vec<&str> = run
            .alarms
            .iter()
            .filter(|a| a.step == step)
            .map(|a| a.rule.as_str())
            .collect();
        let mut line = json!({
            "step": step,
            "fired": if step == 0 { None } else { Some(&run.trace.firings[step - 1]) },
            "tokens": tokens,
            "counters": counters,
            "alarms": alarms,
        });
        if let Some(ps) = &run.pressure_series {
            line["pressure"] = json!(ps[step].finite());
        }
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
