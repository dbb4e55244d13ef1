use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::analysis::pressure_within;
use crate::audit::simulate::RunRecord;
use crate::net::{Cmp, Marking, Net};

/// An auditing observable with its alarm threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRule {
    pub id: String,
    pub kind: AuditKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditKind {
    /// Alarm while `#transition > threshold`.
    CounterThreshold { transition: String, threshold: u32 },
    /// Alarm while `transition` fired more than `max` times in the last `window` steps.
    RateThreshold { transition: String, max: u32, window: u32 },
    /// Alarm while `tokens(place) cmp level`.
    OccupancyThreshold { place: String, cmp: Cmp, level: u32 },
    /// Alarm while the marking is within `max_distance` firings of the named forbidden predicate.
    PressureThreshold { predicate: String, max_distance: u32 },
}

/// One alarm: the rule held at `step` with the observed value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alarm {
    pub step: usize,
    pub rule: String,
    pub observed: u64,
}

/// Level-triggered evaluation of every audit rule of the model over a run.
///
/// A rule produces an entry at every step (0 = initial marking) where its
/// condition holds, so the first entry per rule is its first crossing.
/// Pressure rules search forward from each visited marking, no deeper than
/// the rule's distance.
pub fn evaluate_audit_rules(net: &Net, run: &RunRecord) -> Vec<Alarm> {
    let rules = &net.model().audit_rules;
    let mut alarms = Vec::new();
    let markings = &run.trace.markings;
    for rule in rules {
        match &rule.kind {
            AuditKind::CounterThreshold {
                transition,
                threshold,
            } => {
                let slot = net.counter_slot(transition).expect("validated rule");
                for (step, m) in markings.iter().enumerate() {
                    let v = m.counters[slot];
                    if v > *threshold {
                        alarms.push(Alarm {
                            step,
                            rule: rule.id.clone(),
                            observed: u64::from(v),
                        });
                    }
                }
            }
            AuditKind::RateThreshold {
                transition,
                max,
                window,
            } => {
                let mut recent: VecDeque<usize> = VecDeque::new();
                for (i, fired) in run.trace.firings.iter().enumerate() {
                    let step = i + 1;
                    if fired == transition {
                        recent.push_back(step);
                    }
                    while recent
                        .front()
                        .is_some_and(|&s| s + (*window as usize) <= step)
                    {
                        recent.pop_front();
                    }
                    if recent.len() > *max as usize {
                        alarms.push(Alarm {
                            step,
                            rule: rule.id.clone(),
                            observed: recent.len() as u64,
                        });
                    }
                }
            }
            AuditKind::OccupancyThreshold { place, cmp, level } => {
                let p = net.place_index(place).expect("validated rule");
                for (step, m) in markings.iter().enumerate() {
                    let v = m.tokens[p];
                    if cmp.holds(u64::from(v), u64::from(*level)) {
                        alarms.push(Alarm {
                            step,
                            rule: rule.id.clone(),
                            observed: u64::from(v),
                        });
                    }
                }
            }
            AuditKind::PressureThreshold {
                predicate,
                max_distance,
            } => {
                let pred = net.forbidden(predicate).expect("validated rule");
                let mut cache: HashMap<&Marking, Option<u64>> = HashMap::new();
                for (step, m) in markings.iter().enumerate() {
                    let d = *cache
                        .entry(m)
                        .or_insert_with(|| pressure_within(net, m, &pred, *max_distance));
                    if let Some(d) = d {
                        alarms.push(Alarm {
                            step,
                            rule: rule.id.clone(),
                            observed: d,
                        });
                    }
                }
            }
        }
    }
    // stable: rules keep declaration order within a step
    alarms.sort_by_key(|a| a.step);
    alarms
}
