//! Structural macros: rate-limit subnets and mode places.
//!
//! Expansion only adds places, transitions and arcs that are not already
//! present, so running it on its own output changes nothing. User
//! identifiers are never renamed; generated identifiers use the `rl_` and
//! `mode_` prefixes.

use thiserror::Error;

use crate::net::{ArcKind, ArcRef, NetModel, PlaceDef, TransitionDef};

/// `ratelimit <transition> max <max> per <per>`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateLimit {
    pub transition: String,
    pub max: u32,
    pub per: u32,
    pub line: usize,
    pub column: usize,
}

impl RateLimit {
    pub fn new(transition: impl Into<String>, max: u32, per: u32) -> Self {
        RateLimit {
            transition: transition.into(),
            max,
            per,
            line: 0,
            column: 0,
        }
    }
}

/// A parsed model before macro expansion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MacroModel {
    pub model: NetModel,
    pub rate_limits: Vec<RateLimit>,
    /// Mode that receives the token when mode places are first created.
    pub initial_mode: Option<String>,
}

impl From<NetModel> for MacroModel {
    fn from(model: NetModel) -> Self {
        MacroModel {
            model,
            ..MacroModel::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MacroError {
    #[error("{macro_name}: {message}")]
    MacroArity { macro_name: String, message: String },
    #[error("{macro_name} refers to unknown transition `{transition}`")]
    UnknownTransitionInMacro { macro_name: String, transition: String },
}

/// Identifiers generated for the rate-limit subnet of `transition`.
pub fn rate_limit_budget_place(transition: &str) -> String {
    format!("rl_{transition}_budget")
}

pub fn rate_limit_tick_transition(transition: &str) -> String {
    format!("rl_{transition}_tick")
}

/// Name of the transition completing one tick (returns control to the run phase).
pub fn rate_limit_tick_done_transition(transition: &str) -> String {
    format!("rl_{transition}_nx1")
}

pub fn expand_macros(mm: MacroModel) -> Result<NetModel, MacroError> {
    let MacroModel {
        mut model,
        rate_limits,
        initial_mode,
    } = mm;
    for rl in &rate_limits {
        expand_rate_limit(&mut model, rl)?;
    }
    expand_modes(&mut model, initial_mode.as_deref())?;
    Ok(model)
}

/// Sliding-window budget: `transition` spends a budget token, which travels
/// through a delay line of `per` stages and returns to the budget after `per`
/// complete ticks. A tick is the sequence `tick, mv_per/nx_per, …, mv_1/nx_1`
/// that advances every stage by exactly one position (last stage first), and
/// the limited transition can only fire between ticks. Hence at most `max`
/// firings fall in any window of `per` consecutive ticks.
fn expand_rate_limit(model: &mut NetModel, rl: &RateLimit) -> Result<(), MacroError> {
    let name = format!("ratelimit {}", rl.transition);
    if rl.max == 0 || rl.per == 0 {
        return Err(MacroError::MacroArity {
            macro_name: name,
            message: "`max` and `per` must both be at least 1".into(),
        });
    }
    if model.transition(&rl.transition).is_none() {
        return Err(MacroError::UnknownTransitionInMacro {
            macro_name: name,
            transition: rl.transition.clone(),
        });
    }
    let t = &rl.transition;
    let budget = rate_limit_budget_place(t);
    if model.place(&budget).is_some() {
        return Ok(());
    }
    let run = format!("rl_{t}_run");
    let phase = |i: u32| {
        if i == 0 {
            run.clone()
        } else {
            format!("rl_{t}_a{i}")
        }
    };
    let stage = |i: u32| {
        if i > rl.per {
            budget.clone()
        } else {
            format!("rl_{t}_d{i}")
        }
    };

    model.places.push(
        PlaceDef::new(budget.clone(), rl.max)
            .with_capacity(rl.max)
            .with_label(format!("rate budget of {t}")),
    );
    model
        .places
        .push(PlaceDef::new(run.clone(), 1).with_capacity(1).with_label("between ticks"));
    for i in 1..=rl.per {
        model.places.push(PlaceDef::new(phase(i), 0).with_capacity(1));
    }
    for i in 1..=rl.per {
        model.places.push(PlaceDef::new(stage(i), 0).with_capacity(rl.max));
    }

    let limited = model.transition_mut(t).expect("checked above");
    limited.inputs.push(ArcRef::new(budget.clone(), 1));
    limited.outputs.push(ArcRef::new(stage(1), 1));
    limited.reads.push(ArcRef::new(run.clone(), 1));

    model.transitions.push(
        TransitionDef::new(rate_limit_tick_transition(t))
            .input(&run, 1)
            .output(&phase(rl.per), 1)
            .with_label(format!("clock tick for {t}")),
    );
    for i in (1..=rl.per).rev() {
        model.transitions.push(
            TransitionDef::new(format!("rl_{t}_mv{i}"))
                .read(&phase(i), 1)
                .input(&stage(i), 1)
                .output(&stage(i + 1), 1),
        );
        model.transitions.push(
            TransitionDef::new(format!("rl_{t}_nx{i}"))
                .input(&phase(i), 1)
                .inhibitor(&stage(i), 1)
                .output(&phase(i - 1), 1),
        );
    }
    Ok(())
}

/// One capacity-1 place per mode holding the mode token. A transition
/// disabled in some modes requires the token of its single allowed mode (read
/// arc) or, with several allowed modes, is inhibited by each disallowed one.
fn expand_modes(model: &mut NetModel, initial: Option<&str>) -> Result<(), MacroError> {
    if model.modes.is_empty() {
        return Ok(());
    }
    for mode in &model.modes {
        for t in mode.disabled.iter().chain(mode.guard_overrides.keys()) {
            if model.transition(t).is_none() {
                return Err(MacroError::UnknownTransitionInMacro {
                    macro_name: format!("mode {}", mode.id),
                    transition: t.clone(),
                });
            }
        }
    }
    if let Some(init) = initial {
        if !model.modes.iter().any(|m| m.id == init) {
            return Err(MacroError::MacroArity {
                macro_name: format!("mode {init}"),
                message: "initial mode is not declared".into(),
            });
        }
    }

    let fresh = model.modes.iter().all(|m| model.place(&m.place_id()).is_none());
    let initial = initial.unwrap_or(&model.modes[0].id).to_string();
    let modes = model.modes.clone();
    for mode in &modes {
        let pid = mode.place_id();
        if model.place(&pid).is_none() {
            let tokens = u32::from(fresh && mode.id == initial);
            model.places.push(
                PlaceDef::new(pid, tokens)
                    .with_capacity(1)
                    .with_label(format!("mode {}", mode.id)),
            );
        }
    }

    for t in model.transitions.iter_mut() {
        let allowed: Vec<&str> = modes
            .iter()
            .filter(|m| !m.disabled.contains(&t.id))
            .map(|m| m.id.as_str())
            .collect();
        if allowed.len() == modes.len() {
            continue;
        }
        if allowed.len() == 1 {
            add_arc_once(t, ArcKind::Read, modes.iter().find(|m| m.id == allowed[0]).unwrap().place_id());
        } else {
            let blocking: Vec<String> = modes
                .iter()
                .filter(|m| m.disabled.contains(&t.id))
                .map(|m| m.place_id())
                .collect();
            for place in blocking {
                add_arc_once(t, ArcKind::Inhibitor, place);
            }
        }
    }
    Ok(())
}

fn add_arc_once(t: &mut TransitionDef, kind: ArcKind, place: String) {
    if !t.arcs(kind).iter().any(|a| a.place == place) {
        t.arcs_mut(kind).push(ArcRef::new(place, 1));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{validate_net, ModeDef};

    fn base() -> NetModel {
        NetModel {
            places: vec![PlaceDef::new("p", 3), PlaceDef::new("q", 0)],
            transitions: vec![
                TransitionDef::new("t").input("p", 1).output("q", 1),
                TransitionDef::new("t4").input("q", 1).output("p", 1),
            ],
            ..NetModel::default()
        }
    }

    #[test]
    fn no_macros_is_identity() {
        assert_eq!(expand_macros(base().into()).unwrap(), base());
    }

    #[test]
    fn rate_limit_expansion_is_idempotent_and_valid() {
        let mm = MacroModel {
            model: base(),
            rate_limits: vec![RateLimit::new("t", 2, 3)],
            initial_mode: None,
        };
        let once = expand_macros(mm.clone()).unwrap();
        assert!(validate_net(&once).is_empty());
        let twice = expand_macros(MacroModel {
            model: once.clone(),
            ..mm
        })
        .unwrap();
        assert_eq!(once, twice);
        // user identifiers untouched
        assert!(once.transition("t").is_some() && once.place("p").is_some());
    }

    #[test]
    fn rate_limit_arity_errors() {
        let mm = MacroModel {
            model: base(),
            rate_limits: vec![RateLimit::new("t", 0, 3)],
            initial_mode: None,
        };
        assert!(matches!(expand_macros(mm), Err(MacroError::MacroArity { .. })));
        let mm = MacroModel {
            model: base(),
            rate_limits: vec![RateLimit::new("zz", 1, 3)],
            initial_mode: None,
        };
        assert!(matches!(
            expand_macros(mm),
            Err(MacroError::UnknownTransitionInMacro { .. })
        ));
    }

    #[test]
    fn restricted_mode_requires_normal_token_for_t4() {
        let mut model = base();
        let mut restricted = ModeDef::new("restricted");
        restricted.disabled.insert("t4".into());
        model.modes = vec![ModeDef::new("normal"), restricted];
        let expanded = expand_macros(model.into()).unwrap();
        assert!(validate_net(&expanded).is_empty());
        let t4 = expanded.transition("t4").unwrap();
        assert_eq!(t4.reads, vec![ArcRef::new("mode_normal", 1)]);
        assert_eq!(expanded.place("mode_normal").unwrap().initial, 1);
        assert_eq!(expanded.place("mode_restricted").unwrap().initial, 0);
        let again = expand_macros(expanded.clone().into()).unwrap();
        assert_eq!(again, expanded);
    }
}
