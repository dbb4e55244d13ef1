use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::net::marking::Marking;
use crate::net::model::{mode_place_id, NetModel};
use crate::net::predicate::{Cmp, Compiled, Predicate};
use crate::net::validate::{validate_net, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("model is not well-formed: {}", join_errors(.0))]
    Invalid(Vec<StructureError>),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("unknown reference `{0}`")]
    UnknownReference(String),
    #[error("marking shape does not match the net")]
    InvalidMarking,
}

fn join_errors(errs: &[StructureError]) -> String {
    errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledTransition {
    pub inputs: Vec<(usize, u32)>,
    pub outputs: Vec<(usize, u32)>,
    pub inhibitors: Vec<(usize, u32)>,
    pub reads: Vec<(usize, u32)>,
    pub guard: Option<Compiled>,
    pub counter: Option<usize>,
    /// Net token change per place, merged over inputs and outputs.
    pub delta: Vec<(usize, i64)>,
}

/// A predicate resolved against one specific net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledPredicate {
    pub(crate) expr: Compiled,
    source: Predicate,
}

impl CompiledPredicate {
    pub fn eval(&self, m: &Marking) -> bool {
        self.expr.eval_with(
            &|p| u64::from(m.tokens[p]),
            &|s| u64::from(m.counters[s]),
        )
    }

    pub fn source(&self) -> &Predicate {
        &self.source
    }
}

/// A validated net compiled to positional form; the executable token game.
///
/// All operations are pure: a `Net` and its markings are immutable values and
/// can be shared freely between analysis workers.
#[derive(Debug, Clone)]
pub struct Net {
    model: NetModel,
    place_ix: HashMap<String, usize>,
    trans_ix: HashMap<String, usize>,
    pub(crate) transitions: Vec<CompiledTransition>,
    pub(crate) capacities: Vec<Option<u32>>,
    counted: Vec<usize>,
    pub(crate) mode_places: Vec<usize>,
    pub(crate) mode_overrides: Vec<HashMap<usize, Compiled>>,
    initial: Marking,
}

impl Net {
    pub fn new(model: NetModel) -> Result<Self, NetError> {
        let errors = validate_net(&model);
        if !errors.is_empty() {
            return Err(NetError::Invalid(errors));
        }
        let place_ix: HashMap<String, usize> = model
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();
        let trans_ix: HashMap<String, usize> = model
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.clone(), i))
            .collect();
        let counted: Vec<usize> = model
            .transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.counted)
            .map(|(i, _)| i)
            .collect();

        let mut net = Net {
            place_ix,
            trans_ix,
            transitions: Vec::new(),
            capacities: model.places.iter().map(|p| p.capacity).collect(),
            counted,
            mode_places: Vec::new(),
            mode_overrides: Vec::new(),
            initial: Marking::default(),
            model: NetModel::default(),
        };
        net.mode_places = model
            .modes
            .iter()
            .map(|m| net.place_ix[&m.place_id()])
            .collect();

        let resolve = |arcs: &[crate::net::model::ArcRef], ix: &HashMap<String, usize>| {
            arcs.iter().map(|a| (ix[&a.place], a.weight)).collect::<Vec<_>>()
        };
        let mut compiled = Vec::with_capacity(model.transitions.len());
        for (i, t) in model.transitions.iter().enumerate() {
            let inputs = resolve(&t.inputs, &net.place_ix);
            let outputs = resolve(&t.outputs, &net.place_ix);
            let mut delta: HashMap<usize, i64> = HashMap::new();
            for &(p, w) in &inputs {
                *delta.entry(p).or_default() -= i64::from(w);
            }
            for &(p, w) in &outputs {
                *delta.entry(p).or_default() += i64::from(w);
            }
            let mut delta: Vec<(usize, i64)> = delta.into_iter().filter(|&(_, d)| d != 0).collect();
            delta.sort_unstable();
            compiled.push(CompiledTransition {
                inputs,
                outputs,
                inhibitors: resolve(&t.inhibitors, &net.place_ix),
                reads: resolve(&t.reads, &net.place_ix),
                guard: t.guard.as_ref().map(|g| net.compile_expr(g)).transpose()?,
                counter: net.counted.iter().position(|&c| c == i),
                delta,
            });
        }
        net.transitions = compiled;

        let mut overrides = Vec::with_capacity(model.modes.len());
        for mode in &model.modes {
            let mut map = HashMap::new();
            for (t, g) in &mode.guard_overrides {
                map.insert(net.trans_ix[t], net.compile_expr(g)?);
            }
            overrides.push(map);
        }
        net.mode_overrides = overrides;
        net.initial = Marking::new(
            model.places.iter().map(|p| p.initial).collect(),
            vec![0; net.counted.len()],
        );
        net.model = model;
        Ok(net)
    }

    pub fn model(&self) -> &NetModel {
        &self.model
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn place_count(&self) -> usize {
        self.model.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.model.transitions.len()
    }

    pub fn place_id(&self, ix: usize) -> &str {
        &self.model.places[ix].id
    }

    pub fn transition_id(&self, ix: usize) -> &str {
        &self.model.transitions[ix].id
    }

    pub fn place_index(&self, id: &str) -> Option<usize> {
        self.place_ix.get(id).copied()
    }

    pub fn transition_index(&self, id: &str) -> Option<usize> {
        self.trans_ix.get(id).copied()
    }

    /// Transition ids of the counted transitions, in counter-slot order.
    pub fn counter_ids(&self) -> impl Iterator<Item = &str> {
        self.counted.iter().map(|&t| self.transition_id(t))
    }

    pub fn counter_slot(&self, transition: &str) -> Option<usize> {
        let t = self.transition_index(transition)?;
        self.counted.iter().position(|&c| c == t)
    }

    pub fn tokens(&self, m: &Marking, place: &str) -> Option<u32> {
        self.place_index(place).map(|i| m.tokens[i])
    }

    pub fn counter(&self, m: &Marking, transition: &str) -> Option<u32> {
        self.counter_slot(transition).map(|s| m.counters[s])
    }

    /// Marking built from named token counts; unnamed places hold zero.
    pub fn marking_from(&self, tokens: &[(&str, u32)]) -> Result<Marking, NetError> {
        let mut m = Marking::new(vec![0; self.place_count()], vec![0; self.counted.len()]);
        for &(p, n) in tokens {
            let i = self
                .place_index(p)
                .ok_or_else(|| NetError::UnknownReference(p.to_string()))?;
            m.tokens[i] = n;
        }
        Ok(m)
    }

    pub fn is_valid_marking(&self, m: &Marking) -> bool {
        m.tokens.len() == self.place_count()
            && m.counters.len() == self.counted.len()
            && m
                .tokens
                .iter()
                .zip(&self.capacities)
                .all(|(&n, cap)| cap.is_none_or(|c| n <= c))
    }

    /// The mode whose place currently holds the token, if the net has modes.
    pub fn active_mode_index(&self, m: &Marking) -> Option<usize> {
        self.mode_places.iter().position(|&p| m.tokens[p] > 0)
    }

    pub fn active_mode(&self, m: &Marking) -> Option<&str> {
        self.active_mode_index(m).map(|i| self.model.modes[i].id.as_str())
    }

    pub(crate) fn effective_guard(&self, m_mode: Option<usize>, t: usize) -> Option<&Compiled> {
        if let Some(mode) = m_mode {
            if let Some(g) = self.mode_overrides[mode].get(&t) {
                return Some(g);
            }
        }
        self.transitions[t].guard.as_ref()
    }

    pub fn is_enabled(&self, m: &Marking, transition: &str) -> Result<bool, NetError> {
        let t = self
            .transition_index(transition)
            .ok_or_else(|| NetError::UnknownTransition(transition.to_string()))?;
        if !self.is_valid_marking(m) {
            return Err(NetError::InvalidMarking);
        }
        Ok(self.enabled_ix(m, t))
    }

    pub(crate) fn enabled_ix(&self, m: &Marking, t: usize) -> bool {
        let ct = &self.transitions[t];
        if ct.inputs.iter().chain(&ct.reads).any(|&(p, w)| m.tokens[p] < w) {
            return false;
        }
        if ct.inhibitors.iter().any(|&(p, thr)| m.tokens[p] >= thr) {
            return false;
        }
        if let Some(g) = self.effective_guard(self.active_mode_index(m), t) {
            let ok = g.eval_with(&|p| u64::from(m.tokens[p]), &|s| u64::from(m.counters[s]));
            if !ok {
                return false;
            }
        }
        ct.delta.iter().all(|&(p, d)| match self.capacities[p] {
            Some(cap) if d > 0 => i64::from(m.tokens[p]) + d <= i64::from(cap),
            _ => true,
        })
    }

    pub(crate) fn enabled_indices(&self, m: &Marking) -> Vec<usize> {
        (0..self.transition_count()).filter(|&t| self.enabled_ix(m, t)).collect()
    }

    /// Enabled transitions in declaration order.
    pub fn enabled_set(&self, m: &Marking) -> Vec<&str> {
        self.enabled_indices(m)
            .into_iter()
            .map(|t| self.transition_id(t))
            .collect()
    }

    /// Successor marking; caller guarantees `enabled_ix(m, t)`.
    pub(crate) fn fire_ix(&self, m: &Marking, t: usize) -> Marking {
        let ct = &self.transitions[t];
        let mut next = m.clone();
        for &(p, d) in &ct.delta {
            next.tokens[p] = (i64::from(next.tokens[p]) + d) as u32;
        }
        if let Some(slot) = ct.counter {
            next.counters[slot] += 1;
        }
        next
    }

    pub fn fire(&self, m: &Marking, transition: &str) -> Result<Marking, NetError> {
        if !self.is_enabled(m, transition)? {
            return Err(NetError::NotEnabled(transition.to_string()));
        }
        Ok(self.fire_ix(m, self.trans_ix[transition]))
    }

    /// Fires a sequence from `start`, returning every visited marking (start included).
    pub fn replay<S: AsRef<str>>(&self, start: &Marking, firings: &[S]) -> Result<Vec<Marking>, NetError> {
        let mut out = vec![start.clone()];
        for t in firings {
            let next = self.fire(out.last().unwrap(), t.as_ref())?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn compile(&self, pred: &Predicate) -> Result<CompiledPredicate, NetError> {
        Ok(CompiledPredicate {
            expr: self.compile_expr(pred)?,
            source: pred.clone(),
        })
    }

    /// Compiled form of the named forbidden predicate.
    pub fn forbidden(&self, name: &str) -> Option<CompiledPredicate> {
        self.model
            .forbidden_predicate(name)
            .map(|p| self.compile(p).expect("validated model"))
    }

    pub fn eval(&self, pred: &Predicate, m: &Marking) -> Result<bool, NetError> {
        if !self.is_valid_marking(m) {
            return Err(NetError::InvalidMarking);
        }
        Ok(self.compile(pred)?.eval(m))
    }

    fn compile_expr(&self, pred: &Predicate) -> Result<Compiled, NetError> {
        Ok(match pred {
            Predicate::Const(b) => Compiled::Const(*b),
            Predicate::Tokens { place, cmp, value } => Compiled::Tokens(
                self.place_index(place)
                    .ok_or_else(|| NetError::UnknownReference(place.clone()))?,
                *cmp,
                *value,
            ),
            Predicate::Counter {
                transition,
                cmp,
                value,
            } => Compiled::Counter(
                self.counter_slot(transition)
                    .ok_or_else(|| NetError::UnknownReference(format!("#{transition}")))?,
                *cmp,
                *value,
            ),
            Predicate::Mode(mode) => Compiled::Tokens(
                self.place_index(&mode_place_id(mode))
                    .filter(|_| self.model.modes.iter().any(|m| &m.id == mode))
                    .ok_or_else(|| NetError::UnknownReference(format!("mode {mode}")))?,
                Cmp::Ge,
                1,
            ),
            Predicate::And(ps) => Compiled::And(ps.iter().map(|p| self.compile_expr(p)).collect::<Result<_, _>>()?),
            Predicate::Or(ps) => Compiled::Or(ps.iter().map(|p| self.compile_expr(p)).collect::<Result<_, _>>()?),
            Predicate::Not(p) => Compiled::Not(Box::new(self.compile_expr(p)?)),
        })
    }

    /// Human-readable rendering of a marking, e.g. `{p1:2, p2:0 | #t2:1}`.
    pub fn display_marking<'a>(&'a self, m: &'a Marking) -> MarkingDisplay<'a> {
        MarkingDisplay { net: self, marking: m }
    }

    /// Places adjacent to a transition (any arc role).
    pub fn adjacent_places(&self, t: usize) -> Vec<usize> {
        let ct = &self.transitions[t];
        let mut v: Vec<usize> = ct
            .inputs
            .iter()
            .chain(&ct.outputs)
            .chain(&ct.inhibitors)
            .chain(&ct.reads)
            .map(|&(p, _)| p)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub struct MarkingDisplay<'a> {
    net: &'a Net,
    marking: &'a Marking,
}

impl fmt::Display for MarkingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, n) in self.marking.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", self.net.place_id(i), n)?;
        }
        if !self.marking.counters.is_empty() {
            f.write_str(" |")?;
            for (id, n) in self.net.counter_ids().zip(&self.marking.counters) {
                write!(f, " #{id}:{n}")?;
            }
        }
        f.write_str("}")
    }
}
