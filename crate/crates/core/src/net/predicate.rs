use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Comparison operator used by predicate atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    /// True for operators whose satisfying set is closed under adding tokens.
    pub fn is_upward(self) -> bool {
        matches!(self, Cmp::Ge | Cmp::Gt)
    }

    pub fn is_downward(self) -> bool {
        matches!(self, Cmp::Lt | Cmp::Le)
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Boolean expression over markings: token atoms, counter atoms and mode atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Predicate {
    Const(bool),
    Tokens { place: String, cmp: Cmp, value: u32 },
    Counter { transition: String, cmp: Cmp, value: u32 },
    Mode(String),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn tokens(place: impl Into<String>, cmp: Cmp, value: u32) -> Self {
        Predicate::Tokens {
            place: place.into(),
            cmp,
            value,
        }
    }

    pub fn counter(transition: impl Into<String>, cmp: Cmp, value: u32) -> Self {
        Predicate::Counter {
            transition: transition.into(),
            cmp,
            value,
        }
    }

    /// Conjunction; a single operand is returned unwrapped.
    pub fn and(mut parts: Vec<Predicate>) -> Self {
        match parts.len() {
            0 => Predicate::Const(true),
            1 => parts.pop().unwrap(),
            _ => Predicate::And(parts),
        }
    }

    /// Disjunction; a single operand is returned unwrapped.
    pub fn or(mut parts: Vec<Predicate>) -> Self {
        match parts.len() {
            0 => Predicate::Const(false),
            1 => parts.pop().unwrap(),
            _ => Predicate::Or(parts),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Predicate) -> Self {
        Predicate::Not(Box::new(inner))
    }

    /// Syntactic upward-closure: NOT-free and every token/counter atom uses `>=` or `>`.
    ///
    /// Mode atoms test presence of the mode token and are upward-closed as well.
    pub fn is_upward_closed(&self) -> bool {
        match self {
            Predicate::Const(_) | Predicate::Mode(_) => true,
            Predicate::Tokens { cmp, .. } | Predicate::Counter { cmp, .. } => cmp.is_upward(),
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().all(Predicate::is_upward_closed),
            Predicate::Not(_) => false,
        }
    }

    pub fn has_counter_or_mode_atoms(&self) -> bool {
        match self {
            Predicate::Const(_) | Predicate::Tokens { .. } => false,
            Predicate::Counter { .. } | Predicate::Mode(_) => true,
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().any(Predicate::has_counter_or_mode_atoms),
            Predicate::Not(p) => p.has_counter_or_mode_atoms(),
        }
    }

    pub fn places(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |p| {
            if let Predicate::Tokens { place, .. } = p {
                out.insert(place.as_str());
            }
        });
        out
    }

    pub fn counters(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |p| {
            if let Predicate::Counter { transition, .. } = p {
                out.insert(transition.as_str());
            }
        });
        out
    }

    pub fn modes(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |p| {
            if let Predicate::Mode(m) = p {
                out.insert(m.as_str());
            }
        });
        out
    }

    fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Predicate)) {
        match self {
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.visit_atoms(f)),
            Predicate::Not(p) => p.visit_atoms(f),
            atom => f(atom),
        }
    }

    fn is_atomic(&self) -> bool {
        !matches!(self, Predicate::And(_) | Predicate::Or(_) | Predicate::Not(_))
    }
}

/// Canonical surface syntax, re-parsable by the model parser.
impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Const(b) => write!(f, "{b}"),
            Predicate::Tokens { place, cmp, value } => write!(f, "{place} {cmp} {value}"),
            Predicate::Counter {
                transition,
                cmp,
                value,
            } => write!(f, "#{transition} {cmp} {value}"),
            Predicate::Mode(m) => write!(f, "mode = {m}"),
            Predicate::And(ps) => write_joined(f, ps, " and "),
            Predicate::Or(ps) => write_joined(f, ps, " or "),
            Predicate::Not(p) => {
                if p.is_atomic() {
                    write!(f, "not {p}")
                } else {
                    write!(f, "not ({p})")
                }
            }
        }
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, ps: &[Predicate], sep: &str) -> fmt::Result {
    if ps.len() == 1 {
        // keeps a degenerate single-operand node distinguishable after re-parse
        return write!(f, "({})", ps[0]);
    }
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        match p {
            Predicate::And(_) | Predicate::Or(_) => write!(f, "({p})")?,
            _ => write!(f, "{p}")?,
        }
    }
    Ok(())
}

/// Index-resolved predicate evaluated against positional markings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Compiled {
    Const(bool),
    Tokens(usize, Cmp, u32),
    Counter(usize, Cmp, u32),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
    Not(Box<Compiled>),
}

impl Compiled {
    /// Evaluates with caller-supplied lookups; values are widened so that an
    /// ω count can be represented as `u64::MAX`.
    pub(crate) fn eval_with<T, C>(&self, tokens: &T, counters: &C) -> bool
    where
        T: Fn(usize) -> u64,
        C: Fn(usize) -> u64,
    {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Tokens(p, cmp, v) => cmp.holds(tokens(*p), u64::from(*v)),
            Compiled::Counter(slot, cmp, v) => cmp.holds(counters(*slot), u64::from(*v)),
            Compiled::And(ps) => ps.iter().all(|p| p.eval_with(tokens, counters)),
            Compiled::Or(ps) => ps.iter().any(|p| p.eval_with(tokens, counters)),
            Compiled::Not(p) => !p.eval_with(tokens, counters),
        }
    }

    /// Records, per place and per counter slot, whether the atom can be
    /// falsified by adding tokens (downward polarity after negations).
    pub(crate) fn collect_downward(&self, negated: bool, places: &mut [bool], counters: &mut [bool]) {
        match self {
            Compiled::Const(_) => {}
            Compiled::Tokens(p, cmp, _) => {
                if is_downward_under(*cmp, negated) {
                    places[*p] = true;
                }
            }
            Compiled::Counter(s, cmp, _) => {
                if is_downward_under(*cmp, negated) {
                    counters[*s] = true;
                }
            }
            Compiled::And(ps) | Compiled::Or(ps) => {
                for p in ps {
                    p.collect_downward(negated, places, counters);
                }
            }
            Compiled::Not(p) => p.collect_downward(!negated, places, counters),
        }
    }
}

fn is_downward_under(cmp: Cmp, negated: bool) -> bool {
    match cmp {
        Cmp::Eq => true,
        c if negated => c.is_upward(),
        c => c.is_downward(),
    }
}
