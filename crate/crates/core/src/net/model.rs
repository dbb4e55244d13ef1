use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::audit::AuditRule;
use crate::net::predicate::Predicate;

/// A weighted arc endpoint. For inhibitor arcs the weight is the blocking threshold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcRef {
    pub place: String,
    pub weight: u32,
}

impl ArcRef {
    pub fn new(place: impl Into<String>, weight: u32) -> Self {
        ArcRef {
            place: place.into(),
            weight,
        }
    }
}

/// The four arc roles a place can play relative to a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArcKind {
    Input,
    Output,
    Inhibitor,
    Read,
}

impl ArcKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ArcKind::Input => "in",
            ArcKind::Output => "out",
            ArcKind::Inhibitor => "inhibit",
            ArcKind::Read => "read",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "in" => Some(ArcKind::Input),
            "out" => Some(ArcKind::Output),
            "inhibit" => Some(ArcKind::Inhibitor),
            "read" => Some(ArcKind::Read),
            _ => None,
        }
    }

    pub const ALL: [ArcKind; 4] = [ArcKind::Input, ArcKind::Output, ArcKind::Inhibitor, ArcKind::Read];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceDef {
    pub id: String,
    pub capacity: Option<u32>,
    pub initial: u32,
    pub label: String,
}

impl PlaceDef {
    pub fn new(id: impl Into<String>, initial: u32) -> Self {
        PlaceDef {
            id: id.into(),
            capacity: None,
            initial,
            label: String::new(),
        }
    }

    pub fn with_capacity(mut self, capacity: u32) -> Self {
        self.capacity = Some(capacity);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDef {
    pub id: String,
    pub inputs: Vec<ArcRef>,
    pub outputs: Vec<ArcRef>,
    pub inhibitors: Vec<ArcRef>,
    pub reads: Vec<ArcRef>,
    pub guard: Option<Predicate>,
    pub counted: bool,
    pub label: String,
}

impl TransitionDef {
    pub fn new(id: impl Into<String>) -> Self {
        TransitionDef {
            id: id.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            inhibitors: Vec::new(),
            reads: Vec::new(),
            guard: None,
            counted: false,
            label: String::new(),
        }
    }

    pub fn input(mut self, place: &str, weight: u32) -> Self {
        self.inputs.push(ArcRef::new(place, weight));
        self
    }

    pub fn output(mut self, place: &str, weight: u32) -> Self {
        self.outputs.push(ArcRef::new(place, weight));
        self
    }

    pub fn inhibitor(mut self, place: &str, threshold: u32) -> Self {
        self.inhibitors.push(ArcRef::new(place, threshold));
        self
    }

    pub fn read(mut self, place: &str, weight: u32) -> Self {
        self.reads.push(ArcRef::new(place, weight));
        self
    }

    pub fn guarded(mut self, guard: Predicate) -> Self {
        self.guard = Some(guard);
        self
    }

    pub fn counted(mut self) -> Self {
        self.counted = true;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn arcs(&self, kind: ArcKind) -> &Vec<ArcRef> {
        match kind {
            ArcKind::Input => &self.inputs,
            ArcKind::Output => &self.outputs,
            ArcKind::Inhibitor => &self.inhibitors,
            ArcKind::Read => &self.reads,
        }
    }

    pub fn arcs_mut(&mut self, kind: ArcKind) -> &mut Vec<ArcRef> {
        match kind {
            ArcKind::Input => &mut self.inputs,
            ArcKind::Output => &mut self.outputs,
            ArcKind::Inhibitor => &mut self.inhibitors,
            ArcKind::Read => &mut self.reads,
        }
    }

    /// Every place touched by any arc of this transition.
    pub fn adjacent_places(&self) -> BTreeSet<&str> {
        ArcKind::ALL
            .iter()
            .flat_map(|k| self.arcs(*k).iter().map(|a| a.place.as_str()))
            .collect()
    }
}

/// An operating mode. Exactly one mode place carries a token in any marking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeDef {
    pub id: String,
    pub guard_overrides: BTreeMap<String, Predicate>,
    pub disabled: BTreeSet<String>,
}

impl ModeDef {
    pub fn new(id: impl Into<String>) -> Self {
        ModeDef {
            id: id.into(),
            guard_overrides: BTreeMap::new(),
            disabled: BTreeSet::new(),
        }
    }

    /// Identifier of the place that holds this mode's token.
    pub fn place_id(&self) -> String {
        mode_place_id(&self.id)
    }
}

pub fn mode_place_id(mode: &str) -> String {
    format!("mode_{mode}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedPredicate {
    pub name: String,
    pub predicate: Predicate,
}

/// Net structure plus its forbidden-marking predicates, audit rules and modes.
///
/// Arc endpoints refer to places by identifier, so a `NetModel` may be
/// ill-formed; `validate_net` reports every violated rule and `Net::new`
/// refuses to compile an invalid model.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NetModel {
    pub places: Vec<PlaceDef>,
    pub transitions: Vec<TransitionDef>,
    pub forbidden: Vec<NamedPredicate>,
    pub audit_rules: Vec<AuditRule>,
    pub modes: Vec<ModeDef>,
    pub metadata: BTreeMap<String, String>,
}

impl NetModel {
    pub fn place(&self, id: &str) -> Option<&PlaceDef> {
        self.places.iter().find(|p| p.id == id)
    }

    pub fn place_mut(&mut self, id: &str) -> Option<&mut PlaceDef> {
        self.places.iter_mut().find(|p| p.id == id)
    }

    pub fn transition(&self, id: &str) -> Option<&TransitionDef> {
        self.transitions.iter().find(|t| t.id == id)
    }

    pub fn transition_mut(&mut self, id: &str) -> Option<&mut TransitionDef> {
        self.transitions.iter_mut().find(|t| t.id == id)
    }

    pub fn forbidden_predicate(&self, name: &str) -> Option<&Predicate> {
        self.forbidden.iter().find(|f| f.name == name).map(|f| &f.predicate)
    }

    /// Copy with every block and arc list sorted by identifier.
    ///
    /// Two models are structurally equal iff their canonical forms are equal.
    pub fn canonical(&self) -> NetModel {
        let mut m = self.clone();
        m.places.sort_by(|a, b| a.id.cmp(&b.id));
        m.transitions.sort_by(|a, b| a.id.cmp(&b.id));
        for t in &mut m.transitions {
            for kind in ArcKind::ALL {
                t.arcs_mut(kind).sort();
            }
        }
        m.forbidden.sort_by(|a, b| a.name.cmp(&b.name));
        m.audit_rules.sort_by(|a, b| a.id.cmp(&b.id));
        m.modes.sort_by(|a, b| a.id.cmp(&b.id));
        m
    }

    pub fn structurally_eq(&self, other: &NetModel) -> bool {
        self.canonical() == other.canonical()
    }
}
