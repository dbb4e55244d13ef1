//! Net data model and token-game semantics.
//!
//! A [`NetModel`] is the declarative structure (places, transitions, arcs,
//! guards, forbidden predicates, audit rules, modes). [`Net`] is the compiled,
//! validated form that implements enabling and firing over [`Marking`]s.

mod marking;
mod model;
mod predicate;
mod semantics;
mod validate;

pub use marking::Marking;
pub use model::{mode_place_id, ArcKind, ArcRef, ModeDef, NamedPredicate, NetModel, PlaceDef, TransitionDef};
pub use predicate::{Cmp, Predicate};
pub use semantics::{CompiledPredicate, MarkingDisplay, Net, NetError};
pub use validate::{is_valid_identifier, validate_net, StructureError, KEYWORDS};
