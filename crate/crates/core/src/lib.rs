//! Responsibility-oriented Petri nets: a model language, reachability and
//! coverability verdicts, auditing, and governed structural edits.

pub mod analysis;
pub mod audit;
pub mod cli;
pub mod dsl;
pub mod governance;
pub mod models;
pub mod net;
