//! Reachability, coverability, structural impact analysis and reachability
//! pressure.

mod explore;
mod karp_miller;
mod pressure;
mod structure;
mod verdict;

pub use explore::{explore, explore_with_workers, violation_trace, Edge, ExplorationBound, ReachGraph};
pub use karp_miller::{karp_miller, Count, KarpMillerError, KarpMillerResult, KmNode, KM_TOKEN_CUT};
pub use pressure::{pressure_within, reachability_pressure, Distance, PressureError, PressureMap, PressureReading};
pub use structure::{find_cycles, siphons_and_traps, Cycle, SiphonsAndTraps, DEFAULT_CYCLE_LENGTH};
pub use verdict::{
    check_all, check_forbidden, check_forbidden_with_workers, CheckError, CheckSummary, Outcome, SafeProof, Verdict, VerdictKind,
    ViolationTrace,
};
