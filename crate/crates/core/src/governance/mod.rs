//! Declarative, verified and logged structural edits.

mod apply;
mod log;
mod patch;

pub use apply::{
    apply_patch, verify_patch, verify_patch_with_workers, PatchError, PredicateComparison, Regression,
    VerificationReport,
};
pub use log::{model_hash, GovernanceError, GovernanceLog, LogEntry, LoggedVerdict};
pub use patch::{parse_patch, EditOp, Patch};
