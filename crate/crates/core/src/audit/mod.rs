//! Seeded simulation, audit rules and drift reports.

mod rules;
mod simulate;

pub use rules::{evaluate_audit_rules, Alarm, AuditKind, AuditRule};
pub use simulate::{
    approach_episodes, drift_report, drift_report_on, run_to_jsonl, simulate, ApproachEpisode, DriftError,
    DriftReport, RunRecord, SimError, SimPolicy,
};
