//! The `respetri` command line.
//!
//! Exit codes: `check` returns 0 when every predicate is Safe, 1 when any is
//! Unsafe, 2 when any is Unknown and none Unsafe. `simulate` returns 4 when
//! a scripted firing is not enabled. `edit` returns 1 when `--verify` finds a
//! Safe to Unsafe regression. Usage, parse and I/O errors return 3.

mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::analysis::{
    check_all, check_forbidden_with_workers, explore_with_workers, find_cycles, siphons_and_traps, ExplorationBound,
    Outcome, PressureMap, SafeProof, Verdict, VerdictKind, DEFAULT_CYCLE_LENGTH,
};
use crate::audit::{drift_report_on, run_to_jsonl, simulate, DriftError, SimError, SimPolicy};
use crate::dsl::{parse_model, parse_predicate, serialize_model, ModelSource};
use crate::governance::{apply_patch, model_hash, parse_patch, verify_patch_with_workers, GovernanceLog};
use crate::net::{Net, NetModel, Predicate};

pub use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSAFE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;
pub const EXIT_SCRIPT_DISABLED: i32 = 4;

/// Environment variable naming the governance log file.
pub const LOG_ENV: &str = "RESPETRI_LOG";

#[derive(Parser, Debug)]
#[command(name = "respetri", version, about = "Reachability, audit and governance for Petri-net models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide the forbidden predicates of a model.
    Check(CheckArgs),
    /// Run the token game under a firing policy and evaluate audit rules.
    Simulate(SimulateArgs),
    /// Apply a patch, write the new model next to the input and log the decision.
    Edit(EditArgs),
}

#[derive(Args, Debug, Clone)]
struct BoundArgs {
    /// Maximum number of explored markings.
    #[arg(long, default_value_t = 1_000_000)]
    bound_states: usize,
    /// Maximum firing-sequence length.
    #[arg(long, default_value_t = 10_000)]
    bound_depth: usize,
    /// Token cut-off for uncapacitated places and counters.
    #[arg(long, default_value_t = 64)]
    bound_tokens: u32,
    /// Threads used for exploration; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl BoundArgs {
    fn bound(&self) -> ExplorationBound {
        ExplorationBound {
            max_states: self.bound_states.max(1),
            max_depth: self.bound_depth.max(1),
            max_tokens_per_place: self.bound_tokens,
        }
    }
}

#[derive(Args, Debug)]
struct CheckArgs {
    model: PathBuf,
    /// Check only this forbidden predicate.
    #[arg(long)]
    predicate: Option<String>,
    #[command(flatten)]
    bound: BoundArgs,
    /// Extra analyses: any of `cycles`, `siphons`, `pressure`, comma separated.
    #[arg(long, value_delimiter = ',')]
    analysis: Vec<Analysis>,
    /// Largest siphon or trap searched by `--analysis siphons`.
    #[arg(long, default_value_t = 4)]
    siphon_size: usize,
    /// Longest cycle (in nodes) listed by `--analysis cycles`.
    #[arg(long, default_value_t = DEFAULT_CYCLE_LENGTH)]
    cycle_length: usize,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Analysis {
    Cycles,
    Siphons,
    Pressure,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    model: PathBuf,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `random`, `priority:t1,t2,...` or `script:t1,t2,...`.
    #[arg(long, default_value = "random")]
    policy: String,
    /// Forbidden predicate name or predicate expression for a drift report.
    #[arg(long)]
    pressure: Option<String>,
    #[command(flatten)]
    bound: BoundArgs,
    /// Write the per-step log (one JSON object per line) here.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EditArgs {
    model: PathBuf,
    patch: PathBuf,
    /// Check every forbidden predicate before and after the patch.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    bound: BoundArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

struct Failure {
    message: String,
    code: i32,
}

fn fail(message: String) -> Failure {
    Failure { message, code: EXIT_ERROR }
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        fail(e.to_string())
    }
}

type CmdResult = Result<(i32, Report), Failure>;

/// Runs the command line with `args` (program name first), writing
/// human-readable output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let started = Instant::now();
    let (result, report_path) = match &cli.command {
        Command::Check(a) => (cmd_check(a, out), a.report.clone()),
        Command::Simulate(a) => (cmd_simulate(a, out), a.report.clone()),
        Command::Edit(a) => (cmd_edit(a, out), a.report.clone()),
    };
    match result {
        Ok((code, mut report)) => {
            report.wall_time_ms = started.elapsed().as_millis() as u64;
            if let Some(path) = report_path {
                if let Err(e) = std::fs::write(&path, report.to_json()) {
                    let _ = writeln!(err, "error: cannot write report {}: {e}", path.display());
                    return EXIT_ERROR;
                }
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_model(path: &Path) -> Result<NetModel, Failure> {
    let src = ModelSource::from_path(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    parse_model(&src).map_err(|e| fail(format!("{}:\n{e}", path.display())))
}

fn describe(v: &Verdict) -> String {
    match &v.outcome {
        Outcome::Safe(SafeProof::ExhaustiveBounded { states }) => {
            format!("SAFE (exhaustive, {states} states)")
        }
        Outcome::Safe(SafeProof::Coverability { tree_nodes }) => {
            format!("SAFE (coverability, {tree_nodes} tree nodes)")
        }
        Outcome::Unsafe(t) => format!("UNSAFE (trace: {})", t.firings.join(" ")),
        Outcome::Unknown { states_explored } => {
            format!("UNKNOWN (bound reached after {states_explored} states)")
        }
    }
}

fn exit_for(verdicts: &[Verdict]) -> i32 {
    if verdicts.iter().any(|v| v.kind() == VerdictKind::Unsafe) {
        EXIT_UNSAFE
    } else if verdicts.iter().any(|v| v.kind() == VerdictKind::Unknown) {
        EXIT_UNKNOWN
    } else {
        EXIT_OK
    }
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let model = load_model(&a.model)?;
    let net = Net::new(model.clone())?;
    let bound = a.bound.bound();
    let mut report = Report::new("check", model_hash(&model));
    report.param("model", a.model.display().to_string());
    report.param("predicate", &a.predicate);
    report.param("bound", bound);
    report.param("workers", a.bound.workers);
    report.param(
        "analysis",
        a.analysis.iter().map(|x| format!("{x:?}").to_lowercase()).collect::<Vec<_>>(),
    );

    let (verdicts, states, truncated) = match &a.predicate {
        Some(name) => {
            let v = check_forbidden_with_workers(&net, name, &bound, a.bound.workers)?;
            (vec![v], None, None)
        }
        None => {
            let s = check_all(&net, &bound, a.bound.workers);
            (s.verdicts, Some(s.states), Some(s.truncated))
        }
    };
    for v in &verdicts {
        writeln!(out, "{}: {}", v.predicate, describe(v))?;
    }
    let mut results = json!({ "verdicts": verdicts });
    if let Some(s) = states {
        results["states"] = json!(s);
        results["truncated"] = json!(truncated);
    }
    if a.analysis.contains(&Analysis::Cycles) {
        let cycles = find_cycles(&model, a.cycle_length);
        writeln!(out, "cycles: {}", cycles.len())?;
        for c in &cycles {
            writeln!(out, "  ({})", c.join(", "))?;
        }
        results["cycles"] = json!(cycles);
    }
    if a.analysis.contains(&Analysis::Siphons) {
        let st = siphons_and_traps(&model, a.siphon_size);
        let fmt = |s: &std::collections::BTreeSet<String>| format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", "));
        writeln!(out, "siphons: {}", st.siphons.iter().map(fmt).collect::<Vec<_>>().join(" "))?;
        writeln!(out, "traps: {}", st.traps.iter().map(fmt).collect::<Vec<_>>().join(" "))?;
        results["siphons"] = json!(st.siphons);
        results["traps"] = json!(st.traps);
    }
    if a.analysis.contains(&Analysis::Pressure) {
        let graph = explore_with_workers(&net, &bound, a.bound.workers);
        let mut pressure = serde_json::Map::new();
        for f in &model.forbidden {
            let pred = net.forbidden(&f.name).expect("declared");
            let d = PressureMap::compute(&graph, &pred).distance_at(0);
            writeln!(out, "pressure {}: {d}", f.name)?;
            pressure.insert(f.name.clone(), json!(d.finite()));
        }
        results["pressure"] = json!({ "initial": pressure, "truncated": graph.truncated() });
    }
    report.results = results;
    Ok((exit_for(&verdicts), report))
}

fn parse_policy(text: &str, seed: u64) -> Result<SimPolicy, Failure> {
    let list = |s: &str| s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect();
    if text == "random" {
        Ok(SimPolicy::UniformRandom { seed })
    } else if let Some(rest) = text.strip_prefix("priority:") {
        Ok(SimPolicy::Priority { order: list(rest), seed })
    } else if let Some(rest) = text.strip_prefix("script:") {
        Ok(SimPolicy::Scripted(list(rest)))
    } else {
        Err(fail(format!(
            "unknown policy `{text}` (expected random, priority:a,b or script:a,b)"
        )))
    }
}

fn resolve_predicate(model: &NetModel, text: &str) -> Result<Predicate, Failure> {
    if let Some(p) = model.forbidden_predicate(text) {
        return Ok(p.clone());
    }
    parse_predicate(text).map_err(|e| fail(format!("--pressure: {e}")))
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let model = load_model(&a.model)?;
    let net = Net::new(model.clone())?;
    let policy = parse_policy(&a.policy, a.seed)?;
    let mut report = Report::new("simulate", model_hash(&model));
    report.param("model", a.model.display().to_string());
    report.param("steps", a.steps);
    report.param("seed", a.seed);
    report.param("policy", &policy);
    report.param("pressure", &a.pressure);

    let mut run = match simulate(&net, &policy, a.steps) {
        Ok(run) => run,
        Err(e @ SimError::ScriptedFiringDisabled { .. }) => {
            return Err(Failure {
                message: e.to_string(),
                code: EXIT_SCRIPT_DISABLED,
            });
        }
    };
    let mut results = json!({});
    if let Some(text) = &a.pressure {
        let pred = resolve_predicate(&model, text)?;
        let bound = a.bound.bound();
        report.param("bound", bound);
        let graph = explore_with_workers(&net, &bound, a.bound.workers);
        let drift = drift_report_on(&net, &graph, &run, &pred).map_err(|e| match e {
            DriftError::PressureUnavailable { .. } => fail(e.to_string()),
            DriftError::Net(e) => fail(format!("--pressure: {e}")),
        })?;
        run.pressure_series = Some(drift.series.clone());
        writeln!(
            out,
            "pressure: {}",
            drift.series.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        )?;
        writeln!(out, "approach episodes: {}", drift.episodes.len())?;
        results["drift"] = json!(drift);
    }
    writeln!(out, "steps: {}", run.steps())?;
    writeln!(out, "fired: {}", run.trace.firings.join(" "))?;
    if let Some(d) = run.deadlock {
        writeln!(out, "deadlock at step {d}")?;
    }
    for alarm in &run.alarms {
        writeln!(out, "alarm {} at step {} (observed {})", alarm.rule, alarm.step, alarm.observed)?;
    }
    if let Some(path) = &a.jsonl {
        std::fs::write(path, run_to_jsonl(&net, &run)).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    }
    results["run"] = json!(run);
    report.results = results;
    Ok((EXIT_OK, report))
}

/// `<dir>/<stem>.<patch short id>.net`, where `stem` drops any earlier
/// patch suffix so derived models stay siblings of the original.
fn edited_path(model: &Path, short_id: &str) -> PathBuf {
    let base = root_stem(model);
    model.with_file_name(format!("{base}.{short_id}.net"))
}

fn root_stem(model: &Path) -> String {
    let name = model.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    name.split('.').next().unwrap_or("model").to_string()
}

fn log_path(model: &Path) -> PathBuf {
    match std::env::var_os(LOG_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => model.with_file_name(format!("{}.governance.jsonl", root_stem(model))),
    }
}

fn cmd_edit(a: &EditArgs, out: &mut dyn Write) -> CmdResult {
    let model = load_model(&a.model)?;
    let patch_text =
        std::fs::read_to_string(&a.patch).map_err(|e| fail(format!("{}: {e}", a.patch.display())))?;
    let patch = parse_patch(&patch_text).map_err(|errs| {
        fail(format!(
            "{}:\n{}",
            a.patch.display(),
            errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
        ))
    })?;
    let post = apply_patch(&model, &patch)?;
    let bound = a.bound.bound();
    let verification = if a.verify {
        Some(verify_patch_with_workers(&model, &patch, &bound, a.bound.workers)?)
    } else {
        None
    };

    let log_file = log_path(&a.model);
    let mut log = GovernanceLog::load(&log_file)?;
    log.record_decision(&model, &post, &patch, verification.as_ref())?;

    let target = edited_path(&a.model, &patch.short_id());
    std::fs::write(&target, serialize_model(&post).text).map_err(|e| fail(format!("{}: {e}", target.display())))?;
    log.append_last(&log_file)?;

    let mut report = Report::new("edit", model_hash(&model));
    report.param("model", a.model.display().to_string());
    report.param("patch", a.patch.display().to_string());
    report.param("verify", a.verify);
    report.param("bound", bound);
    writeln!(out, "patch {} applied", patch.short_id())?;
    writeln!(out, "wrote {}", target.display())?;
    writeln!(out, "logged to {}", log_file.display())?;
    let mut code = EXIT_OK;
    if let Some(v) = &verification {
        for c in &v.comparisons {
            let show = |x: &Option<Verdict>| x.as_ref().map_or("absent".to_string(), describe);
            writeln!(out, "{}: {} -> {}", c.name, show(&c.before), show(&c.after))?;
        }
        for name in &v.predicates_removed {
            writeln!(out, "warning: forbidden predicate `{name}` removed")?;
        }
        for name in &v.predicates_changed {
            writeln!(out, "warning: forbidden predicate `{name}` changed")?;
        }
        for r in &v.regressions {
            writeln!(out, "regression: {} is no longer Safe ({:?})", r.predicate, r.after)?;
        }
        if v.has_unsafe_regression() {
            code = EXIT_UNSAFE;
        }
    }
    report.results = json!({
        "patch_id": patch.id(),
        "output": target.display().to_string(),
        "post_model_hash": model_hash(&post),
        "log": log_file.display().to_string(),
        "verification": verification,
    });
    Ok((code, report))
}
