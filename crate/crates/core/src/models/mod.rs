//! Built-in fixtures: an adaptive traffic controller, a risk-scoring
//! workflow, and a symbolic socio-technical net with safeguards and audit.
//!
//! Arc weights are 1 throughout. Initial markings and thresholds are
//! configuration; the defaults below are chosen so that the unsafeguarded
//! variants reach their forbidden predicate and the safeguarded variants
//! have a finite, exhaustively explorable state space without it.
//!
//! | fixture | thresholds (default) | initial tokens (default) |
//! |---|---|---|
//! | traffic | `q_bar`=2, `r_bar`=2, `e_bar`=0, optional `d_bar` | p1=2, p2=2, p4=1 |
//! | risk scoring | `a`=0, `b`=2, `c`=0, `d`=2 | p1=1, p5=2 |
//! | symbolic | `theta`=2, `g`=2 | pA=1, p_policy=1, p_permit=1 |

use std::collections::BTreeMap;

use crate::audit::{AuditKind, AuditRule};
use crate::governance::{EditOp, Patch};
use crate::net::{ArcKind, Cmp, NamedPredicate, NetModel, PlaceDef, Predicate, TransitionDef};

/// Name of the forbidden predicate in every fixture.
pub const FORBIDDEN: &str = "bad";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureConfig {
    pub thresholds: BTreeMap<String, u32>,
    /// Overrides for the default initial marking.
    pub initial_tokens: BTreeMap<String, u32>,
    pub safeguards_enabled: bool,
}

impl FixtureConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn safeguarded() -> Self {
        Self::default().with_safeguards(true)
    }

    pub fn with_threshold(mut self, name: &str, value: u32) -> Self {
        self.thresholds.insert(name.to_string(), value);
        self
    }

    pub fn with_initial(mut self, place: &str, tokens: u32) -> Self {
        self.initial_tokens.insert(place.to_string(), tokens);
        self
    }

    pub fn with_safeguards(mut self, on: bool) -> Self {
        self.safeguards_enabled = on;
        self
    }

    fn threshold(&self, name: &str, default: u32) -> u32 {
        self.thresholds.get(name).copied().unwrap_or(default)
    }

    fn place(&self, id: &str, default: u32, label: &str) -> PlaceDef {
        PlaceDef::new(id, self.initial_tokens.get(id).copied().unwrap_or(default)).with_label(label)
    }
}

fn forbidden(predicate: Predicate) -> Vec<NamedPredicate> {
    vec![NamedPredicate {
        name: FORBIDDEN.to_string(),
        predicate,
    }]
}

fn meta(title: &str) -> BTreeMap<String, String> {
    BTreeMap::from([("title".to_string(), title.to_string())])
}

/// Adaptive traffic management.
///
/// Reinforcing loop `p2 → t2 → p3 → t4 → p4 → t6 → p2`; `t2` also feeds the
/// endogenous-data place `p6`, which `t6` consumes together with `p3`.
/// `t5` routes the population response `p2 → p5 → t1`, and `t3` codifies
/// reliance back into the active policy (`p3 → t3 → p2`). `p6` has capacity
/// 4, which keeps the state space finite.
///
/// Forbidden: `p1 >= q_bar and p3 >= r_bar and p4 <= e_bar` (plus
/// `p6 >= d_bar` when `d_bar` is set).
///
/// Safeguards: an inhibitor arc `p3 → t4` with threshold `r_bar`, and the
/// guard `p4 >= e_bar + 2` on `t6`, so retuning never drains the last
/// emergency-priority token. See [`traffic_safeguard_patch`].
pub fn build_traffic_model(cfg: &FixtureConfig) -> NetModel {
    let q = cfg.threshold("q_bar", 2);
    let r = cfg.threshold("r_bar", 2);
    let e = cfg.threshold("e_bar", 0);
    let mut bad = vec![
        Predicate::tokens("p1", Cmp::Ge, q),
        Predicate::tokens("p3", Cmp::Ge, r),
        Predicate::tokens("p4", Cmp::Le, e),
    ];
    if let Some(&d) = cfg.thresholds.get("d_bar") {
        bad.push(Predicate::tokens("p6", Cmp::Ge, d));
    }
    let model = NetModel {
        places: vec![
            cfg.place("p1", 2, "intersection queue capacity"),
            cfg.place("p2", 2, "active signal timing policy"),
            cfg.place("p3", 0, "institutional reliance on adaptive control"),
            cfg.place("p4", 1, "emergency vehicle priority capacity"),
            cfg.place("p5", 0, "driver route adaptation"),
            cfg.place("p6", 0, "endogenous congestion data").with_capacity(4),
        ],
        transitions: vec![
            TransitionDef::new("t1")
                .input("p1", 1)
                .input("p5", 1)
                .output("p2", 1)
                .with_label("sense traffic state and update controller inputs"),
            TransitionDef::new("t2")
                .input("p2", 1)
                .output("p3", 1)
                .output("p6", 1)
                .with_label("apply adaptive signal timing or routing decision"),
            TransitionDef::new("t3")
                .input("p3", 1)
                .output("p2", 1)
                .with_label("codify learned policy into default control parameters"),
            TransitionDef::new("t4")
                .input("p3", 1)
                .output("p4", 1)
                .with_label("reduce manual oversight"),
            TransitionDef::new("t5")
                .input("p2", 1)
                .output("p5", 1)
                .with_label("driver population adapts routes"),
            TransitionDef::new("t6")
                .input("p4", 1)
                .input("p3", 1)
                .input("p6", 1)
                .output("p2", 1)
                .with_label("retune control policy on endogenous data"),
        ],
        forbidden: forbidden(Predicate::and(bad)),
        metadata: meta("adaptive traffic management"),
        ..NetModel::default()
    };
    if cfg.safeguards_enabled {
        crate::governance::apply_patch(&model, &traffic_safeguard_patch(cfg)).expect("safeguard patch applies")
    } else {
        model
    }
}

/// The two edits that turn the unsafeguarded traffic net into the
/// safeguarded one.
pub fn traffic_safeguard_patch(cfg: &FixtureConfig) -> Patch {
    let r = cfg.threshold("r_bar", 2);
    let e = cfg.threshold("e_bar", 0);
    Patch::new(vec![
        EditOp::AddArc {
            transition: "t4".into(),
            kind: ArcKind::Inhibitor,
            place: "p3".into(),
            weight: r.max(1),
        },
        EditOp::SetGuard {
            transition: "t6".into(),
            guard: Some(Predicate::tokens("p4", Cmp::Ge, e + 2)),
        },
    ])
    .with_author("traffic operations board")
    .with_rationale("cap automation reliance and keep emergency priority available")
}

/// Risk scoring in a human decision workflow.
///
/// `t1` turns population adaptation into a fresh score (`p5 → t1 → p2`);
/// `t2` (defer) consumes discretion `p1` and the score, producing reliance
/// `p3` and endogenous data `p6`; `t3` codifies reliance (read arc on `p3`)
/// and restores discretion (`p1`, capacity 2); `t4` moves reliance into
/// reduced oversight `p4`; `t5` moves it into adaptation `p5`; `t6` retrains
/// from `p4` and `p6` back to `p2`. `p6` has capacity 4.
///
/// Forbidden: `p1 <= a and p3 >= b and p4 <= c and p6 >= d`.
///
/// Safeguard: an inhibitor arc `p3 → t2` with threshold `max(b - 1, 1)`, so
/// deferral stops before reliance reaches `b`.
pub fn build_risk_scoring_model(cfg: &FixtureConfig) -> NetModel {
    let a = cfg.threshold("a", 0);
    let b = cfg.threshold("b", 2);
    let c = cfg.threshold("c", 0);
    let d = cfg.threshold("d", 2);
    let mut defer = TransitionDef::new("t2")
        .input("p1", 1)
        .input("p2", 1)
        .output("p3", 1)
        .output("p6", 1)
        .with_label("human defers to recommendation");
    if cfg.safeguards_enabled {
        defer = defer.inhibitor("p3", b.saturating_sub(1).max(1));
    }
    NetModel {
        places: vec![
            cfg.place("p1", 1, "human discretionary capacity").with_capacity(2),
            cfg.place("p2", 0, "recommendation invoked"),
            cfg.place("p3", 0, "institutional reliance on scores"),
            cfg.place("p4", 0, "oversight and review capacity"),
            cfg.place("p5", 2, "population behavioral adaptation"),
            cfg.place("p6", 0, "endogenous data accumulation").with_capacity(4),
        ],
        transitions: vec![
            TransitionDef::new("t1")
                .input("p5", 1)
                .output("p2", 1)
                .with_label("generate and present risk score"),
            defer,
            TransitionDef::new("t3")
                .read("p3", 1)
                .output("p1", 1)
                .with_label("procedure updated to codify usage"),
            TransitionDef::new("t4")
                .input("p3", 1)
                .output("p4", 1)
                .with_label("oversight reduced"),
            TransitionDef::new("t5")
                .input("p3", 1)
                .output("p5", 1)
                .with_label("population adapts to scoring regime"),
            TransitionDef::new("t6")
                .input("p4", 1)
                .input("p6", 1)
                .output("p2", 1)
                .with_label("model retrained on endogenous data"),
        ],
        forbidden: forbidden(Predicate::and(vec![
            Predicate::tokens("p1", Cmp::Le, a),
            Predicate::tokens("p3", Cmp::Ge, b),
            Predicate::tokens("p4", Cmp::Le, c),
            Predicate::tokens("p6", Cmp::Ge, d),
        ])),
        metadata: meta("risk scoring workflow"),
        ..NetModel::default()
    }
}

/// Symbolic realization of a socio-technical system with feedback,
/// safeguards, audit and governance layers.
///
/// Operation `tA: pA → pB` and policy `tPol: p_policy → pB` feed the
/// decision point `t2`, which consumes a permit and fires only while the
/// guard `pD < g` holds; it is counted and moves work to `pC`. `tCD1`/`tCD2`
/// cycle work between `pC` and `pD`; `tDash` observes `pB` on a read arc and
/// raises the dashboard `p_dash` once; `tAudit` raises `p_flag` once the
/// counter of `t2` exceeds `theta`, mirrored by the audit rule `alarm`.
/// `t_bad` leads from `pC` to the forbidden place `p_bad`.
///
/// Safeguard: `t_bad` additionally requires `p_permit >= 1`, so once the
/// permits are spent the bad outcome is unreachable. With the default single
/// permit this makes the net safe.
pub fn build_srs_symbolic_model(cfg: &FixtureConfig) -> NetModel {
    let theta = cfg.threshold("theta", 2);
    let g = cfg.threshold("g", 2);
    let mut bad = TransitionDef::new("t_bad")
        .input("pC", 1)
        .output("p_bad", 1)
        .with_label("harmful outcome");
    if cfg.safeguards_enabled {
        bad = bad.guarded(Predicate::tokens("p_permit", Cmp::Ge, 1));
    }
    NetModel {
        places: vec![
            cfg.place("pA", 1, "operational input"),
            cfg.place("p_policy", 1, "policy input"),
            cfg.place("pB", 0, "decision pending"),
            cfg.place("p_dash", 0, "dashboard observation").with_capacity(1),
            cfg.place("p_permit", 1, "permits"),
            cfg.place("pC", 0, "decision taken"),
            cfg.place("pD", 0, "downstream effect"),
            cfg.place("p_bad", 0, "forbidden outcome"),
            cfg.place("p_flag", 0, "audit flag").with_capacity(1),
        ],
        transitions: vec![
            TransitionDef::new("tA").input("pA", 1).output("pB", 1).with_label("operate"),
            TransitionDef::new("tPol")
                .input("p_policy", 1)
                .output("pB", 1)
                .with_label("apply policy"),
            TransitionDef::new("tDash")
                .read("pB", 1)
                .inhibitor("p_dash", 1)
                .output("p_dash", 1)
                .with_label("observe marking"),
            TransitionDef::new("t2")
                .input("pB", 1)
                .input("p_permit", 1)
                .output("pC", 1)
                .counted()
                .guarded(Predicate::tokens("pD", Cmp::Lt, g))
                .with_label("decide"),
            TransitionDef::new("tAudit")
                .inhibitor("p_flag", 1)
                .output("p_flag", 1)
                .guarded(Predicate::counter("t2", Cmp::Gt, theta))
                .with_label("raise audit flag"),
            TransitionDef::new("tCD1").input("pC", 1).output("pD", 1),
            TransitionDef::new("tCD2").input("pD", 1).output("pC", 1),
            bad,
        ],
        forbidden: forbidden(Predicate::tokens("p_bad", Cmp::Ge, 1)),
        audit_rules: vec![AuditRule {
            id: "alarm".into(),
            kind: AuditKind::CounterThreshold {
                transition: "t2".into(),
                threshold: theta,
            },
        }],
        metadata: meta("symbolic socio-technical net"),
        ..NetModel::default()
    }
}
