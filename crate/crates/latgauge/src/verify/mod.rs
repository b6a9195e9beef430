//! Scenario files, the check registry and law reports.
//!
//! A scenario names a backend, a few graphs over a segment pool and the
//! refinement witnesses between them. Every registered check draws its own
//! random data from a generator seeded by the scenario seed and the check
//! name, so reports do not depend on the worker count or on which suites
//! were selected.

mod checks;

use crate::group_backend::SUPPORTED_BACKENDS;
use crate::structured_graph::{order_class, resolve, validate_witness, RefinementWitness, Resolved, SegmentPool, StructuredGraph};
use crate::{Error, Group, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

pub use checks::{canned_split, CheckDef, REGISTRY};

pub const SUITES: [&str; 7] = ["poisson", "projection", "morphism", "representation", "quantization", "gauge", "states"];

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "LATGAUGE_WORKERS";

/// Largest point basis a finite graph may carry.
pub const MAX_POINT_BASIS: usize = 1296;

/// Largest Lie graph the operator checks are asked to handle.
pub const MAX_LIE_EDGES: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Exact,
    Double,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Pointwise identities evaluated in floating point.
    pub pointwise: f64,
    /// Operator identities on Lie cutoff spaces.
    pub lie: f64,
    /// Poisson brackets of projected functions.
    pub poisson: f64,
    /// Smallest Poisson defect accepted as a genuine failure.
    pub defect_min: f64,
    /// Smallest inconsistency accepted from the perturbed state.
    pub control_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { pointwise: 1e-12, lie: 1e-9, poisson: 1e-6, defect_min: 1e-3, control_min: 1e-2 }
    }
}

fn default_trials() -> usize {
    8
}

fn default_eps() -> Vec<f64> {
    vec![0.5]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub backend: String,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub segments: BTreeMap<String, (String, String)>,
    #[serde(default)]
    pub graphs: Vec<StructuredGraph>,
    #[serde(default)]
    pub witnesses: Vec<RefinementWitness>,
    /// Suites to run; all of them when absent.
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Deformation parameters for the quantization suite.
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
}

/// A witness together with its graphs and index form.
#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub coarse: StructuredGraph,
    pub fine: StructuredGraph,
    pub resolved: Resolved,
    pub class: &'static str,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub group: Group,
    pub pool: SegmentPool,
    pub cases: Vec<Case>,
}

impl Scenario {
    pub fn suites(&self) -> Vec<String> {
        match &self.file.suites {
            Some(s) => s.clone(),
            None => SUITES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn graph(&self, id: &str) -> Option<&StructuredGraph> {
        self.file.graphs.iter().find(|g| g.id == id)
    }
}

/// Smallest cutoff the Lie suites need: the U(1) kernel formula shifts modes
/// by up to 2 from a cutoff-1 source, SU(2) refinement covariance needs spin 2.
pub fn required_cutoff(group: &Group) -> Option<u32> {
    match group.kind() {
        crate::group_backend::BackendKind::U1 { .. } => Some(3),
        crate::group_backend::BackendKind::Su2 { .. } => Some(4),
        crate::group_backend::BackendKind::Finite(_) => None,
    }
}

/// Parses and validates a scenario, collecting every problem found.
pub fn parse_scenario(text: &str) -> std::result::Result<Scenario, Vec<String>> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| vec![format!("parse error at line {}, column {}: {e}", e.line(), e.column())])?;
    validate_scenario(file)
}

pub fn load_scenario(path: &Path) -> std::result::Result<Scenario, Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
    parse_scenario(&text)
}

pub fn validate_scenario(file: ScenarioFile) -> std::result::Result<Scenario, Vec<String>> {
    let mut errs = Vec::new();
    let group = match Group::parse(&file.backend) {
        Ok(g) => Some(g),
        Err(e) => {
            let msg = e.to_string();
            errs.push(if msg.contains(SUPPORTED_BACKENDS) { msg } else { format!("{msg} (supported backends: {SUPPORTED_BACKENDS})") });
            None
        }
    };
    if let Some(g) = &group {
        if file.arithmetic == Arithmetic::Exact && !g.is_finite() {
            errs.push(format!("exact arithmetic needs a finite backend, {} is a Lie group; use \"arithmetic\": \"double\"", g.selector()));
        }
        if let Some(need) = required_cutoff(g) {
            if g.cutoff() < need {
                errs.push(format!("backend {} has cutoff {} but the suites need at least {need} in the same units", g.selector(), g.cutoff()));
            }
        }
    }
    if file.trials == 0 {
        errs.push("trials must be at least 1".into());
    }
    for e in &file.eps {
        if !(e.is_finite() && *e > 0.0) {
            errs.push(format!("eps values must be positive, got {e}"));
        }
    }
    if file.eps.is_empty() {
        errs.push("eps must list at least one value".into());
    }
    let t = &file.tolerances;
    for (name, v) in [("pointwise", t.pointwise), ("lie", t.lie), ("poisson", t.poisson), ("defect_min", t.defect_min), ("control_min", t.control_min)] {
        if !(v.is_finite() && v >= 0.0) {
            errs.push(format!("tolerance {name} must be a finite non-negative number, got {v}"));
        }
    }
    if let Some(s) = &file.suites {
        for name in s {
            if !SUITES.contains(&name.as_str()) {
                errs.push(format!("unknown suite {name}; known suites: {}", SUITES.join(", ")));
            }
        }
    }

    let pool = SegmentPool { segments: file.segments.clone() };
    let mut seen = BTreeSet::new();
    for g in &file.graphs {
        if !seen.insert(g.id.clone()) {
            errs.push(format!("duplicate graph id {}", g.id));
        }
        errs.extend(g.validate(&pool).into_iter().map(|e| format!("graph {}: {e}", g.id)));
        if let Some(gr) = &group {
            match gr.order() {
                Some(n) => {
                    let size = (n as f64).powi(g.edges.len() as i32);
                    if size > MAX_POINT_BASIS as f64 {
                        errs.push(format!("graph {} has {size} point-basis states, the limit is {MAX_POINT_BASIS}", g.id));
                    }
                }
                None if g.edges.len() > MAX_LIE_EDGES => errs.push(format!("graph {} has {} edges, Lie backends support at most {MAX_LIE_EDGES}", g.id, g.edges.len())),
                None => {}
            }
        }
    }

    let mut cases = Vec::new();
    let mut wids = BTreeSet::new();
    for w in &file.witnesses {
        if !wids.insert(w.id.clone()) {
            errs.push(format!("duplicate witness id {}", w.id));
        }
        let coarse = file.graphs.iter().find(|g| g.id == w.coarse);
        let fine = file.graphs.iter().find(|g| g.id == w.fine);
        if coarse.is_none() {
            errs.push(format!("witness {}: unknown coarse graph {}", w.id, w.coarse));
        }
        if fine.is_none() {
            errs.push(format!("witness {}: unknown fine graph {}", w.id, w.fine));
        }
        let (Some(coarse), Some(fine)) = (coarse, fine) else { continue };
        let werrs = validate_witness(w, coarse, fine);
        if !werrs.is_empty() {
            errs.extend(werrs.into_iter().map(|e| format!("witness {}: {e}", w.id)));
            continue;
        }
        match resolve(w, coarse, fine) {
            Ok(resolved) => cases.push(Case { label: w.id.clone(), coarse: coarse.clone(), fine: fine.clone(), resolved, class: order_class(w).label() }),
            Err(e) => errs.push(format!("witness {}: {e}", w.id)),
        }
    }

    match group {
        Some(group) if errs.is_empty() => Ok(Scenario { file, group, pool, cases }),
        _ => Err(errs),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// Expected failure observed with the required margin.
    Xfail,
    /// Expected failure that did not fail by the required margin.
    Xpass,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::Xfail => "XFAIL",
            Status::Xpass => "XPASS",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub suite: String,
    pub law: String,
    pub status: Status,
    pub expected_fail: bool,
    /// Worst residual over all trials; absent for skipped or erroring checks.
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    /// Required residual for an expected failure.
    pub margin: Option<f64>,
    pub trials: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub expected_failures: usize,
    pub unexpected_passes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub scenario: String,
    pub backend: String,
    pub cutoff: u32,
    pub arithmetic: Arithmetic,
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub environment: Environment,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

impl Report {
    /// True iff no check outside the expected failures failed.
    pub fn ok(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports hold finite numbers only")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Scenario(vec![e.to_string()]))
    }

    pub fn to_text(&self) -> String {
        let env = &self.environment;
        let mut out = String::new();
        let _ = writeln!(out, "scenario {} on {} (arithmetic {:?}, seed {}, trials {})", env.scenario, env.backend, env.arithmetic, env.seed, env.trials);
        for c in &self.checks {
            let num = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3e}"));
            let _ = write!(out, "[{:<5}] {}/{}  residual={} tol={}", c.status.label(), c.suite, c.name, num(c.residual), num(c.tolerance));
            if let Some(m) = c.margin {
                let _ = write!(out, " margin={m:.1e}");
            }
            let _ = writeln!(out, "  law: {}", c.law);
            if !c.detail.is_empty() {
                let _ = writeln!(out, "        {}", c.detail);
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} checks: {} passed, {} failed, {} skipped, {} expected failures, {} unexpected passes",
            s.total, s.passed, s.failed, s.skipped, s.expected_failures, s.unexpected_passes
        );
        out
    }
}

/// Outcome of one check body.
#[derive(Clone, Debug)]
pub enum Outcome {
    Measured { residual: f64, tolerance: f64, margin: Option<f64>, trials: usize, detail: String },
    Skipped(String),
}

impl Outcome {
    pub fn measured(residual: f64, tolerance: f64, trials: usize, detail: impl Into<String>) -> Self {
        Outcome::Measured { residual, tolerance, margin: None, trials, detail: detail.into() }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// Generator of one check: independent of the other checks and of threads.
pub fn check_rng(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(name))
}

/// Worker count from [`WORKERS_ENV`]; unset or invalid means rayon's default.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|n| *n > 0)
}

fn finish(def: &CheckDef, out: Result<Outcome>) -> CheckReport {
    let mut rep = CheckReport {
        name: def.name.into(),
        suite: def.suite.into(),
        law: def.law.into(),
        status: Status::Skipped,
        expected_fail: def.expected_fail,
        residual: None,
        tolerance: None,
        margin: None,
        trials: 0,
        detail: String::new(),
    };
    match out {
        Err(e) => {
            rep.status = if def.expected_fail { Status::Xpass } else { Status::Fail };
            rep.detail = format!("error: {e}");
        }
        Ok(Outcome::Skipped(why)) => rep.detail = why,
        Ok(Outcome::Measured { residual, tolerance, margin, trials, detail }) => {
            rep.trials = trials;
            rep.tolerance = Some(tolerance);
            rep.margin = margin;
            rep.detail = detail;
            if !residual.is_finite() {
                rep.status = if def.expected_fail { Status::Xpass } else { Status::Fail };
                rep.detail = format!("non-finite residual; {}", rep.detail);
            } else {
                rep.residual = Some(residual);
                rep.status = match (def.expected_fail, residual <= tolerance) {
                    (false, true) => Status::Pass,
                    (false, false) => Status::Fail,
                    (true, false) if residual >= margin.unwrap_or(0.0) => Status::Xfail,
                    (true, _) => Status::Xpass,
                };
            }
        }
    }
    rep
}

/// Runs the registered checks of the selected suites. `suites` overrides the
/// scenario's own list when non-empty.
pub fn run(scenario: &Scenario, suites: &[String]) -> Result<Report> {
    let selected: Vec<String> = if suites.is_empty() { scenario.suites() } else { suites.to_vec() };
    let unknown: Vec<String> = selected.iter().filter(|s| !SUITES.contains(&s.as_str())).cloned().collect();
    if !unknown.is_empty() {
        return Err(Error::Scenario(unknown.iter().map(|s| format!("unknown suite {s}; known suites: {}", SUITES.join(", "))).collect()));
    }
    let defs: Vec<&CheckDef> = REGISTRY.iter().filter(|d| selected.iter().any(|s| s == d.suite)).collect();
    let ctx = checks::Ctx::new(scenario);
    let body = || -> Vec<CheckReport> {
        defs.par_iter()
            .map(|d| {
                let mut rng = check_rng(scenario.file.seed, d.name);
                finish(d, (d.run)(&ctx, &mut rng))
            })
            .collect()
    };
    let checks = match workers_from_env() {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Io(e.to_string()))?.install(body),
        None => body(),
    };
    let mut summary = Summary { total: checks.len(), ..Default::default() };
    for c in &checks {
        match c.status {
            Status::Pass => summary.passed += 1,
            Status::Fail => summary.failed += 1,
            Status::Skipped => summary.skipped += 1,
            Status::Xfail => summary.expected_failures += 1,
            Status::Xpass => summary.unexpected_passes += 1,
        }
    }
    let g = &scenario.group;
    Ok(Report {
        environment: Environment {
            scenario: scenario.file.name.clone(),
            backend: g.selector(),
            cutoff: g.cutoff(),
            arithmetic: scenario.file.arithmetic,
            seed: scenario.file.seed,
            trials: scenario.file.trials,
            suites: SUITES.iter().filter(|s| selected.iter().any(|x| x == *s)).map(|s| s.to_string()).collect(),
        },
        checks,
        summary,
    })
}

/// Scenarios shipped with the crate, by file stem.
pub const SHIPPED: [(&str, &str); 4] = [
    ("s3_two_edge", include_str!("../../scenarios/s3_two_edge.json")),
    ("u1", include_str!("../../scenarios/u1.json")),
    ("su2", include_str!("../../scenarios/su2.json")),
    ("q8_double", include_str!("../../scenarios/q8_double.json")),
];

pub fn shipped(name: &str) -> Option<Scenario> {
    SHIPPED.iter().find(|(n, _)| *n == name).and_then(|(_, t)| parse_scenario(t).ok())
}

/// Shipped scenarios the `demo` verb runs, in order.
pub const DEMO_SCENARIOS: [&str; 3] = ["s3_two_edge", "u1", "su2"];

/// Runs every suite of the demo scenarios, optionally with one seed for all.
pub fn demo(seed: Option<u64>) -> Result<Vec<Report>> {
    DEMO_SCENARIOS
        .iter()
        .map(|name| {
            let mut sc = shipped(name).ok_or_else(|| Error::Scenario(vec![format!("shipped scenario {name} does not parse")]))?;
            if let Some(s) = seed {
                sc.file.seed = s;
            }
            run(&sc, &sc.suites())
        })
        .collect()
}

/// JSON array of reports, as `demo --format json` prints it.
pub fn reports_to_json(reports: &[Report]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}
