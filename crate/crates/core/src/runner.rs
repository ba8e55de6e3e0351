//! Config-driven runs. Each estimator run writes `<estimator>.json` (a
//! [`Summary`]) and, when it produces a table, `<estimator>.csv` into the
//! output directory. [`emit_report`] reads a run directory back.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::ensemble::{CenterConfig, Ensemble};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, with_workers};
use crate::framework::{
    estimate_u, martingale_residual, quasi_monotonicity_scan, BoundaryDelta, DualReversedSpace, LetterLogNorm,
    MartingaleBlock, Perturbation, PrimalSpace, ReversalDelta, ScanConfig, ScanDirection, StartLaw, UnitTwist, Zero,
};
use crate::harmonic::{estimate_v, estimate_variance, survival_curve, v_profile};
use crate::oracle::{exact_rho_action, exact_v};
use crate::projective::ProjPoint;
use crate::stats::{within_sigma, WeightedEstimate};
use crate::target::{
    cllt_ratio, density_w, estimate_rho_action, harmonicity_residual, local_limit_normalizers, negative_tail_report,
    reversal_residual, translation_profile,
};
use crate::testfn::{PiecewiseLinear, TestFunction};

pub const SCHEMA_VERSION: &str = "1.0";

/// Estimators run by the `suite` command, in order.
pub const SUITE: &[&str] = &[
    "lyapunov",
    "harmonic",
    "variance",
    "survival",
    "rho",
    "density",
    "harmonicity",
    "reversal",
    "translation",
    "tail",
    "cllt",
    "perturbed",
    "chain",
    "scan",
    "oracle",
];

/// Ordered by severity; the exit code of a batch is that of its worst run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Pass,
    Diagnostic,
    Warning,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok | Status::Pass | Status::Diagnostic => 0,
            Status::Warning => 2,
            Status::Fail | Status::Error => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Pass => "pass",
            Status::Diagnostic => "diagnostic",
            Status::Warning => "warning",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: String,
    pub estimator: String,
    /// The statement the number bears on, in words.
    pub statement: String,
    pub inputs: Value,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub n_samples: u64,
    pub seed: u64,
    pub wall_time: f64,
    pub status: Status,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub details: Value,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Rows of pre-formatted cells under a header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(&self.header).map_err(|e| Error::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cell(v: f64) -> String {
    format!("{v}")
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub table: Option<Table>,
    pub json_path: PathBuf,
    pub csv_path: Option<PathBuf>,
}

/// Worst exit code over a batch of runs.
pub fn exit_code(outcomes: &[RunOutcome]) -> i32 {
    outcomes
        .iter()
        .map(|o| o.summary.status)
        .max()
        .map_or(0, Status::exit_code)
}

pub fn statement(estimator: &str) -> &'static str {
    match estimator {
        "lyapunov" => "top Lyapunov exponent of the product",
        "center" => "scaling that makes the norm cocycle centered",
        "harmonic" => "V_n(x, t) = E(t + S_n; tau > n) increases to a positive harmonic function",
        "variance" => "asymptotic variance of the norm cocycle",
        "survival" => "P(tau > n) decays polynomially",
        "rho" => "rho_{n,x}(h) converges to a Radon measure independent of x",
        "density" => "the t-marginal of rho has a non-decreasing density W",
        "harmonicity" => "rho_{n+1}(h) = rho_n(Rh): the limit measure is harmonic",
        "reversal" => "forward and reversed killed walks have the same expectations",
        "translation" => "rho(h(., . - t)) / t tends to the integral of h against nu x Lebesgue",
        "tail" => "rho gives positive, exponentially small mass to negative t",
        "cllt" => "n^{3/2} P(t + S_n in ., tau > n - 1) tends to 2 V rho / (sqrt(2 pi) upsilon^3)",
        "perturbed" => "killed sums of a perturbed walk",
        "chain" => "the cocycle increments are martingale differences on the extended chain",
        "scan" => "quasi-monotonicity of perturbed harmonic functions in n",
        "oracle" => "Monte Carlo V_n agrees with exact enumeration",
        _ => "",
    }
}

struct Computed {
    value: Option<f64>,
    stderr: Option<f64>,
    n_samples: u64,
    status: Status,
    warnings: Vec<String>,
    details: Value,
    table: Option<Table>,
}

impl Computed {
    fn of(e: &WeightedEstimate) -> Self {
        Self {
            value: finite(e.value),
            stderr: finite(e.stderr),
            n_samples: e.n_samples,
            status: Status::Ok,
            warnings: Vec::new(),
            details: Value::Null,
            table: None,
        }
    }

    fn plain(value: Option<f64>, n_samples: u64) -> Self {
        Self {
            value: value.and_then(finite),
            stderr: None,
            n_samples,
            status: Status::Ok,
            warnings: Vec::new(),
            details: Value::Null,
            table: None,
        }
    }

    fn with_status(mut self, s: Status) -> Self {
        self.status = s;
        self
    }

    fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    fn with_details(mut self, d: Value) -> Self {
        self.details = d;
        self
    }

    fn with_warnings(mut self, w: Vec<String>) -> Self {
        if !w.is_empty() && self.status < Status::Warning {
            self.status = Status::Warning;
        }
        self.warnings.extend(w);
        self
    }
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

/// Runs the configured estimator (every estimator in [`SUITE`] for
/// `suite`), writing summaries into `cfg.output.dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    let name = cfg
        .estimator
        .clone()
        .ok_or_else(|| config_error("estimator", "no estimator selected"))?;
    std::fs::create_dir_all(&cfg.output.dir)?;
    if name != "suite" {
        return Ok(vec![run_one(cfg, &name)?]);
    }
    let discrete = Ensemble::new(cfg.ensemble.clone())?.atoms().is_some();
    SUITE
        .iter()
        .filter(|e| **e != "oracle" || discrete)
        .map(|e| run_one(cfg, e))
        .collect()
}

fn run_one(cfg: &ExperimentConfig, name: &str) -> Result<RunOutcome> {
    let start = Instant::now();
    let result = with_workers(cfg.workers, || dispatch(cfg, name));
    let wall_time = start.elapsed().as_secs_f64();
    let (computed, error) = match result {
        Ok(c) => (c, None),
        Err(e) => {
            log::error!("{name}: {e}");
            (Computed::plain(None, 0).with_status(Status::Error), Some(e.to_string()))
        }
    };
    let summary = Summary {
        schema_version: SCHEMA_VERSION.into(),
        estimator: name.into(),
        statement: statement(name).into(),
        inputs: json!({
            "ensemble": cfg.ensemble,
            "walk": cfg.walk,
            "test_function": cfg.test_function,
            "params": cfg.params,
        }),
        value: computed.value,
        stderr: computed.stderr,
        n_samples: computed.n_samples,
        seed: cfg.seed,
        wall_time,
        status: computed.status,
        warnings: computed.warnings,
        error,
        details: computed.details,
    };
    let json_path = write_summary(&cfg.output.dir, name, &summary)?;
    let csv_path = match &computed.table {
        Some(t) => {
            let p = cfg.output.dir.join(format!("{name}.csv"));
            t.write_csv(&p)?;
            Some(p)
        }
        None => None,
    };
    Ok(RunOutcome {
        summary,
        table: computed.table,
        json_path,
        csv_path,
    })
}

pub fn write_summary(dir: &Path, stem: &str, summary: &Summary) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.json"));
    std::fs::write(&path, summary.to_json() + "\n")?;
    Ok(path)
}

fn ensemble(cfg: &ExperimentConfig) -> Result<Ensemble> {
    let ens = Ensemble::new(cfg.ensemble.clone())?;
    if cfg.param_bool("center", false)? {
        center(cfg, &ens)
    } else {
        Ok(ens)
    }
}

fn center(cfg: &ExperimentConfig, ens: &Ensemble) -> Result<Ensemble> {
    if let Some(exact) = ens.centered_exact() {
        return exact;
    }
    let cc = CenterConfig {
        steps: cfg.walk.steps,
        replicas: cfg.param_usize("replicas", CenterConfig::default().replicas)?,
        max_rounds: cfg.param_usize("rounds", CenterConfig::default().max_rounds)?,
        seed: derive_seed(cfg.seed, 1),
    };
    ens.center(cfg.param_f64("tolerance", 1e-3)?, cc)
}

fn start_point(cfg: &ExperimentConfig) -> Result<ProjPoint> {
    match &cfg.walk.x {
        Some(x) => ProjPoint::from_slice(x),
        None => ProjPoint::from_slice(&vec![1.0; cfg.ensemble.dim]),
    }
}

fn test_function(cfg: &ExperimentConfig) -> TestFunction {
    cfg.test_function
        .clone()
        .unwrap_or_else(|| TestFunction::of_t(PiecewiseLinear::hat(0.0, 1.0, 2.0)))
}

fn n_list(cfg: &ExperimentConfig, default: Vec<usize>) -> Vec<usize> {
    cfg.walk.n_list.clone().unwrap_or(default)
}

fn t_list(cfg: &ExperimentConfig, default: Vec<f64>) -> Vec<f64> {
    cfg.walk.t_list.clone().unwrap_or(default)
}

fn perturbation(cfg: &ExperimentConfig, horizon: usize) -> Result<Box<dyn Perturbation<Vec<f64>>>> {
    let kind = cfg.param_str("perturbation")?.unwrap_or_else(|| "zero".into());
    let x = start_point(cfg)?.coords().to_vec();
    Ok(match kind.as_str() {
        "zero" => Box::new(Zero),
        "letter_log_norm" => Box::new(LetterLogNorm {
            index: cfg.param_usize("index", 1)?,
        }),
        "boundary_delta" => Box::new(BoundaryDelta {
            x0: x,
            depth: cfg.param_usize("lookahead", 2)?,
        }),
        "reversal_delta" => Box::new(ReversalDelta {
            x,
            horizon: cfg.param_usize("horizon", horizon)?,
        }),
        other => {
            return Err(config_error(
                "params.perturbation",
                format!("unknown perturbation '{other}'"),
            ))
        }
    })
}

fn start_law(cfg: &ExperimentConfig) -> Result<StartLaw<Vec<f64>>> {
    match cfg.param_str("start")?.as_deref() {
        None | Some("stationary") => Ok(StartLaw::Stationary { depth: cfg.walk.depth }),
        Some("fixed") => Ok(StartLaw::Fixed(start_point(cfg)?.coords().to_vec())),
        Some(other) => Err(config_error("params.start", format!("unknown start law '{other}'"))),
    }
}

/// Runs `$body` with `$space` bound to the configured acted space.
macro_rules! with_space {
    ($cfg:expr, $space:ident => $body:expr) => {{
        let dim = $cfg.ensemble.dim;
        match $cfg.param_str("space")?.as_deref() {
            None | Some("primal") => {
                let $space = PrimalSpace { dim };
                $body
            }
            Some("dual") => {
                let $space = DualReversedSpace { dim };
                $body
            }
            Some(other) => Err(config_error("params.space", format!("unknown space '{other}'"))),
        }
    }};
}

fn dispatch(cfg: &ExperimentConfig, name: &str) -> Result<Computed> {
    let seed = cfg.seed;
    let w = &cfg.walk;
    match name {
        "lyapunov" => {
            let ens = ensemble(cfg)?;
            let est = ens.estimate_lyapunov(w.steps, cfg.param_usize("replicas", 32)?, seed);
            let prox = ens.proximality_diagnostic(w.depth, cfg.param_usize("samples", 200)?, derive_seed(seed, 1));
            let mut c = Computed::plain(Some(est.lambda_hat), (est.steps * est.replicas) as u64);
            c.stderr = finite(est.stderr);
            Ok(c.with_details(json!({
                "exact": ens.exact_lyapunov(),
                "gap_rate": prox.gap_rate,
                "gap_rate_stderr": prox.gap_rate_stderr,
            }))
            .with_warnings(prox.warnings))
        }
        "center" => {
            let ens = Ensemble::new(cfg.ensemble.clone())?;
            let centered = center(cfg, &ens)?;
            let lyap = centered
                .exact_lyapunov()
                .unwrap_or_else(|| centered.estimate_lyapunov(w.steps, 32, derive_seed(seed, 2)).lambda_hat);
            Ok(Computed::plain(Some(centered.scale()), 0).with_details(json!({
                "scale": centered.scale(),
                "lyapunov_after": lyap,
                "ensemble": centered.spec(),
            })))
        }
        "harmonic" => {
            let ens = ensemble(cfg)?;
            let x = start_point(cfg)?;
            if w.n_list.is_none() && w.t_list.is_none() {
                return Ok(Computed::of(&estimate_v(
                    &ens,
                    &x,
                    w.t,
                    w.n,
                    w.paths,
                    w.direction,
                    seed,
                )?));
            }
            let rows = v_profile(
                &ens,
                &x,
                &t_list(cfg, vec![w.t]),
                &n_list(cfg, vec![w.n]),
                w.paths,
                w.direction,
                seed,
            )?;
            let mut t = Table::new(&["n", "t", "value", "stderr"]);
            for r in &rows {
                t.push(vec![
                    r.n.to_string(),
                    cell(r.t),
                    cell(r.estimate.value),
                    cell(r.estimate.stderr),
                ]);
            }
            Ok(Computed::plain(None, w.paths as u64).with_table(t))
        }
        "variance" => {
            let ens = ensemble(cfg)?;
            let v = estimate_variance(&ens, &start_point(cfg)?, w.n, w.paths, seed)?;
            let mut c = Computed::plain(Some(v.upsilon_sq), v.n_used as u64);
            c.stderr = finite(v.stderr);
            Ok(c.with_warnings(v.warning.into_iter().collect()))
        }
        "survival" => {
            let ens = ensemble(cfg)?;
            let curve = survival_curve(&ens, &start_point(cfg)?, w.t, &n_list(cfg, vec![w.n]), w.paths, seed)?;
            let mut t = Table::new(&["n", "survival", "stderr"]);
            for r in &curve.rows {
                t.push(vec![r.n.to_string(), cell(r.survival), cell(r.stderr)]);
            }
            let mut c = Computed::plain(curve.log_log_fit.map(|f| f.slope), w.paths as u64);
            c.stderr = curve.log_log_fit.and_then(|f| finite(f.slope_stderr));
            Ok(c.with_table(t))
        }
        "rho" => {
            let ens = ensemble(cfg)?;
            let e = estimate_rho_action(
                &ens,
                &start_point(cfg)?,
                w.n,
                w.paths,
                &test_function(cfg),
                w.direction,
                seed,
            )?;
            Ok(Computed::of(&e))
        }
        "density" => {
            let ens = ensemble(cfg)?;
            let lo = cfg.param_f64("u_lo", -10.0)?;
            let hi = cfg.param_f64("u_hi", 40.0)?;
            let points = cfg.param_usize("u_points", 101)?.max(2);
            let grid: Vec<f64> = (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .collect();
            let rows = density_w(&ens, &start_point(cfg)?, w.n, w.paths, &grid, w.direction, seed)?;
            let mut t = Table::new(&["u", "w", "stderr"]);
            for r in &rows {
                t.push(vec![cell(r.u), cell(r.w), cell(r.stderr)]);
            }
            Ok(Computed::plain(None, w.paths as u64).with_table(t))
        }
        "harmonicity" => {
            let ens = ensemble(cfg)?;
            let rep = harmonicity_residual(
                &ens,
                &start_point(cfg)?,
                w.n,
                w.paths,
                &test_function(cfg),
                cfg.param_usize("inner_draws", 4)?,
                seed,
            )?;
            let pass = within_sigma(rep.residual.value, rep.residual.stderr, 3.0);
            Ok(Computed::of(&rep.residual)
                .with_status(if pass { Status::Pass } else { Status::Fail })
                .with_details(json!({ "rho_next": rep.rho_next, "rho_of_rh": rep.rho_of_rh })))
        }
        "reversal" => {
            let ens = ensemble(cfg)?;
            let rep = reversal_residual(
                &ens,
                &start_point(cfg)?,
                w.n,
                w.paths,
                cfg.param_usize("y_count", 16)?,
                &test_function(cfg),
                w.depth,
                seed,
            )?;
            let mut t = Table::new(&["y_index", "rhs", "residual", "stderr"]);
            for (i, p) in rep.per_y.iter().enumerate() {
                t.push(vec![
                    i.to_string(),
                    cell(p.rhs.value),
                    cell(p.residual.value),
                    cell(p.residual.stderr),
                ]);
            }
            let pass = within_sigma(rep.residual.value, rep.residual.stderr, 3.0);
            Ok(Computed::of(&rep.residual)
                .with_status(if pass { Status::Pass } else { Status::Fail })
                .with_table(t)
                .with_details(json!({ "lhs": rep.lhs, "rhs": rep.rhs, "rejections": rep.rejections })))
        }
        "translation" => {
            let ens = ensemble(cfg)?;
            let rows = translation_profile(
                &ens,
                &start_point(cfg)?,
                w.n,
                w.paths,
                &test_function(cfg),
                &t_list(cfg, vec![10.0, 25.0, 50.0]),
                cfg.param_usize("nu_samples", 10_000)?,
                seed,
            )?;
            let mut t = Table::new(&["t", "ratio", "stderr", "prediction", "relative_deviation"]);
            for r in &rows {
                t.push(vec![
                    cell(r.t),
                    cell(r.ratio.value),
                    cell(r.ratio.stderr),
                    cell(r.prediction.value),
                    cell(r.relative_deviation),
                ]);
            }
            Ok(
                Computed::plain(rows.last().map(|r| r.relative_deviation), w.paths as u64)
                    .with_status(Status::Diagnostic)
                    .with_table(t),
            )
        }
        "tail" => {
            let ens = ensemble(cfg)?;
            let rep = negative_tail_report(
                &ens,
                &start_point(cfg)?,
                w.n,
                w.paths,
                cfg.param_f64("lo", -20.0)?,
                cfg.param_usize("grid_points", 200)?,
                seed,
            )?;
            Ok(Computed::of(&rep.mass).with_details(json!({
                "mass_positive": rep.mass_positive,
                "rate": rep.log_fit.map(|f| f.slope),
                "rate_stderr": rep.log_fit.map(|f| f.slope_stderr),
            })))
        }
        "cllt" => {
            let ens = ensemble(cfg)?;
            let x = start_point(cfg)?;
            let h = test_function(cfg);
            let ns = n_list(cfg, vec![w.n, 4 * w.n]);
            let n_max = ns.iter().copied().max().unwrap_or(w.n);
            let norm = local_limit_normalizers(
                &ens,
                &x,
                w.t,
                &h,
                cfg.param_usize("n_ref", 16 * n_max)?,
                cfg.param_usize("norm_paths", w.paths)?,
                derive_seed(seed, 1),
            )?;
            let rep = cllt_ratio(&ens, &x, w.t, &ns, w.paths, &h, &norm, seed)?;
            let mut t = Table::new(&["n", "scaled", "stderr", "ratio", "ratio_stderr"]);
            for r in &rep.rows {
                t.push(vec![
                    r.n.to_string(),
                    cell(r.scaled.value),
                    cell(r.scaled.stderr),
                    cell(r.ratio),
                    cell(r.ratio_stderr),
                ]);
            }
            let closer: Vec<Value> = rep
                .closer_at_four_n()
                .iter()
                .map(|&(n, c)| json!({ "n": n, "closer_at_4n": c }))
                .collect();
            let mut c = Computed::plain(rep.stabilization.map(|f| f.intercept), w.paths as u64)
                .with_status(Status::Diagnostic)
                .with_table(t)
                .with_details(json!({ "trend": closer, "normalizers": norm }));
            c.stderr = None;
            Ok(c.with_warnings(rep.warnings))
        }
        "perturbed" => {
            let ens = ensemble(cfg)?;
            let f = perturbation(cfg, w.n)?;
            let start = start_law(cfg)?;
            let u = with_space!(cfg, space => estimate_u(&space, &ens, f.as_ref(), &UnitTwist, &start, w.t, w.n, w.paths, seed))?;
            Ok(Computed::of(&u.estimate)
                .with_details(json!({ "rejections": u.rejections, "perturbation": f.describe() })))
        }
        "chain" => {
            let ens = ensemble(cfg)?;
            let start = start_law(cfg)?;
            let p = cfg.param_usize("p", 2)?;
            let rows = with_space!(cfg, space => martingale_residual(&space, &ens, p, w.n, w.paths, &start, seed))?;
            let mut t = Table::new(&["k", "block", "mean", "stderr", "samples"]);
            let mut max_z: f64 = 0.0;
            for r in &rows {
                let block = match r.block {
                    MartingaleBlock::All => "all",
                    MartingaleBlock::NonNegative => "non_negative",
                    MartingaleBlock::Negative => "negative",
                };
                t.push(vec![
                    r.k.to_string(),
                    block.into(),
                    cell(r.mean.value),
                    cell(r.mean.stderr),
                    r.mean.n_samples.to_string(),
                ]);
                if r.mean.n_samples > 100 && r.mean.stderr > 0.0 {
                    max_z = max_z.max(r.mean.value.abs() / r.mean.stderr);
                }
            }
            let pass = rows
                .iter()
                .filter(|r| r.mean.n_samples > 100)
                .all(|r| within_sigma(r.mean.value, r.mean.stderr, 3.0));
            Ok(Computed::plain(Some(max_z), w.paths as u64)
                .with_status(if pass { Status::Pass } else { Status::Fail })
                .with_table(t))
        }
        "scan" => {
            let ens = ensemble(cfg)?;
            let f = perturbation(cfg, n_list(cfg, vec![8, 16, 32]).into_iter().max().unwrap_or(w.n))?;
            let start = start_law(cfg)?;
            let d = ScanConfig::default();
            let sc = ScanConfig {
                gamma: cfg.param_f64("gamma", d.gamma)?,
                b: cfg.param_f64("b", d.b)?,
                a_max: cfg.param_f64("a_max", d.a_max)?,
                check_converse: cfg.param_bool("check_converse", d.check_converse)?,
                sigmas: cfg.param_f64("sigmas", d.sigmas)?,
            };
            let ns = n_list(cfg, vec![8, 16, 32]);
            let ts = t_list(cfg, vec![0.0, 0.5, 1.0, 2.0]);
            let rep = with_space!(cfg, space => quasi_monotonicity_scan(&space, &ens, f.as_ref(), &UnitTwist, &start, &ts, &ns, w.paths, sc, seed))?;
            let mut t = Table::new(&["n", "m", "t", "direction", "lhs", "rhs", "stderr", "pass"]);
            for c in &rep.cells {
                let dir = match c.direction {
                    ScanDirection::Increasing => "increasing",
                    ScanDirection::Converse => "converse",
                };
                t.push(vec![
                    c.n.to_string(),
                    c.m.to_string(),
                    cell(c.t),
                    dir.into(),
                    cell(c.lhs),
                    cell(c.rhs),
                    cell(c.stderr),
                    c.pass.to_string(),
                ]);
            }
            Ok(Computed::plain(rep.fitted_a, w.paths as u64)
                .with_status(if rep.fitted_a.is_some() {
                    Status::Pass
                } else {
                    Status::Fail
                })
                .with_table(t)
                .with_details(json!({
                    "zero_shift_violations": rep.zero_shift_violations,
                    "gamma": rep.gamma,
                    "b": rep.b,
                    "rejections": rep.rejections,
                })))
        }
        "oracle" => {
            let ens = ensemble(cfg)?;
            let x = start_point(cfg)?;
            let exact = exact_v(&ens, &x, w.t, w.n)?;
            let rho = exact_rho_action(&ens, &x, w.n, &test_function(cfg))?;
            let mc = estimate_v(&ens, &x, w.t, w.n, w.paths, w.direction, seed)?;
            let pass = mc.within(exact, 4.0);
            Ok(Computed::plain(Some(exact), w.paths as u64)
                .with_status(if pass { Status::Pass } else { Status::Fail })
                .with_details(json!({ "exact_rho": rho, "monte_carlo": mc })))
        }
        other => Err(config_error("estimator", format!("unknown estimator '{other}'"))),
    }
}

/// Summaries found in a run directory, sorted by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<Summary>,
}

impl Report {
    pub fn worst(&self) -> Status {
        self.rows.iter().map(|r| r.status).max().unwrap_or(Status::Ok)
    }

    /// One line per summary: statement, check, status, numbers.
    pub fn render(&self) -> String {
        let numbers: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let mut s = match (r.value, r.stderr) {
                    (Some(v), Some(e)) => format!("{v:.6} +- {e:.2e}"),
                    (Some(v), None) => format!("{v:.6}"),
                    _ => "-".into(),
                };
                if let Some(e) = &r.error {
                    s = format!("error: {e}");
                } else if !r.warnings.is_empty() {
                    let _ = write!(s, " [{}]", r.warnings.join("; "));
                }
                s
            })
            .collect();
        let w_stmt = self.rows.iter().map(|r| r.statement.len()).max().unwrap_or(0).max(9);
        let w_check = self.rows.iter().map(|r| r.estimator.len()).max().unwrap_or(0).max(5);
        let mut out = format!(
            "{:<w_stmt$}  {:<w_check$}  {:<10}  numbers\n",
            "statement", "check", "status"
        );
        for (r, n) in self.rows.iter().zip(&numbers) {
            let _ = writeln!(
                out,
                "{:<w_stmt$}  {:<w_check$}  {:<10}  {n}",
                r.statement,
                r.estimator,
                r.status.as_str()
            );
        }
        out
    }
}

pub fn parse_summary(text: &str) -> Result<Summary> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Io(format!("invalid summary: {e}")))?;
    let version = v
        .get("schema_version")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::SchemaVersion("missing".into()))?;
    let major = SCHEMA_VERSION.split('.').next();
    if version.split('.').next() != major {
        return Err(Error::SchemaVersion(version.into()));
    }
    serde_json::from_value(v).map_err(|e| Error::Io(format!("invalid summary: {e}")))
}

/// Reads every `*.json` summary in `dir`.
pub fn emit_report(dir: &Path) -> Result<Report> {
    let mut paths: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(_) => Vec::new(),
    };
    if paths.is_empty() {
        return Err(Error::MissingRun(dir.display().to_string()));
    }
    paths.sort();
    let rows = paths
        .iter()
        .map(|p| parse_summary(&std::fs::read_to_string(p)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report { rows })
}
