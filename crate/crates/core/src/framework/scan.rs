use serde::{Deserialize, Serialize};

use super::estimate::{sample_u_paths, StartLaw, UPathSet};
use super::perturbation::Perturbation;
use super::space::ActedSpace;
use super::twist::Twist;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::stats::MeanAcc;

/// Shift `A n^{-gamma}` and slack `A n^{-b} (1 + t^+)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanConfig {
    pub gamma: f64,
    pub b: f64,
    /// Upper end of the search for `A`.
    pub a_max: f64,
    /// Also check `U_m(t) <= U_n(t + shift) + slack` for `n <= m`.
    pub check_converse: bool,
    /// Allowed statistical margin in combined standard errors.
    pub sigmas: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            gamma: 0.25,
            b: 0.25,
            a_max: 1e3,
            check_converse: true,
            sigmas: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanDirection {
    /// `U_n(t) <= U_m(t + shift) + slack`.
    Increasing,
    /// `U_m(t) <= U_n(t + shift) + slack`.
    Converse,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanCell {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub direction: ScanDirection,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub cells: Vec<ScanCell>,
    /// Smallest `A` in `[0, a_max]` for which every cell passes, if any.
    pub fitted_a: Option<f64>,
    /// Increasing-direction failures with zero shift and zero slack.
    pub zero_shift_violations: usize,
    pub gamma: f64,
    pub b: f64,
    pub rejections: u64,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan report serializes")
    }
}

/// Evaluates one cell on shared paths: `lhs = U_a(t)`,
/// `rhs = U_b(t + shift) + slack`, with the standard error of the paired
/// difference.
fn cell(set: &UPathSet, ia: usize, ib: usize, t: f64, shift: f64, slack: f64, sigmas: f64) -> (f64, f64, f64, bool) {
    let mut l = MeanAcc::new();
    let mut r = MeanAcc::new();
    let mut diff = MeanAcc::new();
    for j in 0..set.len() {
        let a = set.value(j, ia, t);
        let b = set.value(j, ib, t + shift);
        l.push(a);
        r.push(b);
        diff.push(a - b);
    }
    let rhs = r.mean + slack;
    let se = diff.stderr();
    let pass = l.mean <= rhs + sigmas * se + 1e-12 * (1.0 + rhs.abs());
    (l.mean, rhs, se, pass)
}

fn cells_at(set: &UPathSet, t_grid: &[f64], cfg: &ScanConfig, a: f64) -> Vec<ScanCell> {
    let mut out = Vec::new();
    let ns = &set.n_list;
    for (i, &n) in ns.iter().enumerate() {
        for (k, &m) in ns.iter().enumerate() {
            if m <= n {
                continue;
            }
            let shift = a * (n as f64).powf(-cfg.gamma);
            for &t in t_grid {
                let slack = a * (n as f64).powf(-cfg.b) * (1.0 + t.max(0.0));
                let mut push = |direction, ia, ib| {
                    let (lhs, rhs, stderr, pass) = cell(set, ia, ib, t, shift, slack, cfg.sigmas);
                    out.push(ScanCell {
                        n,
                        m,
                        t,
                        direction,
                        lhs,
                        rhs,
                        stderr,
                        pass,
                    });
                };
                push(ScanDirection::Increasing, i, k);
                if cfg.check_converse {
                    push(ScanDirection::Converse, k, i);
                }
            }
        }
    }
    out
}

/// Checks the two-sided comparison of `U_n` and `U_m` for `n < m` in
/// `n_list` on a common set of paths and fits the smallest constant `A`
/// making every cell pass. Diagnostic: no pass/fail is asserted here.
#[allow(clippy::too_many_arguments)]
pub fn quasi_monotonicity_scan<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    theta: &dyn Twist,
    start: &StartLaw<S::Point>,
    t_grid: &[f64],
    n_list: &[usize],
    paths: usize,
    cfg: ScanConfig,
    seed: u64,
) -> Result<ScanReport> {
    if n_list.len() < 2 || t_grid.is_empty() {
        return Err(Error::InvalidArgument("scan needs two horizons and a t grid".into()));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let set = sample_u_paths(space, ens, f, theta, start, &ns, 0, paths, seed)?;
    let zero_cfg = ScanConfig {
        check_converse: false,
        ..cfg
    };
    let zero_shift_violations = cells_at(&set, t_grid, &zero_cfg, 0.0)
        .iter()
        .filter(|c| !c.pass)
        .count();
    let passes = |a: f64| cells_at(&set, t_grid, &cfg, a).iter().all(|c| c.pass);
    let fitted_a = if passes(0.0) {
        Some(0.0)
    } else if !passes(cfg.a_max) {
        None
    } else {
        let (mut lo, mut hi) = (0.0, cfg.a_max);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if passes(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-6 * hi.max(1e-6) {
                break;
            }
        }
        Some(hi)
    };
    let cells = cells_at(&set, t_grid, &cfg, fitted_a.unwrap_or(cfg.a_max));
    Ok(ScanReport {
        cells,
        fitted_a,
        zero_shift_violations,
        gamma: cfg.gamma,
        b: cfg.b,
        rejections: set.rejections,
    })
}
