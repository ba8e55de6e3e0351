//! Trajectories of the norm cocycle, the reversed walks built from the dual
//! action, and exit times.

use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::exec::Rng;
use crate::projective::{delta_raw, DualProjPoint, GroupElement, ProjPoint};

/// Sign convention of the walk: `plus` uses `t + S_k`, `minus` uses `t - S_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

/// First index at which the walk leaves the half-line, or `Censored(n)`
/// when it stays inside for the whole record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitTime {
    At(usize),
    Censored(usize),
}

impl ExitTime {
    /// The event `{tau > n}`.
    pub fn exceeds(self, n: usize) -> bool {
        match self {
            ExitTime::At(k) => k > n,
            ExitTime::Censored(len) => {
                assert!(n <= len, "horizon {n} beyond censoring level {len}");
                true
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathRecord {
    pub x0: ProjPoint,
    pub increments: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `min(S_1, ..., S_{n-1})`; `+inf` when `n = 1`.
    pub running_min_prefix: f64,
    pub terminal_point: ProjPoint,
    pub elements: Option<Vec<GroupElement>>,
}

impl PathRecord {
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn s_n(&self) -> f64 {
        *self.partial_sums.last().unwrap_or(&0.0)
    }
}

/// Forward walk `S_k = sigma(g_k ... g_1, x)`, renormalizing every step.
pub fn simulate_path(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    keep_elements: bool,
    rng: &mut Rng,
) -> Result<PathRecord> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let d = ensemble.dim();
    if x.dim() != d {
        return Err(Error::DimensionError {
            expected: d,
            got: x.dim(),
        });
    }
    let mut u = x.coords().to_vec();
    let mut scratch = vec![0.0; d];
    let mut increments = Vec::with_capacity(n);
    let mut partial_sums = Vec::with_capacity(n);
    let mut elements = keep_elements.then(|| Vec::with_capacity(n));
    let mut s = 0.0;
    for _ in 0..n {
        let g = ensemble.draw(rng);
        let inc = g.step_primal(&mut u, &mut scratch);
        s += inc;
        increments.push(inc);
        partial_sums.push(s);
        if let Some(e) = elements.as_mut() {
            e.push(g);
        }
    }
    let running_min_prefix = partial_sums[..n - 1].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PathRecord {
        x0: x.clone(),
        increments,
        partial_sums,
        running_min_prefix,
        terminal_point: ProjPoint::new(u)?,
        elements,
    })
}

/// `min{k >= 1 : t + S_k < 0}` in the plus direction, `t - S_k` in the minus
/// direction.
pub fn exit_time(path: &PathRecord, t: f64, direction: Direction) -> ExitTime {
    exit_time_of(&path.partial_sums, t, direction.sign())
}

fn exit_time_of(values: &[f64], t: f64, sign: f64) -> ExitTime {
    values
        .iter()
        .position(|s| t + sign * s < 0.0)
        .map_or(ExitTime::Censored(values.len()), |k| ExitTime::At(k + 1))
}

/// `min{k : t + values_k < 0}`, censored at `values.len()`.
pub fn perturbed_exit_time(values: &[f64], t: f64) -> ExitTime {
    exit_time_of(values, t, 1.0)
}

#[derive(Debug, Clone)]
pub struct ReversedRecord {
    pub y: DualProjPoint,
    pub m: usize,
    pub values: Vec<f64>,
    /// `max_k(-values_k)`: the event `{t + values_k >= 0 for all k}` is
    /// `{t >= threshold}`.
    pub threshold: f64,
    /// `g_1 ... g_m x`.
    pub terminal_point: ProjPoint,
}

/// Reversed walk of the path's letters seen from the covector `y`.
///
/// With suffix points `z_k = g_{k+1} ... g_m x` and the dual walk
/// `y_k = g_k^T ... g_1^T y` (normalized), the values are
/// `-sigma*(g_k^{-1} ... g_1^{-1}, y) + delta(z_k, y_k) - delta(z_0, y)`.
pub fn reversed_walk_values(path: &PathRecord, y: &DualProjPoint) -> Result<ReversedRecord> {
    let elements = path.elements.as_ref().ok_or(Error::MissingElements)?;
    reversed_from_letters(elements, &path.x0, y)
}

pub fn reversed_from_letters(letters: &[GroupElement], x: &ProjPoint, y: &DualProjPoint) -> Result<ReversedRecord> {
    let m = letters.len();
    let d = x.dim();
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one letter".into()));
    }
    if y.dim() != d {
        return Err(Error::DimensionError {
            expected: d,
            got: y.dim(),
        });
    }
    // suffix[k] = z_k, for k = 0..=m
    let mut suffix = vec![vec![0.0; d]; m + 1];
    suffix[m].copy_from_slice(x.coords());
    let mut scratch = vec![0.0; d];
    for k in (0..m).rev() {
        let mut u = suffix[k + 1].clone();
        letters[k].step_primal(&mut u, &mut scratch);
        suffix[k] = u;
    }
    let delta0 = delta_raw(&suffix[0], y.coords());
    if !delta0.is_finite() {
        return Err(Error::InfiniteDelta("terminal point orthogonal to y".into()));
    }
    let mut phi = y.coords().to_vec();
    let mut dual_sum = 0.0;
    let mut values = Vec::with_capacity(m);
    for k in 1..=m {
        dual_sum += letters[k - 1].step_dual_inverse(&mut phi, &mut scratch);
        let dk = delta_raw(&suffix[k], &phi);
        if !dk.is_finite() {
            return Err(Error::InfiniteDelta(format!("pairing underflow at step {k}")));
        }
        values.push(-dual_sum + dk - delta0);
    }
    let threshold = values.iter().fold(f64::NEG_INFINITY, |a, v| a.max(-v));
    Ok(ReversedRecord {
        y: y.clone(),
        m,
        values,
        threshold,
        terminal_point: ProjPoint::new(suffix.swap_remove(0))?,
    })
}

#[derive(Debug, Clone)]
pub struct IdealPerturbedPath {
    pub values: Vec<f64>,
    /// Truncation depth `L` of the boundary point.
    pub depth: usize,
    /// `f` at time 0.
    pub f0: f64,
}

/// The ideal perturbed walk from `y`: `-sigma*(g_k^{-1} ... g_1^{-1}, y)`
/// plus `f(T^k) - f` with `f = delta(xi, y)` and the boundary point
/// `xi(T^k w)` truncated to `g_{k+1} ... g_{k+L} x0`.
pub fn ideal_perturbed_path(
    ensemble: &Ensemble,
    y: &DualProjPoint,
    n: usize,
    boundary_depth: usize,
    rng: &mut Rng,
) -> Result<IdealPerturbedPath> {
    let letters: Vec<GroupElement> = (0..n + boundary_depth).map(|_| ensemble.draw(rng)).collect();
    ideal_perturbed_from_letters(&letters, y, n, boundary_depth, &ProjPoint::diagonal(ensemble.dim()))
}

pub fn ideal_perturbed_from_letters(
    letters: &[GroupElement],
    y: &DualProjPoint,
    n: usize,
    depth: usize,
    x0: &ProjPoint,
) -> Result<IdealPerturbedPath> {
    if depth == 0 {
        return Err(Error::InvalidArgument("boundary depth must be >= 1".into()));
    }
    if letters.len() < n + depth {
        return Err(Error::InvalidArgument(format!(
            "need {} letters, got {}",
            n + depth,
            letters.len()
        )));
    }
    let d = y.dim();
    let mut scratch = vec![0.0; d];
    let xi = |k: usize| crate::ensemble::apply_product(&letters[k..k + depth], x0.coords());
    let f0 = delta_raw(&xi(0), y.coords());
    if !f0.is_finite() {
        return Err(Error::InfiniteDelta("boundary point orthogonal to y".into()));
    }
    let mut phi = y.coords().to_vec();
    let mut dual_sum = 0.0;
    let mut values = Vec::with_capacity(n);
    for k in 1..=n {
        dual_sum += letters[k - 1].step_dual_inverse(&mut phi, &mut scratch);
        let fk = delta_raw(&xi(k), &phi);
        if !fk.is_finite() {
            return Err(Error::InfiniteDelta(format!("pairing underflow at step {k}")));
        }
        values.push(-dual_sum + fk - f0);
    }
    Ok(IdealPerturbedPath { values, depth, f0 })
}

/// Compact per-path data used by the estimators: `S_n`, the running minima
/// and the terminal direction, for one sign convention.
#[derive(Debug, Clone)]
pub(crate) struct WalkSummary {
    pub s_n: f64,
    /// `min(S_1..S_{n-1})` (`+inf` for `n = 1`).
    pub min_prefix: f64,
    pub terminal: Vec<f64>,
}

/// Runs `n` steps in place from the unit vector `u`; `sign` flips the
/// increments. Allocation-free apart from the caller's buffers.
pub(crate) fn run_walk(
    ensemble: &Ensemble,
    u: &mut [f64],
    scratch: &mut [f64],
    n: usize,
    sign: f64,
    rng: &mut Rng,
) -> (f64, f64) {
    let mut s = 0.0;
    let mut min_prefix = f64::INFINITY;
    for k in 0..n {
        if k > 0 {
            min_prefix = min_prefix.min(s);
        }
        s += sign * ensemble.draw(rng).step_primal(u, scratch);
    }
    (s, min_prefix)
}

pub(crate) fn walk_summary(ensemble: &Ensemble, x: &ProjPoint, n: usize, sign: f64, rng: &mut Rng) -> WalkSummary {
    let mut u = x.coords().to_vec();
    let mut scratch = vec![0.0; u.len()];
    let (s_n, min_prefix) = run_walk(ensemble, &mut u, &mut scratch, n, sign, rng);
    WalkSummary {
        s_n,
        min_prefix,
        terminal: u,
    }
}
