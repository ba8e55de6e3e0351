//! Monte Carlo estimates of `V_n(x, t) = E(t + S_n; tau_{x,t} > n)`, the
//! asymptotic variance and survival probabilities of the killed walk.

use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::exec;
use crate::projective::ProjPoint;
use crate::stats::{linear_fit, LinearFit, MeanAcc, WeightedEstimate};
use crate::walk::Direction;

/// Variance estimates below this are reported as degenerate.
pub const DEGENERATE_VARIANCE: f64 = 1e-8;

pub(crate) fn check_budget(n: usize, paths: usize, min_paths: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if paths < min_paths {
        return Err(Error::InvalidArgument(format!(
            "need at least {min_paths} paths, got {paths}"
        )));
    }
    Ok(())
}

fn check_dim(ensemble: &Ensemble, x: &ProjPoint) -> Result<()> {
    if ensemble.dim() != x.dim() {
        return Err(Error::DimensionError {
            expected: ensemble.dim(),
            got: x.dim(),
        });
    }
    Ok(())
}

/// Mean of `(t + S_n) 1{tau > n}` over `paths` walks (`t - S_n` and the
/// reflected exit time for `Direction::Minus`).
pub fn estimate_v(
    ensemble: &Ensemble,
    x: &ProjPoint,
    t: f64,
    n: usize,
    paths: usize,
    direction: Direction,
    seed: u64,
) -> Result<WeightedEstimate> {
    check_budget(n, paths, 100)?;
    check_dim(ensemble, x)?;
    let sign = direction.sign();
    let d = ensemble.dim();
    let parts = exec::map_chunks(paths, seed, |rng, range| {
        let mut acc = MeanAcc::new();
        let mut u = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        for _ in range {
            u.copy_from_slice(x.coords());
            let mut s = 0.0;
            let mut alive = true;
            for _ in 0..n {
                s += sign * ensemble.draw(rng).step_primal(&mut u, &mut scratch);
                if t + s < 0.0 {
                    alive = false;
                    break;
                }
            }
            acc.push(if alive { t + s } else { 0.0 });
        }
        acc
    });
    Ok(MeanAcc::merged(&parts).estimate(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VRow {
    pub n: usize,
    pub t: f64,
    pub estimate: WeightedEstimate,
}

/// `V_n(x, t)` for every `(n, t)` computed on one common set of paths.
pub fn v_profile(
    ensemble: &Ensemble,
    x: &ProjPoint,
    t_list: &[f64],
    n_list: &[usize],
    paths: usize,
    direction: Direction,
    seed: u64,
) -> Result<Vec<VRow>> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    check_budget(n_max, paths, 100)?;
    check_dim(ensemble, x)?;
    if n_list.contains(&0) {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let t_max = t_list.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sign = direction.sign();
    let d = ensemble.dim();
    let cells = n_list.len() * t_list.len();
    let parts = exec::map_chunks(paths, seed, |rng, range| {
        let mut accs = vec![MeanAcc::new(); cells];
        let mut u = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        for _ in range {
            u.copy_from_slice(x.coords());
            let mut s = 0.0;
            let mut min_s = f64::INFINITY;
            // (S_n, min_{k<=n} S_k) at each checkpoint
            let mut at = vec![(f64::NAN, f64::NEG_INFINITY); n_list.len()];
            for k in 1..=n_max {
                s += sign * ensemble.draw(rng).step_primal(&mut u, &mut scratch);
                min_s = min_s.min(s);
                for (i, &n) in n_list.iter().enumerate() {
                    if n == k {
                        at[i] = (s, min_s);
                    }
                }
                if t_max + min_s < 0.0 {
                    break;
                }
            }
            for (i, &(s_n, m)) in at.iter().enumerate() {
                for (j, &t) in t_list.iter().enumerate() {
                    let v = if t + m >= 0.0 { t + s_n } else { 0.0 };
                    accs[i * t_list.len() + j].push(v);
                }
            }
        }
        accs
    });
    let mut rows = Vec::with_capacity(cells);
    for (i, &n) in n_list.iter().enumerate() {
        for (j, &t) in t_list.iter().enumerate() {
            let acc = MeanAcc::merged(parts.iter().map(|p| &p[i * t_list.len() + j]));
            rows.push(VRow {
                n,
                t,
                estimate: acc.estimate(seed),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub upsilon_sq: f64,
    pub stderr: f64,
    pub n_used: usize,
    pub warning: Option<String>,
}

/// `(1/n)` times the mean of `S_n^2`.
pub fn estimate_variance(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    paths: usize,
    seed: u64,
) -> Result<VarianceEstimate> {
    check_budget(n, paths, 2)?;
    check_dim(ensemble, x)?;
    let d = ensemble.dim();
    let parts = exec::map_chunks(paths, seed, |rng, range| {
        let mut acc = MeanAcc::new();
        let mut u = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        for _ in range {
            u.copy_from_slice(x.coords());
            let mut s = 0.0;
            for _ in 0..n {
                s += ensemble.draw(rng).step_primal(&mut u, &mut scratch);
            }
            acc.push(s * s / n as f64);
        }
        acc
    });
    let acc = MeanAcc::merged(&parts);
    let upsilon_sq = acc.mean.max(0.0);
    let warning = (upsilon_sq < DEGENERATE_VARIANCE).then(|| {
        let msg = format!(
            "DegenerateVariance: asymptotic variance estimate {upsilon_sq:.3e} is below {DEGENERATE_VARIANCE:.0e}"
        );
        log::warn!("{msg}");
        msg
    });
    Ok(VarianceEstimate {
        upsilon_sq,
        stderr: acc.stderr(),
        n_used: paths,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub n: usize,
    pub survival: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub rows: Vec<SurvivalRow>,
    /// `log P(tau > n)` against `log n` over rows with positive survival.
    pub log_log_fit: Option<LinearFit>,
}

/// `P(tau_{x,t} > n)` for each `n` on shared paths; each path stops at its
/// exit time.
pub fn survival_curve(
    ensemble: &Ensemble,
    x: &ProjPoint,
    t: f64,
    n_list: &[usize],
    paths: usize,
    seed: u64,
) -> Result<SurvivalCurve> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    check_budget(n_max, paths, 2)?;
    check_dim(ensemble, x)?;
    let d = ensemble.dim();
    let parts = exec::map_chunks(paths, seed, |rng, range| {
        let mut counts = vec![0u64; n_list.len()];
        let mut u = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        for _ in range {
            u.copy_from_slice(x.coords());
            let mut s = 0.0;
            let mut exit = n_max + 1;
            for k in 1..=n_max {
                s += ensemble.draw(rng).step_primal(&mut u, &mut scratch);
                if t + s < 0.0 {
                    exit = k;
                    break;
                }
            }
            for (c, &n) in counts.iter_mut().zip(n_list) {
                if exit > n {
                    *c += 1;
                }
            }
        }
        counts
    });
    let rows: Vec<SurvivalRow> = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let c: u64 = parts.iter().map(|p| p[i]).sum();
            let p = c as f64 / paths as f64;
            SurvivalRow {
                n,
                survival: p,
                stderr: (p * (1.0 - p) / paths as f64).sqrt(),
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.survival > 0.0)
        .map(|r| ((r.n as f64).ln(), r.survival.ln()))
        .unzip();
    Ok(SurvivalCurve {
        rows,
        log_log_fit: linear_fit(&xs, &ys),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformitySweep {
    pub rows: Vec<(Vec<f64>, WeightedEstimate)>,
    pub spread: f64,
    /// Largest `|V_i - V_j| / sqrt(se_i^2 + se_j^2)` over pairs.
    pub max_pairwise_z: f64,
}

/// `V_n(x, t)` over a grid of starting points with independent seeds.
pub fn uniformity_sweep(
    ensemble: &Ensemble,
    x_grid: &[ProjPoint],
    t: f64,
    n: usize,
    paths: usize,
    direction: Direction,
    seed: u64,
) -> Result<UniformitySweep> {
    let mut rows = Vec::with_capacity(x_grid.len());
    for (i, x) in x_grid.iter().enumerate() {
        let e = estimate_v(ensemble, x, t, n, paths, direction, exec::derive_seed(seed, i as u64))?;
        rows.push((x.coords().to_vec(), e));
    }
    let vals: Vec<WeightedEstimate> = rows.iter().map(|r| r.1).collect();
    let hi = vals.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    let mut max_z: f64 = 0.0;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            let se = vals[i].stderr.hypot(vals[j].stderr);
            let diff = (vals[i].value - vals[j].value).abs();
            max_z = max_z.max(if se > 0.0 {
                diff / se
            } else if diff > 0.0 {
                f64::INFINITY
            } else {
                0.0
            });
        }
    }
    Ok(UniformitySweep {
        rows,
        spread: if vals.is_empty() { 0.0 } else { hi - lo },
        max_pairwise_z: max_z,
    })
}
