//! The measures `rho_{n,x}(h) = E int_0^inf t h(X_n, t + S_n) 1{tau_{x,t} > n - 1} dt`
//! and their checkers. The `t`-integral is done exactly per path: the event
//! `{tau_{x,t} > n - 1}` is `{t >= c}` with `c = max(0, -min_{k<n} S_k)`.

use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::exec;
use crate::harmonic::{check_budget, estimate_v, estimate_variance, VarianceEstimate, DEGENERATE_VARIANCE};
use crate::projective::{DualProjPoint, GroupElement, ProjPoint};
use crate::stats::{linear_fit, CompensatedSum, LinearFit, MeanAcc, WeightedEstimate};
use crate::testfn::TestFunction;
use crate::walk::{reversed_from_letters, walk_summary, Direction};

/// Per-path data determining the path's contribution to `rho_{n,x}`.
#[derive(Debug, Clone)]
pub struct RhoPathWeight {
    pub terminal_point: ProjPoint,
    pub s_n: f64,
    pub lower_cut: f64,
}

/// A path set for `rho_{n,x}`; every functional below is evaluated on the
/// same paths.
#[derive(Debug, Clone)]
pub struct RhoSample {
    pub weights: Vec<RhoPathWeight>,
    pub n: usize,
    pub seed: u64,
}

pub fn sample_rho(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    paths: usize,
    direction: Direction,
    seed: u64,
) -> Result<RhoSample> {
    check_budget(n, paths, 2)?;
    if x.dim() != ensemble.dim() {
        return Err(Error::DimensionError {
            expected: ensemble.dim(),
            got: x.dim(),
        });
    }
    let sign = direction.sign();
    let parts = exec::map_chunks(paths, seed, |rng, range| {
        range
            .map(|_| {
                let w = walk_summary(ensemble, x, n, sign, rng);
                RhoPathWeight {
                    lower_cut: (-w.min_prefix).max(0.0),
                    s_n: w.s_n,
                    terminal_point: ProjPoint::from_unit(w.terminal),
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(RhoSample {
        weights: parts.into_iter().flatten().collect(),
        n,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub u: f64,
    pub w: f64,
    pub stderr: f64,
}

impl RhoSample {
    /// `rho_hat(h)`: mean of `int_c^inf t h(X_n, t + s) dt`.
    pub fn action(&self, h: &TestFunction) -> WeightedEstimate {
        let mut acc = MeanAcc::new();
        for w in &self.weights {
            acc.push(h.path_integral(w.terminal_point.coords(), w.lower_cut, w.s_n, 0.0));
        }
        acc.estimate(self.seed)
    }

    /// `W_hat(u) = mean (u - s) 1{u >= c + s}` on a grid, returned sorted.
    ///
    /// Evaluated incrementally along the sorted grid: every update adds
    /// non-negative terms, so the output is non-decreasing in floating point
    /// as well.
    pub fn density(&self, u_grid: &[f64]) -> Vec<DensityRow> {
        let mut grid = u_grid.to_vec();
        grid.sort_by(f64::total_cmp);
        let mut paths: Vec<(f64, f64)> = self.weights.iter().map(|w| (w.lower_cut + w.s_n, w.s_n)).collect();
        paths.sort_by(|a, b| a.0.total_cmp(&b.0));
        let nf = self.weights.len() as f64;
        let mut i = 0;
        let mut count = 0usize;
        let mut sum_s = CompensatedSum::default();
        let mut sum_s2 = CompensatedSum::default();
        let mut total = 0.0; // sum of ramps at the previous grid point
        let mut prev_u = f64::NEG_INFINITY;
        let mut rows = Vec::with_capacity(grid.len());
        for &u in &grid {
            if count > 0 {
                total += count as f64 * (u - prev_u);
            }
            while i < paths.len() && paths[i].0 <= u {
                let s = paths[i].1;
                total += (u - s).max(0.0);
                sum_s.add(s);
                sum_s2.add(s * s);
                count += 1;
                i += 1;
            }
            prev_u = u;
            let mean = total / nf;
            let cf = count as f64;
            let sq = cf * u * u - 2.0 * u * sum_s.value() + sum_s2.value();
            let var = if nf > 1.0 {
                ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
            } else {
                0.0
            };
            rows.push(DensityRow {
                u,
                w: mean,
                stderr: (var / nf).sqrt(),
            });
        }
        rows
    }

    /// Mass of `rho_hat` on `P(V) x (-inf, 0]`: per path `(s^2 - c^2) / 2`
    /// when `c + s < 0`.
    pub fn negative_mass(&self) -> WeightedEstimate {
        let mut acc = MeanAcc::new();
        for w in &self.weights {
            let b = w.lower_cut + w.s_n;
            acc.push(if b < 0.0 {
                0.5 * (w.s_n * w.s_n - w.lower_cut * w.lower_cut)
            } else {
                0.0
            });
        }
        acc.estimate(self.seed)
    }
}

pub fn estimate_rho_action(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    paths: usize,
    h: &TestFunction,
    direction: Direction,
    seed: u64,
) -> Result<WeightedEstimate> {
    h.validate(ensemble.dim())?;
    Ok(sample_rho(ensemble, x, n, paths, direction, seed)?.action(h))
}

pub fn density_w(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    paths: usize,
    u_grid: &[f64],
    direction: Direction,
    seed: u64,
) -> Result<Vec<DensityRow>> {
    Ok(sample_rho(ensemble, x, n, paths, direction, seed)?.density(u_grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityReport {
    /// `rho_{n+1}(h) - rho_n(Rh)`.
    pub residual: WeightedEstimate,
    pub rho_next: WeightedEstimate,
    pub rho_of_rh: WeightedEstimate,
}

/// Per path, `rho_{n+1}(h)` uses the real letter `g_{n+1}` and `rho_n(Rh)`
/// averages `inner_draws` independent letters at the same position; both
/// are integrated over `t >= max(0, -min_{k<=n} S_k)`.
pub fn harmonicity_residual(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    paths: usize,
    h: &TestFunction,
    inner_draws: usize,
    seed: u64,
) -> Result<HarmonicityReport> {
    check_budget(n, paths, 2)?;
    h.validate(ensemble.dim())?;
    if inner_draws == 0 {
        return Err(Error::InvalidArgument("inner_draws must be >= 1".into()));
    }
    let d = ensemble.dim();
    let parts = exec::map_chunks(paths, seed, |rng, range| {
        let mut acc = [MeanAcc::new(), MeanAcc::new(), MeanAcc::new()];
        let mut v = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        for _ in range {
            let w = walk_summary(ensemble, x, n, 1.0, rng);
            let cut = (-w.min_prefix.min(w.s_n)).max(0.0);
            v.copy_from_slice(&w.terminal);
            let inc = ensemble.draw(rng).step_primal(&mut v, &mut scratch);
            let a = h.path_integral(&v, cut, w.s_n + inc, 0.0);
            let mut b = 0.0;
            for _ in 0..inner_draws {
                v.copy_from_slice(&w.terminal);
                let inc = ensemble.draw(rng).step_primal(&mut v, &mut scratch);
                b += h.path_integral(&v, cut, w.s_n + inc, 0.0);
            }
            b /= inner_draws as f64;
            acc[0].push(a - b);
            acc[1].push(a);
            acc[2].push(b);
        }
        acc
    });
    let merge = |i: usize| MeanAcc::merged(parts.iter().map(|p| &p[i])).estimate(seed);
    Ok(HarmonicityReport {
        residual: merge(0),
        rho_next: merge(1),
        rho_of_rh: merge(2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerY {
    pub y: Vec<f64>,
    pub rhs: WeightedEstimate,
    pub residual: WeightedEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalReport {
    pub lhs: WeightedEstimate,
    pub rhs: WeightedEstimate,
    pub residual: WeightedEstimate,
    pub per_y: Vec<PerY>,
    /// `y` draws discarded because a pairing underflowed.
    pub rejections: u64,
}

/// Right-hand side of the reversal identity for one covector `y` and one
/// word: `int_T^inf (t + S~_n) phi(g_1 ... g_n x) psi(t) dt` with
/// `T = max_k(-S~_k)`.
pub fn reversal_rhs_term(letters: &[GroupElement], x: &ProjPoint, y: &DualProjPoint, h: &TestFunction) -> Result<f64> {
    let r = reversed_from_letters(letters, x, y)?;
    Ok(h.path_integral(r.terminal_point.coords(), r.threshold, 0.0, r.values[r.m - 1]))
}

/// Monte Carlo check of the reversal identity. The left side uses forward
/// paths; the right side uses `y_count` covectors drawn from the dual
/// stationary sampler, each with its own independent paths.
#[allow(clippy::too_many_arguments)]
pub fn reversal_residual(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    paths: usize,
    y_count: usize,
    h: &TestFunction,
    nu_depth: usize,
    seed: u64,
) -> Result<ReversalReport> {
    check_budget(n, paths, 2)?;
    h.validate(ensemble.dim())?;
    if y_count == 0 || paths < 2 * y_count {
        return Err(Error::InvalidArgument(
            "need y_count >= 1 and at least two paths per y".into(),
        ));
    }
    let lhs = estimate_rho_action(ensemble, x, n, paths, h, Direction::Plus, exec::derive_seed(seed, 0))?;
    let per_group = paths / y_count;
    let rhs_seed = exec::derive_seed(seed, 1);
    let groups = exec::map_chunks_sized(y_count, 1, rhs_seed, |rng, _| -> Result<(Vec<f64>, MeanAcc, u64)> {
        let mut rejections = 0u64;
        'retry: loop {
            if rejections > 1000 {
                return Err(Error::InfiniteDelta("every y draw was rejected".into()));
            }
            let y = ensemble.sample_nu_dual(nu_depth, &DualProjPoint::diagonal(ensemble.dim()), rng);
            let mut acc = MeanAcc::new();
            for _ in 0..per_group {
                let letters: Vec<GroupElement> = (0..n).map(|_| ensemble.draw(rng)).collect();
                match reversal_rhs_term(&letters, x, &y, h) {
                    Ok(v) => acc.push(v),
                    Err(Error::InfiniteDelta(_)) => {
                        rejections += 1;
                        log::debug!("rejected y {:?}", y.coords());
                        continue 'retry;
                    }
                    Err(e) => return Err(e),
                }
            }
            return Ok((y.coords().to_vec(), acc, rejections));
        }
    });
    let mut per_y = Vec::with_capacity(y_count);
    let mut rejections = 0;
    let mut means = MeanAcc::new();
    let mut pooled = MeanAcc::new();
    for g in groups {
        let (y, acc, rej) = g?;
        rejections += rej;
        means.push(acc.mean);
        pooled.merge(&acc);
        let rhs = acc.estimate(rhs_seed);
        per_y.push(PerY {
            y,
            residual: lhs.minus(&rhs),
            rhs,
        });
    }
    let rhs = WeightedEstimate {
        value: means.mean,
        stderr: if y_count >= 2 { means.stderr() } else { pooled.stderr() },
        n_samples: pooled.count,
        seed: rhs_seed,
    };
    Ok(ReversalReport {
        residual: lhs.minus(&rhs),
        lhs,
        rhs,
        per_y,
        rejections,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationRow {
    pub t: f64,
    /// `(1/t) rho_hat(h(., . - t))`.
    pub ratio: WeightedEstimate,
    /// `int h d(nu x Leb)`.
    pub prediction: WeightedEstimate,
    pub relative_deviation: f64,
}

/// `int h d(nu x Leb)` with `nu` represented by `samples` draws of depth
/// `depth`.
pub fn product_prediction(
    ensemble: &Ensemble,
    h: &TestFunction,
    samples: usize,
    depth: usize,
    seed: u64,
) -> WeightedEstimate {
    let ints: Vec<f64> = h.terms.iter().map(|t| t.weight * t.psi.integral()).collect();
    let x0 = ProjPoint::diagonal(ensemble.dim());
    let parts = exec::map_chunks(samples, seed, |rng, range| {
        let mut acc = MeanAcc::new();
        for _ in range {
            let x = ensemble.sample_nu(depth, &x0, rng);
            acc.push(h.terms.iter().zip(&ints).map(|(t, i)| i * t.phi.eval(x.coords())).sum());
        }
        acc
    });
    MeanAcc::merged(&parts).estimate(seed)
}

#[allow(clippy::too_many_arguments)]
pub fn translation_profile(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    paths: usize,
    h: &TestFunction,
    t_shifts: &[f64],
    nu_samples: usize,
    seed: u64,
) -> Result<Vec<TranslationRow>> {
    if t_shifts.iter().any(|t| !(*t > 0.0)) || t_shifts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "t_shifts must be positive and increasing".into(),
        ));
    }
    h.validate(ensemble.dim())?;
    let sample = sample_rho(ensemble, x, n, paths, Direction::Plus, exec::derive_seed(seed, 0))?;
    let prediction = product_prediction(ensemble, h, nu_samples, 50, exec::derive_seed(seed, 1));
    Ok(t_shifts
        .iter()
        .map(|&t| {
            let a = sample.action(&h.shifted(t));
            let ratio = WeightedEstimate {
                value: a.value / t,
                stderr: a.stderr / t,
                ..a
            };
            TranslationRow {
                t,
                ratio,
                prediction,
                relative_deviation: (ratio.value - prediction.value).abs() / prediction.value.abs(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeTailReport {
    pub mass: WeightedEstimate,
    /// Fit of `log W_hat(u)` against `u` over grid points in `[lo, 0)` with
    /// `W_hat > 0`.
    pub log_fit: Option<LinearFit>,
    /// Lower one-sided 95% bound on the mass is positive.
    pub mass_positive: bool,
}

pub fn negative_tail_report(
    ensemble: &Ensemble,
    x: &ProjPoint,
    n: usize,
    paths: usize,
    lo: f64,
    grid_points: usize,
    seed: u64,
) -> Result<NegativeTailReport> {
    if !(lo < 0.0) || grid_points < 3 {
        return Err(Error::InvalidArgument("need lo < 0 and at least 3 grid points".into()));
    }
    let sample = sample_rho(ensemble, x, n, paths, Direction::Plus, seed)?;
    Ok(tail_from_sample(&sample, lo, grid_points))
}

pub fn tail_from_sample(sample: &RhoSample, lo: f64, grid_points: usize) -> NegativeTailReport {
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| lo * (1.0 - i as f64 / grid_points as f64))
        .collect();
    let rows = sample.density(&grid);
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.w > 0.0 && r.u < 0.0)
        .map(|r| (r.u, r.w.ln()))
        .unzip();
    let mass = sample.negative_mass();
    NegativeTailReport {
        mass_positive: mass.value - 1.645 * mass.stderr > 0.0,
        mass,
        log_fit: linear_fit(&xs, &ys),
    }
}

/// Limits entering the local-limit normalization, estimated up front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLimitNormalizers {
    pub v: WeightedEstimate,
    pub variance: VarianceEstimate,
    pub rho: WeightedEstimate,
    pub n_ref: usize,
}

pub fn local_limit_normalizers(
    ensemble: &Ensemble,
    x: &ProjPoint,
    t: f64,
    h: &TestFunction,
    n_ref: usize,
    paths: usize,
    seed: u64,
) -> Result<LocalLimitNormalizers> {
    Ok(LocalLimitNormalizers {
        v: estimate_v(
            ensemble,
            x,
            t,
            n_ref,
            paths,
            Direction::Plus,
            exec::derive_seed(seed, 0),
        )?,
        variance: estimate_variance(ensemble, x, n_ref.min(256), paths, exec::derive_seed(seed, 1))?,
        rho: estimate_rho_action(
            ensemble,
            x,
            n_ref,
            paths,
            h,
            Direction::Plus,
            exec::derive_seed(seed, 2),
        )?,
        n_ref,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLimitRow {
    pub n: usize,
    /// `n^{3/2} E(h(X_n, t + S_n); tau > n - 1)`.
    pub scaled: WeightedEstimate,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLimitReport {
    pub rows: Vec<LocalLimitRow>,
    /// Fit of the ratio against `1/sqrt(n)`; the intercept estimates the limit.
    pub stabilization: Option<LinearFit>,
    pub warnings: Vec<String>,
}

impl LocalLimitReport {
    /// For each `n` with `4n` also present: is the `4n` ratio closer to 1?
    pub fn closer_at_four_n(&self) -> Vec<(usize, bool)> {
        self.rows
            .iter()
            .filter_map(|r| {
                self.rows
                    .iter()
                    .find(|q| q.n == 4 * r.n)
                    .map(|q| (r.n, (q.ratio - 1.0).abs() < (r.ratio - 1.0).abs()))
            })
            .collect()
    }
}

/// Ratio of the rescaled local probability to its predicted limit
/// `2 V(x, t) rho(h) / (sqrt(2 pi) upsilon^3)`. Diagnostic only.
#[allow(clippy::too_many_arguments)]
pub fn cllt_ratio(
    ensemble: &Ensemble,
    x: &ProjPoint,
    t: f64,
    n_list: &[usize],
    paths: usize,
    h: &TestFunction,
    norm: &LocalLimitNormalizers,
    seed: u64,
) -> Result<LocalLimitReport> {
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    check_budget(n_max, paths, 2)?;
    h.validate(ensemble.dim())?;
    let mut warnings = Vec::new();
    let ups2 = norm.variance.upsilon_sq;
    if ups2 < DEGENERATE_VARIANCE {
        warnings.push(format!(
            "DegenerateVariance: upsilon^2 = {ups2:.3e}; the limit constant is undefined"
        ));
    }
    let d = ensemble.dim();
    let parts = exec::map_chunks(paths, seed, |rng, range| {
        let mut accs = vec![MeanAcc::new(); n_list.len()];
        let mut u = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        for _ in range {
            u.copy_from_slice(x.coords());
            let mut s = 0.0;
            let mut vals = vec![0.0; n_list.len()];
            for k in 1..=n_max {
                s += ensemble.draw(rng).step_primal(&mut u, &mut scratch);
                for (i, &n) in n_list.iter().enumerate() {
                    if n == k {
                        vals[i] = h.eval(&u, t + s);
                    }
                }
                if t + s < 0.0 {
                    // the event tau > n - 1 fails for every later n
                    break;
                }
            }
            for (a, v) in accs.iter_mut().zip(&vals) {
                a.push(*v);
            }
        }
        accs
    });
    let limit = 2.0 * norm.v.value * norm.rho.value / ((2.0 * std::f64::consts::PI).sqrt() * ups2.powf(1.5));
    let rel_norm = {
        let rv = norm.v.stderr / norm.v.value.abs();
        let rr = norm.rho.stderr / norm.rho.value.abs();
        let ru = 1.5 * norm.variance.stderr / ups2;
        (rv * rv + rr * rr + ru * ru).sqrt()
    };
    let rows: Vec<LocalLimitRow> = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let acc = MeanAcc::merged(parts.iter().map(|p| &p[i]));
            let scale = (n as f64).powf(1.5);
            let scaled = WeightedEstimate {
                value: acc.mean * scale,
                stderr: acc.stderr() * scale,
                n_samples: acc.count,
                seed,
            };
            let ratio = scaled.value / limit;
            let rel = if scaled.value != 0.0 {
                scaled.stderr / scaled.value.abs()
            } else {
                0.0
            };
            LocalLimitRow {
                n,
                scaled,
                ratio,
                ratio_stderr: ratio.abs() * rel.hypot(rel_norm),
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.ratio.is_finite())
        .map(|r| (1.0 / (r.n as f64).sqrt(), r.ratio))
        .unzip();
    Ok(LocalLimitReport {
        stabilization: linear_fit(&xs, &ys),
        rows,
        warnings,
    })
}
