//! Matrix laws on `GL(d, R)`: construction, sampling, Lyapunov estimation
//! and centering, stationary-measure samplers and proximality diagnostics.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Rng};
use crate::projective::{normalize_in_place, sin_distance_raw, AnyPoint, DualProjPoint, GroupElement, ProjPoint, Side};
use crate::stats::{linear_fit, LinearFit, MeanAcc};

fn one() -> f64 {
    1.0
}

fn default_max_condition() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Finitely many atoms (row-major `d x d` matrices) with probabilities.
    Discrete {
        atoms: Vec<Vec<Vec<f64>>>,
        weights: Vec<f64>,
    },
    /// `R * diag(exp(log_gains))` with `R` Haar on `SO(d)`; with
    /// `diagonal_first` the product is `diag(exp(log_gains)) * R`.
    RotationDiagonal {
        log_gains: Vec<f64>,
        #[serde(default)]
        diagonal_first: bool,
    },
    /// `I + epsilon * Z` with standard Gaussian entries, redrawn while the
    /// condition number exceeds `max_condition`.
    GaussianPerturbed {
        epsilon: f64,
        #[serde(default = "default_max_condition")]
        max_condition: f64,
    },
    /// `exp(log_sd * Z) * I`: a scalar walk with Gaussian increments.
    ScalarLogNormal { log_sd: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dim: usize,
    #[serde(default = "one")]
    pub scale: f64,
    pub kind: EnsembleKind,
}

impl EnsembleSpec {
    pub fn discrete(atoms: Vec<Vec<Vec<f64>>>, weights: Vec<f64>) -> Self {
        let dim = atoms.first().map_or(0, |a| a.len());
        Self {
            dim,
            scale: 1.0,
            kind: EnsembleKind::Discrete { atoms, weights },
        }
    }

    /// Equal-weight discrete ensemble of diagonal matrices.
    pub fn discrete_diag(diags: &[&[f64]]) -> Self {
        let atoms = diags
            .iter()
            .map(|d| {
                (0..d.len())
                    .map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect())
                    .collect()
            })
            .collect::<Vec<Vec<Vec<f64>>>>();
        let k = atoms.len();
        Self::discrete(atoms, vec![1.0 / k as f64; k])
    }

    pub fn identity(dim: usize) -> Self {
        Self::discrete(
            vec![(0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect()],
            vec![1.0],
        )
    }

    pub fn rotations(dim: usize) -> Self {
        Self {
            dim,
            scale: 1.0,
            kind: EnsembleKind::RotationDiagonal {
                log_gains: vec![0.0; dim],
                diagonal_first: false,
            },
        }
    }

    pub fn rotation_diagonal(log_gains: Vec<f64>, diagonal_first: bool) -> Self {
        Self {
            dim: log_gains.len(),
            scale: 1.0,
            kind: EnsembleKind::RotationDiagonal {
                log_gains,
                diagonal_first,
            },
        }
    }

    pub fn gaussian_perturbed(dim: usize, epsilon: f64) -> Self {
        Self {
            dim,
            scale: 1.0,
            kind: EnsembleKind::GaussianPerturbed {
                epsilon,
                max_condition: default_max_condition(),
            },
        }
    }

    pub fn scalar_log_normal(log_sd: f64) -> Self {
        Self {
            dim: 1,
            scale: 1.0,
            kind: EnsembleKind::ScalarLogNormal { log_sd },
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

/// Estimated top Lyapunov exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda_hat: f64,
    pub stderr: f64,
    pub steps: usize,
    pub replicas: usize,
}

/// Budget for [`Ensemble::center`].
#[derive(Debug, Clone, Copy)]
pub struct CenterConfig {
    pub steps: usize,
    pub replicas: usize,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for CenterConfig {
    fn default() -> Self {
        Self {
            steps: 20_000,
            replicas: 64,
            max_rounds: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Discrete {
        atoms: Vec<GroupElement>,
        cumulative: Vec<f64>,
    },
    RotationDiagonal {
        gains: Vec<f64>,
        diagonal_first: bool,
    },
    Gaussian {
        epsilon: f64,
        max_condition: f64,
    },
    ScalarLogNormal {
        log_sd: f64,
    },
}

/// A sampleable matrix law.
#[derive(Debug, Clone)]
pub struct Ensemble {
    spec: EnsembleSpec,
    sampler: Sampler,
}

impl Ensemble {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        let d = spec.dim;
        if d == 0 {
            return Err(Error::InvalidSpec("dim must be >= 1".into()));
        }
        if !(spec.scale > 0.0 && spec.scale.is_finite()) {
            return Err(Error::InvalidSpec("scale must be positive".into()));
        }
        let c = spec.scale;
        let sampler = match &spec.kind {
            EnsembleKind::Discrete { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() {
                    return Err(Error::WeightError(format!(
                        "{} atoms but {} weights",
                        atoms.len(),
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                    return Err(Error::WeightError("weights must be non-negative".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::WeightError(format!("weights sum to {total}")));
                }
                let mut elems = Vec::with_capacity(atoms.len());
                for (i, rows) in atoms.iter().enumerate() {
                    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                        return Err(Error::InvalidSpec(format!("atom {i} is not {d}x{d}")));
                    }
                    let g = GroupElement::from_rows(rows).map_err(|_| Error::SingularAtom(i))?;
                    elems.push(g.scaled(c));
                }
                let mut acc = 0.0;
                let cumulative = weights
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                Sampler::Discrete {
                    atoms: elems,
                    cumulative,
                }
            }
            EnsembleKind::RotationDiagonal {
                log_gains,
                diagonal_first,
            } => {
                if log_gains.len() != d || log_gains.iter().any(|g| !g.is_finite()) {
                    return Err(Error::InvalidSpec(format!("log_gains must have {d} finite entries")));
                }
                Sampler::RotationDiagonal {
                    gains: log_gains.iter().map(|g| g.exp()).collect(),
                    diagonal_first: *diagonal_first,
                }
            }
            EnsembleKind::GaussianPerturbed { epsilon, max_condition } => {
                if !(*epsilon >= 0.0) || !(*max_condition > 1.0) {
                    return Err(Error::InvalidSpec("epsilon >= 0 and max_condition > 1 required".into()));
                }
                Sampler::Gaussian {
                    epsilon: *epsilon,
                    max_condition: *max_condition,
                }
            }
            EnsembleKind::ScalarLogNormal { log_sd } => {
                if !(*log_sd >= 0.0) {
                    return Err(Error::InvalidSpec("log_sd must be >= 0".into()));
                }
                Sampler::ScalarLogNormal { log_sd: *log_sd }
            }
        };
        Ok(Self { spec, sampler })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn scale(&self) -> f64 {
        self.spec.scale
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Ensemble::new(self.spec.clone().with_scale(scale))
    }

    /// Atoms and weights when the law has finite support.
    pub fn atoms(&self) -> Option<(&[GroupElement], Vec<f64>)> {
        match &self.sampler {
            Sampler::Discrete { atoms, .. } => match &self.spec.kind {
                EnsembleKind::Discrete { weights, .. } => Some((atoms.as_slice(), weights.clone())),
                _ => None,
            },
            _ => None,
        }
    }

    /// One sample `g ~ mu` with cached inverse.
    pub fn draw(&self, rng: &mut Rng) -> GroupElement {
        let d = self.spec.dim;
        let c = self.spec.scale;
        match &self.sampler {
            Sampler::Discrete { atoms, cumulative } => {
                if atoms.len() == 1 {
                    return atoms[0].clone();
                }
                let u: f64 = rng.random();
                let i = cumulative.partition_point(|&w| w <= u).min(atoms.len() - 1);
                atoms[i].clone()
            }
            Sampler::RotationDiagonal { gains, diagonal_first } => {
                let r = haar_rotation(d, rng);
                let mut m = vec![0.0; d * d];
                let mut inv = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        // R D: column j scaled by gains[j]; D R: row i scaled by gains[i]
                        let (gm, gi) = if *diagonal_first {
                            (gains[i], gains[j])
                        } else {
                            (gains[j], gains[i])
                        };
                        m[i * d + j] = c * r[i * d + j] * gm;
                        // inverse: D^{-1} R^T or R^T D^{-1}
                        inv[i * d + j] = r[j * d + i] / (gi * c);
                    }
                }
                GroupElement::from_parts(d, m, inv)
            }
            Sampler::Gaussian { epsilon, max_condition } => {
                if *epsilon == 0.0 {
                    return GroupElement::identity(d).scaled(c);
                }
                for _ in 0..10_000 {
                    let mut m = vec![0.0; d * d];
                    for (k, x) in m.iter_mut().enumerate() {
                        let z: f64 = StandardNormal.sample(rng);
                        *x = c * (if k % (d + 1) == 0 { 1.0 } else { 0.0 } + epsilon * z);
                    }
                    if let Ok(g) = GroupElement::new(d, m) {
                        if condition_inf(&g) <= *max_condition {
                            return g;
                        }
                    }
                }
                panic!("gaussian-perturbed sampler rejected 10000 consecutive draws");
            }
            Sampler::ScalarLogNormal { log_sd } => {
                let z: f64 = StandardNormal.sample(rng);
                GroupElement::identity(d).scaled(c * (log_sd * z).exp())
            }
        }
    }

    /// One sample of `g^{-1}` for `g ~ mu`.
    pub fn draw_inverse(&self, rng: &mut Rng) -> GroupElement {
        self.draw(rng).inverse()
    }

    /// The Lyapunov exponent when it is known in closed form.
    pub fn exact_lyapunov(&self) -> Option<f64> {
        let lc = self.spec.scale.ln();
        match (&self.spec.kind, self.spec.dim) {
            (EnsembleKind::Discrete { atoms, weights }, 1) => Some(
                atoms
                    .iter()
                    .zip(weights)
                    .map(|(a, w)| w * a[0][0].abs().ln())
                    .sum::<f64>()
                    + lc,
            ),
            (EnsembleKind::RotationDiagonal { log_gains, .. }, 1) => Some(log_gains[0] + lc),
            // mean of log|D w| over the uniform circle is log((a + b) / 2)
            (EnsembleKind::RotationDiagonal { log_gains, .. }, 2) => {
                Some(((log_gains[0].exp() + log_gains[1].exp()) / 2.0).ln() + lc)
            }
            (EnsembleKind::RotationDiagonal { log_gains, .. }, _) => Some(sphere_log_norm(log_gains) + lc),
            (EnsembleKind::GaussianPerturbed { epsilon, .. }, _) if *epsilon == 0.0 => Some(lc),
            (EnsembleKind::ScalarLogNormal { .. }, _) => Some(lc),
            _ => None,
        }
    }

    /// Copy of the ensemble rescaled so that the closed-form exponent is zero.
    pub fn centered_exact(&self) -> Option<Result<Self>> {
        self.exact_lyapunov()
            .map(|l| self.with_scale(self.spec.scale * (-l).exp()))
    }

    /// Mean of `S_steps / steps` over independent replicas started at the
    /// diagonal direction, renormalizing every step.
    pub fn estimate_lyapunov(&self, steps: usize, replicas: usize, seed: u64) -> LyapunovEstimate {
        let steps = steps.max(1);
        let replicas = replicas.max(2);
        let d = self.dim();
        let parts = exec::map_chunks_sized(replicas, 1, seed, |rng, range| {
            let mut acc = MeanAcc::new();
            for _ in range {
                let mut u = ProjPoint::diagonal(d).into_inner();
                let mut scratch = vec![0.0; d];
                let mut s = 0.0;
                for _ in 0..steps {
                    s += self.draw(rng).step_primal(&mut u, &mut scratch);
                }
                acc.push(s / steps as f64);
            }
            acc
        });
        let acc = MeanAcc::merged(&parts);
        LyapunovEstimate {
            lambda_hat: acc.mean,
            stderr: acc.stderr(),
            steps,
            replicas,
        }
    }

    /// Rescales so that the estimated exponent vanishes:
    /// `sigma(c g, x) = sigma(g, x) + log c`.
    pub fn center(&self, tolerance: f64, cfg: CenterConfig) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let mut current = self.clone();
        let mut last = (f64::INFINITY, 0.0);
        for round in 0..cfg.max_rounds.max(1) {
            let est = current.estimate_lyapunov(cfg.steps, cfg.replicas, exec::derive_seed(cfg.seed, 2 * round as u64));
            let scaled = current.with_scale(current.scale() * (-est.lambda_hat).exp())?;
            let check = scaled.estimate_lyapunov(
                cfg.steps,
                cfg.replicas,
                exec::derive_seed(cfg.seed, 2 * round as u64 + 1),
            );
            last = (check.lambda_hat, check.stderr);
            current = scaled;
            if check.lambda_hat.abs() <= tolerance + 3.0 * check.stderr {
                return Ok(current);
            }
        }
        Err(Error::NotConverged {
            residual: last.0,
            stderr: last.1,
        })
    }

    /// Approximate draw from the stationary measure: `nu` on `P(V)` for the
    /// primal side, `nu*` (stationary for the inverse law) on `P(V*)`.
    pub fn sample_stationary(&self, side: Side, depth: usize, rng: &mut Rng) -> AnyPoint {
        match side {
            Side::Primal => AnyPoint::Primal(self.sample_nu(depth, &ProjPoint::diagonal(self.dim()), rng)),
            Side::Dual => AnyPoint::Dual(self.sample_nu_dual(depth, &DualProjPoint::diagonal(self.dim()), rng)),
        }
    }

    /// `g_1 ... g_depth x0` in law (the draws are exchangeable).
    pub fn sample_nu(&self, depth: usize, x0: &ProjPoint, rng: &mut Rng) -> ProjPoint {
        let d = self.dim();
        let mut u = x0.coords().to_vec();
        let mut scratch = vec![0.0; d];
        for _ in 0..depth.max(1) {
            self.draw(rng).step_primal(&mut u, &mut scratch);
        }
        ProjPoint::new(u).expect("unit vector")
    }

    /// `g_1^{-1} ... g_depth^{-1} y0` under the dual action, in law.
    pub fn sample_nu_dual(&self, depth: usize, y0: &DualProjPoint, rng: &mut Rng) -> DualProjPoint {
        let d = self.dim();
        let mut u = y0.coords().to_vec();
        let mut scratch = vec![0.0; d];
        for _ in 0..depth.max(1) {
            self.draw(rng).step_dual_inverse(&mut u, &mut scratch);
        }
        DualProjPoint::new(u).expect("unit vector")
    }

    /// Exceedance fractions `P(d(g_n..g_1 x, g_n..g_1 x') > exp(-a n))` over
    /// random pairs, with a log-linear fit against `n`.
    pub fn contraction_profile(&self, n_list: &[usize], pairs: usize, a: f64, seed: u64) -> Result<ContractionProfile> {
        if pairs < 100 || !(a > 0.0) {
            return Err(Error::InvalidArgument("need pairs >= 100 and a > 0".into()));
        }
        let d = self.dim();
        let n_max = n_list.iter().copied().max().unwrap_or(0);
        let parts = exec::map_chunks(pairs, seed, |rng, range| {
            let mut counts = vec![0u64; n_list.len()];
            for _ in range {
                let mut u = random_unit(d, rng);
                let mut w = random_unit(d, rng);
                let mut scratch = vec![0.0; d];
                for step in 1..=n_max {
                    let g = self.draw(rng);
                    g.step_primal(&mut u, &mut scratch);
                    g.step_primal(&mut w, &mut scratch);
                    for (i, &n) in n_list.iter().enumerate() {
                        if n == step && sin_distance_raw(&u, &w) > (-a * n as f64).exp() {
                            counts[i] += 1;
                        }
                    }
                }
            }
            counts
        });
        let mut totals = vec![0u64; n_list.len()];
        for p in &parts {
            for (t, c) in totals.iter_mut().zip(p) {
                *t += c;
            }
        }
        let rows: Vec<ContractionRow> = n_list
            .iter()
            .zip(&totals)
            .map(|(&n, &c)| {
                let f = c as f64 / pairs as f64;
                ContractionRow {
                    n,
                    fraction: f,
                    stderr: (f * (1.0 - f) / pairs as f64).sqrt(),
                }
            })
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.fraction > 0.0)
            .map(|r| (r.n as f64, r.fraction.ln()))
            .unzip();
        Ok(ContractionProfile {
            rows,
            log_fit: linear_fit(&xs, &ys),
        })
    }

    /// Runtime check of the proximality assumption.
    pub fn proximality_diagnostic(&self, depth: usize, samples: usize, seed: u64) -> ProximalityReport {
        let d = self.dim();
        let parts = exec::map_chunks(samples, seed, |rng, range| {
            let mut acc = MeanAcc::new();
            for _ in range {
                let mut prod = GroupElement::identity(d);
                for _ in 0..depth.max(1) {
                    // keep the product bounded; only the singular-value ratio matters
                    let g = self.draw(rng);
                    let p = g.compose(&prod);
                    let top = p.singular_values()[0];
                    prod = p.scaled(1.0 / top);
                }
                let s = prod.singular_values();
                let gap = if d >= 2 { (s[0] / s[1]).ln() } else { f64::INFINITY };
                acc.push(gap / depth.max(1) as f64);
            }
            acc
        });
        let acc = MeanAcc::merged(&parts);
        let mut warnings = Vec::new();
        if d >= 2 && acc.mean < 1e-3 {
            warnings.push(format!(
                "top-two singular value gap rate {:.3e} suggests the semigroup is not proximal",
                acc.mean
            ));
        }
        ProximalityReport {
            gap_rate: acc.mean,
            gap_rate_stderr: acc.stderr(),
            warnings,
        }
    }
}

/// `E log |D w|` for `w` uniform on the unit sphere and
/// `D = diag(exp(log_gains))`.
///
/// Writing `w = z / |z|` with `z` standard Gaussian and using
/// `log x = int_0^inf (e^{-s} - e^{-s x}) ds / s` gives
/// `1/2 int_0^inf [(1 + 2s)^{-d/2} - prod_i (1 + 2s a_i^2)^{-1/2}] ds / s`,
/// integrated here in `u = log s` by the trapezoid rule.
pub fn sphere_log_norm(log_gains: &[f64]) -> f64 {
    let d = log_gains.len() as f64;
    let a2: Vec<f64> = log_gains.iter().map(|g| (2.0 * g).exp()).collect();
    let f = |u: f64| {
        let s = u.exp();
        let base = (-0.5 * d * (2.0 * s).ln_1p()).exp();
        let prod = (-0.5 * a2.iter().map(|a| (2.0 * s * a).ln_1p()).sum::<f64>()).exp();
        base - prod
    };
    let (lo, hi, h) = (-60.0, 60.0, 1e-3);
    let steps = ((hi - lo) / h) as usize;
    let mut acc = crate::stats::CompensatedSum::default();
    for i in 0..=steps {
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc.add(w * f(lo + i as f64 * h));
    }
    0.5 * h * acc.value()
}

fn condition_inf(g: &GroupElement) -> f64 {
    let d = g.dim();
    let n = |m: &[f64]| {
        (0..d)
            .map(|i| m[i * d..(i + 1) * d].iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    n(g.mat()) * n(g.inv())
}

/// Uniform unit vector.
pub fn random_unit(d: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let l = normalize_in_place(&mut v);
        if l.is_finite() {
            return v;
        }
    }
}

/// Haar-distributed rotation in `SO(d)`, row-major.
pub fn haar_rotation(d: usize, rng: &mut Rng) -> Vec<f64> {
    if d == 1 {
        return vec![1.0];
    }
    if d == 2 {
        let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let (s, c) = th.sin_cos();
        return vec![c, -s, s, c];
    }
    // Gram-Schmidt on Gaussian columns gives Haar on O(d)
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        for q in &cols {
            let p = crate::projective::dot(&v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
        }
        if crate::projective::norm(&v) > 1e-8 {
            normalize_in_place(&mut v);
            cols.push(v);
        }
    }
    let mut m = vec![0.0; d * d];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            m[i * d + j] = c[i];
        }
    }
    let det = nalgebra::DMatrix::from_row_slice(d, d, &m).determinant();
    if det < 0.0 {
        for i in 0..d {
            m[i * d] = -m[i * d];
        }
    }
    m
}

/// `g_1 ... g_L x0`, a truncated approximation of the boundary point.
pub fn boundary_point(prefix: &[GroupElement], x0: &ProjPoint) -> Result<ProjPoint> {
    if prefix.is_empty() {
        return Err(Error::InvalidArgument("prefix must be non-empty".into()));
    }
    ProjPoint::new(apply_product(prefix, x0.coords()))
}

/// Unit vector of `g_1 ... g_L v` (applied right to left).
pub(crate) fn apply_product(prefix: &[GroupElement], v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    let mut scratch = vec![0.0; u.len()];
    for g in prefix.iter().rev() {
        g.step_primal(&mut u, &mut scratch);
    }
    u
}

/// `d(xi(w), g_1 xi(T w))` with both boundary points truncated at depth
/// `L = letters.len() - 1`.
pub fn equivariance_residual(letters: &[GroupElement], x0: &ProjPoint) -> Result<f64> {
    if letters.len() < 2 {
        return Err(Error::InvalidArgument("need at least two letters".into()));
    }
    let l = letters.len() - 1;
    let xi = apply_product(&letters[..l], x0.coords());
    let xi_shift = apply_product(&letters[1..], x0.coords());
    let moved = apply_product(&letters[..1], &xi_shift);
    Ok(sin_distance_raw(&xi, &moved))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub n: usize,
    pub fraction: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionProfile {
    pub rows: Vec<ContractionRow>,
    /// Fit of `log fraction` against `n` over rows with positive fraction.
    pub log_fit: Option<LinearFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximalityReport {
    pub gap_rate: f64,
    pub gap_rate_stderr: f64,
    pub warnings: Vec<String>,
}
