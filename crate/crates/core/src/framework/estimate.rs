use serde::Serialize;

use super::perturbation::Perturbation;
use super::space::ActedSpace;
use super::twist::{ProjectedTwist, Twist};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::exec::{map_chunks, Rng};
use crate::harmonic::check_budget;
use crate::projective::GroupElement;
use crate::stats::{linear_fit, LinearFit, MeanAcc, WeightedEstimate};

/// Law of the starting point.
#[derive(Debug, Clone)]
pub enum StartLaw<P> {
    Fixed(P),
    /// Approximate stationary law from `depth` letters.
    Stationary {
        depth: usize,
    },
}

impl<P: Clone> StartLaw<P> {
    pub(crate) fn draw<S: ActedSpace<Point = P>>(&self, space: &S, ens: &Ensemble, rng: &mut Rng) -> P {
        match self {
            StartLaw::Fixed(p) => p.clone(),
            StartLaw::Stationary { depth } => space.sample_start(ens, *depth, rng),
        }
    }
}

/// Consecutive attempts allowed when a perturbation evaluates to infinity.
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy)]
struct PathRow {
    theta: f64,
}

/// Paths shared across several horizons. For horizon `n_list[i]` and path
/// `j`: `tilde[j][i] = S~_n`, `threshold[j][i] = max_{k<=n} (-S~_k)` and
/// `extra[j][i] = S_{n+extra}`.
#[derive(Debug, Clone)]
pub struct UPathSet {
    pub n_list: Vec<usize>,
    pub extra_steps: usize,
    pub tilde: Vec<Vec<f64>>,
    pub threshold: Vec<Vec<f64>>,
    pub extra: Vec<Vec<f64>>,
    theta: Vec<PathRow>,
    pub rejections: u64,
    pub seed: u64,
}

impl UPathSet {
    pub fn len(&self) -> usize {
        self.tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tilde.is_empty()
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.theta[j].theta
    }

    /// Contribution of path `j` to `U_{n_list[i]}(t)`.
    pub fn value(&self, j: usize, i: usize, t: f64) -> f64 {
        if t >= self.threshold[j][i] {
            (t + self.tilde[j][i]) * self.theta[j].theta
        } else {
            0.0
        }
    }

    /// Contribution of path `j` to `E(t + S_{n+extra}; tau^f > n)`.
    pub fn extra_value(&self, j: usize, i: usize, t: f64) -> f64 {
        if t >= self.threshold[j][i] {
            t + self.extra[j][i]
        } else {
            0.0
        }
    }

    pub fn at(&self, i: usize, t: f64) -> WeightedEstimate {
        let mut acc = MeanAcc::new();
        for j in 0..self.len() {
            acc.push(self.value(j, i, t));
        }
        acc.estimate(self.seed)
    }

    pub fn extra_at(&self, i: usize, t: f64) -> WeightedEstimate {
        let mut acc = MeanAcc::new();
        for j in 0..self.len() {
            acc.push(self.extra_value(j, i, t));
        }
        acc.estimate(self.seed)
    }
}

/// `U_n` together with the number of redrawn samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UEstimate {
    pub estimate: WeightedEstimate,
    pub rejections: u64,
}

pub(crate) fn letters_needed<P>(f: &dyn Perturbation<P>, n_max: usize, extra: usize, theta_depth: usize) -> usize {
    let mut need = (n_max + extra).max(theta_depth);
    for k in 0..=n_max {
        need = need.max(k + f.lookahead(k));
    }
    need
}

/// Simulates `steps` letters of the walk on `space`, returning the points
/// `x_0..=x_n_points` and the partial sums `S_0..=S_steps`.
pub(crate) fn walk_on<S: ActedSpace>(
    space: &S,
    letters: &[GroupElement],
    start: S::Point,
    n_points: usize,
    steps: usize,
    scratch: &mut [f64],
) -> (Vec<S::Point>, Vec<f64>) {
    let mut p = start;
    let mut points = Vec::with_capacity(n_points + 1);
    let mut sums = Vec::with_capacity(steps + 1);
    points.push(p.clone());
    sums.push(0.0);
    let mut s = 0.0;
    for (k, g) in letters[..steps].iter().enumerate() {
        s += space.step(g, &mut p, scratch);
        sums.push(s);
        if k < n_points {
            points.push(p.clone());
        }
    }
    (points, sums)
}

/// Draws `paths` trajectories and records, for every `n` in `n_list`, the
/// perturbed sum, its exit threshold and the unperturbed sum `extra` steps
/// further. Paths where `f` is infinite are redrawn and counted.
#[allow(clippy::too_many_arguments)]
pub fn sample_u_paths<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    theta: &dyn Twist,
    start: &StartLaw<S::Point>,
    n_list: &[usize],
    extra: usize,
    paths: usize,
    seed: u64,
) -> Result<UPathSet> {
    check_budget(*n_list.iter().max().unwrap_or(&0), paths, 2)?;
    if n_list.contains(&0) {
        return Err(Error::InvalidArgument("horizons must be at least 1".into()));
    }
    let n_max = *n_list.iter().max().unwrap();
    let need = letters_needed(f, n_max, extra, theta.lookahead());
    let d = ens.dim();
    type Row = (Vec<f64>, Vec<f64>, Vec<f64>, PathRow);
    let chunks = map_chunks(paths, seed, |rng, range| -> Result<(Vec<Row>, u64)> {
        let mut scratch = vec![0.0; d];
        let mut out = Vec::with_capacity(range.len());
        let mut rejected = 0u64;
        for _ in range {
            let mut tries = 0;
            loop {
                let x = start.draw(space, ens, rng);
                let letters: Vec<GroupElement> = (0..need).map(|_| ens.draw(rng)).collect();
                let (points, sums) = walk_on(space, &letters, x, n_max, n_max + extra, &mut scratch);
                let fv = f.along_path(n_max, &letters, &points, rng);
                if fv.iter().any(|v| !v.is_finite()) {
                    rejected += 1;
                    tries += 1;
                    if tries >= MAX_REDRAWS {
                        return Err(Error::InfinitePerturbation);
                    }
                    continue;
                }
                let mut tilde = Vec::with_capacity(n_list.len());
                let mut thr = Vec::with_capacity(n_list.len());
                let mut ext = Vec::with_capacity(n_list.len());
                let mut running = f64::NEG_INFINITY;
                let mut running_at = Vec::with_capacity(n_max + 1);
                running_at.push(running);
                for k in 1..=n_max {
                    running = running.max(-(sums[k] + fv[k] - fv[0]));
                    running_at.push(running);
                }
                for &n in n_list {
                    tilde.push(sums[n] + fv[n] - fv[0]);
                    thr.push(running_at[n]);
                    ext.push(sums[n + extra]);
                }
                let th = theta.eval(&letters, rng);
                out.push((tilde, thr, ext, PathRow { theta: th }));
                break;
            }
        }
        Ok((out, rejected))
    });
    let mut set = UPathSet {
        n_list: n_list.to_vec(),
        extra_steps: extra,
        tilde: Vec::with_capacity(paths),
        threshold: Vec::with_capacity(paths),
        extra: Vec::with_capacity(paths),
        theta: Vec::with_capacity(paths),
        rejections: 0,
        seed,
    };
    for chunk in chunks {
        let (rows, rej) = chunk?;
        set.rejections += rej;
        for (a, b, c, r) in rows {
            set.tilde.push(a);
            set.threshold.push(b);
            set.extra.push(c);
            set.theta.push(r);
        }
    }
    if set.rejections > 0 {
        log::warn!("{} samples redrawn after an infinite perturbation", set.rejections);
    }
    Ok(set)
}

/// `U_n^{f,theta}(t) = E((t + S~_n) theta; tau^f > n)` with the start drawn
/// from `start`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_u<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    theta: &dyn Twist,
    start: &StartLaw<S::Point>,
    t: f64,
    n: usize,
    paths: usize,
    seed: u64,
) -> Result<UEstimate> {
    let set = sample_u_paths(space, ens, f, theta, start, &[n], 0, paths, seed)?;
    Ok(UEstimate {
        estimate: set.at(0, t),
        rejections: set.rejections,
    })
}

/// `E(t + S_{n+p}; tau^f > n)`: the main part of `U_n` that the letter
/// window chain reproduces.
#[allow(clippy::too_many_arguments)]
pub fn estimate_i1<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    start: &StartLaw<S::Point>,
    t: f64,
    n: usize,
    p: usize,
    paths: usize,
    seed: u64,
) -> Result<UEstimate> {
    let set = sample_u_paths(space, ens, f, &super::twist::UnitTwist, start, &[n], p, paths, seed)?;
    Ok(UEstimate {
        estimate: set.extra_at(0, t),
        rejections: set.rejections,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproximationRow {
    pub p: usize,
    /// Mean of `exp(alpha |f_n - f_{n,p}|) - 1`.
    pub d_hat: WeightedEstimate,
    /// Mean of `|theta - theta_p|`.
    pub n_theta: WeightedEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproximationProfile {
    pub rows: Vec<ApproximationRow>,
    /// Fit of `log d_hat` against `p` over rows with positive `d_hat`.
    pub log_fit: Option<LinearFit>,
    /// Mean of `exp(alpha |f_n|)`.
    pub c_alpha: WeightedEstimate,
    pub alpha_used: f64,
}

/// Smallest usable moment parameter relative to the requested one.
const ALPHA_FLOOR_RATIO: f64 = 1.0 / 1024.0;

/// Measures how fast `f_{n,p}` and `theta_p` approach `f_n` and `theta`.
/// Samples of `|f_n - f_{n,p}|` are drawn once; `alpha` is halved until
/// every exponential moment is finite.
#[allow(clippy::too_many_arguments)]
pub fn approximation_profile<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    theta: &dyn Twist,
    start: &StartLaw<S::Point>,
    n: usize,
    alpha: f64,
    p_list: &[usize],
    tail_draws: usize,
    paths: usize,
    seed: u64,
) -> Result<ApproximationProfile> {
    check_budget(n.max(1), paths, 2)?;
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    let d = ens.dim();
    let need = (n + f.lookahead(n)).max(theta.lookahead());
    // per path: |f_n|, then per p: |f_n - f_{n,p}|, |theta - theta_p|
    let chunks = map_chunks(paths, seed, |rng, range| {
        let mut scratch = vec![0.0; d];
        let mut out = Vec::with_capacity(range.len());
        for _ in range {
            let x = start.draw(space, ens, rng);
            let letters: Vec<GroupElement> = (0..need.max(n)).map(|_| ens.draw(rng)).collect();
            let (points, _) = walk_on(space, &letters, x, n, n, &mut scratch);
            let fut = &letters[n..];
            let fval = f.eval(n, fut, &points[n], rng);
            let th = theta.eval(&letters, rng);
            let mut per_p = Vec::with_capacity(p_list.len());
            for &p in p_list {
                let proj = ProjectedRef {
                    inner: f,
                    p,
                    tail_draws,
                    ensemble: ens,
                };
                let fp = proj.eval(n, fut, &points[n], rng);
                let tp = ProjectedTwist {
                    inner: TwistRef(theta),
                    p,
                    tail_draws,
                    ensemble: ens.clone(),
                }
                .eval(&letters, rng);
                per_p.push(((fval - fp).abs(), (th - tp).abs()));
            }
            out.push((fval.abs(), per_p));
        }
        out
    });
    let samples: Vec<(f64, Vec<(f64, f64)>)> = chunks.into_iter().flatten().collect();
    if samples.iter().any(|(a, _)| a.is_nan()) {
        return Err(Error::InfinitePerturbation);
    }
    let max_abs = samples
        .iter()
        .flat_map(|(a, v)| std::iter::once(*a).chain(v.iter().map(|x| x.0)))
        .fold(0.0f64, f64::max);
    let mut a = alpha;
    while (a * max_abs).exp().is_infinite() || (a * max_abs).exp() * paths as f64 > f64::MAX / 4.0 {
        a *= 0.5;
        if a < alpha * ALPHA_FLOOR_RATIO {
            return Err(Error::MomentOverflow(a));
        }
    }
    let mut c = MeanAcc::new();
    for (v, _) in &samples {
        c.push((a * v).exp());
    }
    let mut rows = Vec::with_capacity(p_list.len());
    for (i, &p) in p_list.iter().enumerate() {
        let mut dacc = MeanAcc::new();
        let mut nacc = MeanAcc::new();
        for (_, per_p) in &samples {
            dacc.push((a * per_p[i].0).exp_m1());
            nacc.push(per_p[i].1);
        }
        rows.push(ApproximationRow {
            p,
            d_hat: dacc.estimate(seed),
            n_theta: nacc.estimate(seed),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.d_hat.value > 0.0)
        .map(|r| (r.p as f64, r.d_hat.value.ln()))
        .unzip();
    Ok(ApproximationProfile {
        log_fit: linear_fit(&xs, &ys),
        rows,
        c_alpha: c.estimate(seed),
        alpha_used: a,
    })
}

/// Borrowing variant of `Projected`, so a trait object can be projected
/// without cloning it.
struct ProjectedRef<'a, P> {
    inner: &'a dyn Perturbation<P>,
    p: usize,
    tail_draws: usize,
    ensemble: &'a Ensemble,
}

impl<P> ProjectedRef<'_, P> {
    fn eval(&self, n: usize, future: &[GroupElement], point: &P, rng: &mut Rng) -> f64 {
        let l = self.inner.lookahead(n);
        if l <= self.p {
            return self.inner.eval(n, future, point, rng);
        }
        let draws = self.tail_draws.max(1);
        let mut letters: Vec<GroupElement> = future[..self.p].to_vec();
        let mut acc = 0.0;
        for _ in 0..draws {
            letters.truncate(self.p);
            letters.extend((self.p..l).map(|_| self.ensemble.draw(rng)));
            acc += self.inner.eval(n, &letters, point, rng);
        }
        acc / draws as f64
    }
}

struct TwistRef<'a>(&'a dyn Twist);

impl Twist for TwistRef<'_> {
    fn lookahead(&self) -> usize {
        self.0.lookahead()
    }

    fn eval(&self, letters: &[GroupElement], rng: &mut Rng) -> f64 {
        self.0.eval(letters, rng)
    }

    fn sup(&self) -> f64 {
        self.0.sup()
    }
}
