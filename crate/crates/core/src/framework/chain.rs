use serde::Serialize;

use super::estimate::StartLaw;
use super::perturbation::Perturbation;
use super::space::ActedSpace;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::exec::{map_chunks, Rng};
use crate::harmonic::check_budget;
use crate::projective::GroupElement;
use crate::stats::{MeanAcc, WeightedEstimate};

/// A state `(g_0, ..., g_p, x, q)` of the letter window chain.
#[derive(Debug, Clone)]
pub struct ChainState<P> {
    pub letters: Vec<GroupElement>,
    pub point: P,
    pub counter: usize,
}

impl<P: Clone> ChainState<P> {
    pub fn new(letters: Vec<GroupElement>, point: P, counter: usize) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("a chain state needs at least one letter".into()));
        }
        Ok(Self {
            letters,
            point,
            counter,
        })
    }

    /// Window length minus one.
    pub fn p(&self) -> usize {
        self.letters.len() - 1
    }

    /// One transition: drop `g_0`, append `g`, move the point by the new
    /// first letter. Returns the increment `sigma_p` of the new state.
    fn advance<S: ActedSpace<Point = P>>(&mut self, space: &S, g: GroupElement, scratch: &mut [f64]) -> f64 {
        self.letters.remove(0);
        self.letters.push(g);
        self.counter += 1;
        space.step(&self.letters[0], &mut self.point, scratch)
    }

    /// `f~(a) = f_q(g_1, ..., g_p, x)`.
    fn f_tilde(&self, f: &dyn Perturbation<P>, rng: &mut Rng) -> f64 {
        f.eval(self.counter, &self.letters[1..], &self.point, rng)
    }
}

#[derive(Debug, Clone)]
pub struct ChainTrajectory<P> {
    pub states: Vec<ChainState<P>>,
    /// `sigma_p(xi_i)` for `i = 1..=steps`.
    pub increments: Vec<f64>,
}

pub fn simulate_chain<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    initial: &ChainState<S::Point>,
    steps: usize,
    rng: &mut Rng,
) -> ChainTrajectory<S::Point> {
    let mut scratch = vec![0.0; ens.dim()];
    let mut state = initial.clone();
    let mut states = Vec::with_capacity(steps + 1);
    let mut increments = Vec::with_capacity(steps);
    states.push(state.clone());
    for _ in 0..steps {
        let g = ens.draw(rng);
        increments.push(state.advance(space, g, &mut scratch));
        states.push(state.clone());
    }
    ChainTrajectory { states, increments }
}

fn check_horizon<P>(f: &dyn Perturbation<P>, p: usize, first: usize, n: usize) -> Result<()> {
    if (first..=first + n).any(|k| f.lookahead(k) > p) {
        return Err(Error::InvalidArgument(format!(
            "perturbation '{}' reads more than p = {p} letters",
            f.describe()
        )));
    }
    Ok(())
}

/// One chain path from `state`: returns the contribution to `W_n(a, t)`.
#[allow(clippy::too_many_arguments)]
fn chain_value<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    mut state: ChainState<S::Point>,
    f: &dyn Perturbation<S::Point>,
    t: f64,
    n: usize,
    rng: &mut Rng,
    scratch: &mut [f64],
) -> f64 {
    let p = state.p();
    let f0 = state.f_tilde(f, rng);
    let mut s = 0.0;
    let mut alive = true;
    for i in 1..=n + p {
        let g = ens.draw(rng);
        s += state.advance(space, g, scratch);
        if i <= n && alive && t + s + state.f_tilde(f, rng) - f0 < 0.0 {
            alive = false;
        }
    }
    if alive {
        t + s
    } else {
        0.0
    }
}

/// `W_n(a, t) = E_a(t + sum_{i<=n+p} sigma_p(xi_i); tau~ > n)` from a fixed
/// initial state.
#[allow(clippy::too_many_arguments)]
pub fn estimate_w_chain<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    initial: &ChainState<S::Point>,
    f: &dyn Perturbation<S::Point>,
    t: f64,
    n: usize,
    paths: usize,
    seed: u64,
) -> Result<WeightedEstimate> {
    check_budget(n, paths, 2)?;
    check_horizon(f, initial.p(), initial.counter, n)?;
    let d = ens.dim();
    let parts = map_chunks(paths, seed, |rng, range| {
        let mut scratch = vec![0.0; d];
        let mut acc = MeanAcc::new();
        for _ in range {
            acc.push(chain_value(space, ens, initial.clone(), f, t, n, rng, &mut scratch));
        }
        acc
    });
    Ok(MeanAcc::merged(&parts).estimate(seed))
}

/// `W_n` averaged over `(g_0, ..., g_p) ~ mu^{p+1}` and `x ~ start` with
/// counter 0.
#[allow(clippy::too_many_arguments)]
pub fn estimate_w_chain_averaged<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    t: f64,
    n: usize,
    p: usize,
    paths: usize,
    start: &StartLaw<S::Point>,
    seed: u64,
) -> Result<WeightedEstimate> {
    check_budget(n, paths, 2)?;
    check_horizon(f, p, 0, n)?;
    let d = ens.dim();
    let parts = map_chunks(paths, seed, |rng, range| {
        let mut scratch = vec![0.0; d];
        let mut acc = MeanAcc::new();
        for _ in range {
            let point = start.draw(space, ens, rng);
            let letters = (0..=p).map(|_| ens.draw(rng)).collect();
            let state = ChainState {
                letters,
                point,
                counter: 0,
            };
            acc.push(chain_value(space, ens, state, f, t, n, rng, &mut scratch));
        }
        acc
    });
    Ok(MeanAcc::merged(&parts).estimate(seed))
}

/// Conditioning event for a martingale increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MartingaleBlock {
    All,
    /// `M_k >= 0`.
    NonNegative,
    /// `M_k < 0`.
    Negative,
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleRow {
    pub k: usize,
    pub block: MartingaleBlock,
    /// Mean of `M_{k+1} - M_k` on the block.
    pub mean: WeightedEstimate,
}

/// Conditional means of the increments `M_{k+1} - M_k = h_p(xi_{k+1})` of
/// `M_k = sum_{i<=k} h_p(xi_i)`, for `k = 1..=k_max`, over the whole sample
/// and split by the sign of `M_k`. Initial states are drawn from
/// `mu^{p+1} x start`.
pub fn martingale_residual<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    p: usize,
    k_max: usize,
    paths: usize,
    start: &StartLaw<S::Point>,
    seed: u64,
) -> Result<Vec<MartingaleRow>> {
    check_budget(k_max, paths, 2)?;
    let d = ens.dim();
    let blocks = [
        MartingaleBlock::All,
        MartingaleBlock::NonNegative,
        MartingaleBlock::Negative,
    ];
    let parts = map_chunks(paths, seed, |rng, range| {
        let mut scratch = vec![0.0; d];
        let mut accs = vec![[MeanAcc::new(); 3]; k_max];
        for _ in range {
            let point = start.draw(space, ens, rng);
            let letters = (0..=p).map(|_| ens.draw(rng)).collect();
            let mut state = ChainState {
                letters,
                point,
                counter: 0,
            };
            // sigma_p(xi_i) for i = 1..=k_max+1+p; h_p(xi_i) = sigma_p(xi_{i+p})
            let mut sig = Vec::with_capacity(k_max + p + 1);
            for _ in 0..k_max + 1 + p {
                let g = ens.draw(rng);
                sig.push(state.advance(space, g, &mut scratch));
            }
            let mut m = 0.0;
            for (k, acc) in accs.iter_mut().enumerate() {
                // M_k with k = index + 1
                m += sig[k + p];
                let inc = sig[k + 1 + p];
                acc[0].push(inc);
                if m >= 0.0 {
                    acc[1].push(inc);
                } else {
                    acc[2].push(inc);
                }
            }
        }
        accs
    });
    let mut rows = Vec::with_capacity(3 * k_max);
    for k in 0..k_max {
        for (b, block) in blocks.iter().enumerate() {
            let acc = MeanAcc::merged(parts.iter().map(|c| &c[k][b]));
            rows.push(MartingaleRow {
                k: k + 1,
                block: *block,
                mean: acc.estimate(seed),
            });
        }
    }
    Ok(rows)
}
