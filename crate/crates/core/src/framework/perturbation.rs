use std::sync::Arc;

use crate::ensemble::{apply_product, Ensemble};
use crate::exec::Rng;
use crate::projective::{delta_raw, GroupElement};

/// A sequence `(f_n)` of functions of the future letters and the current
/// point. `future[0]` is the next letter to be applied.
pub trait Perturbation<P>: Sync + Send {
    /// How many future letters `f_n` reads.
    fn lookahead(&self, n: usize) -> usize;

    fn eval(&self, n: usize, future: &[GroupElement], point: &P, rng: &mut Rng) -> f64;

    /// `f_k(T^k w, x_k)` for `k = 0..=n`, where `letters[0] = g_1` and
    /// `points[k] = x_k`.
    fn along_path(&self, n: usize, letters: &[GroupElement], points: &[P], rng: &mut Rng) -> Vec<f64> {
        (0..=n).map(|k| self.eval(k, &letters[k..], &points[k], rng)).collect()
    }

    fn describe(&self) -> String;
}

/// `f = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl<P> Perturbation<P> for Zero {
    fn lookahead(&self, _n: usize) -> usize {
        0
    }

    fn eval(&self, _n: usize, _future: &[GroupElement], _point: &P, _rng: &mut Rng) -> f64 {
        0.0
    }

    fn along_path(&self, n: usize, _letters: &[GroupElement], _points: &[P], _rng: &mut Rng) -> Vec<f64> {
        vec![0.0; n + 1]
    }

    fn describe(&self) -> String {
        "zero".into()
    }
}

/// `f_n(w, y) = delta(g_1 ... g_L x0, y)` for every `n`: the bracket with
/// the boundary point truncated at depth `L`. Reads exactly `L` letters.
#[derive(Debug, Clone)]
pub struct BoundaryDelta {
    pub x0: Vec<f64>,
    pub depth: usize,
}

impl Perturbation<Vec<f64>> for BoundaryDelta {
    fn lookahead(&self, _n: usize) -> usize {
        self.depth
    }

    fn eval(&self, _n: usize, future: &[GroupElement], y: &Vec<f64>, _rng: &mut Rng) -> f64 {
        delta_raw(&apply_product(&future[..self.depth], &self.x0), y)
    }

    fn describe(&self) -> String {
        format!("boundary_delta(depth={})", self.depth)
    }
}

/// `f_n(w, y) = delta(g_1 ... g_{m-n} x, y)` for `n <= m` and `delta(x, y)`
/// beyond: with this perturbation the walk on `P(V*)` is the reversed walk
/// of horizon `m`.
#[derive(Debug, Clone)]
pub struct ReversalDelta {
    pub x: Vec<f64>,
    pub horizon: usize,
}

impl Perturbation<Vec<f64>> for ReversalDelta {
    fn lookahead(&self, n: usize) -> usize {
        self.horizon.saturating_sub(n)
    }

    fn eval(&self, n: usize, future: &[GroupElement], y: &Vec<f64>, _rng: &mut Rng) -> f64 {
        let l = self.lookahead(n);
        delta_raw(&apply_product(&future[..l], &self.x), y)
    }

    fn along_path(&self, n: usize, letters: &[GroupElement], points: &[Vec<f64>], _rng: &mut Rng) -> Vec<f64> {
        // suffix points z_k = g_{k+1} ... g_m x, computed once from the right
        let m = self.horizon;
        let d = self.x.len();
        let mut z = self.x.clone();
        let mut scratch = vec![0.0; d];
        let mut suffix = vec![Vec::new(); m.max(n) + 1];
        for k in (0..=m).rev() {
            if k < m {
                letters[k].step_primal(&mut z, &mut scratch);
            }
            suffix[k] = z.clone();
        }
        for s in suffix.iter_mut().skip(m + 1) {
            *s = self.x.clone();
        }
        (0..=n).map(|k| delta_raw(&suffix[k], &points[k])).collect()
    }

    fn describe(&self) -> String {
        format!("reversal_delta(horizon={})", self.horizon)
    }
}

/// `f_n(w, x) = log |g_q|` (operator norm of the `q`-th future letter).
#[derive(Debug, Clone, Copy)]
pub struct LetterLogNorm {
    pub index: usize,
}

impl<P> Perturbation<P> for LetterLogNorm {
    fn lookahead(&self, _n: usize) -> usize {
        self.index
    }

    fn eval(&self, _n: usize, future: &[GroupElement], _point: &P, _rng: &mut Rng) -> f64 {
        future[self.index - 1].log_norms().0
    }

    fn describe(&self) -> String {
        format!("letter_log_norm(index={})", self.index)
    }
}

type EvalFn<P> = dyn Fn(usize, &[GroupElement], &P) -> f64 + Sync + Send;

/// A perturbation given by a closure with a fixed lookahead.
#[derive(Clone)]
pub struct FnPerturbation<P> {
    pub lookahead: usize,
    pub name: String,
    f: Arc<EvalFn<P>>,
}

impl<P> FnPerturbation<P> {
    pub fn new(
        name: &str,
        lookahead: usize,
        f: impl Fn(usize, &[GroupElement], &P) -> f64 + Sync + Send + 'static,
    ) -> Self {
        Self {
            lookahead,
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl<P> Perturbation<P> for FnPerturbation<P> {
    fn lookahead(&self, _n: usize) -> usize {
        self.lookahead
    }

    fn eval(&self, n: usize, future: &[GroupElement], point: &P, _rng: &mut Rng) -> f64 {
        (self.f)(n, future, point)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// `f_{n,p} = E(f_n | first p letters)`, realized by averaging `f_n` over
/// `tail_draws` independent resamplings of the letters after position `p`.
#[derive(Clone)]
pub struct Projected<F> {
    pub inner: F,
    pub p: usize,
    pub tail_draws: usize,
    pub ensemble: Ensemble,
}

pub fn project_finite_size<F>(f: F, p: usize, tail_draws: usize, ensemble: &Ensemble) -> Projected<F> {
    Projected {
        inner: f,
        p,
        tail_draws: tail_draws.max(1),
        ensemble: ensemble.clone(),
    }
}

impl<P, F: Perturbation<P>> Perturbation<P> for Projected<F> {
    fn lookahead(&self, n: usize) -> usize {
        self.inner.lookahead(n).min(self.p)
    }

    fn eval(&self, n: usize, future: &[GroupElement], point: &P, rng: &mut Rng) -> f64 {
        let l = self.inner.lookahead(n);
        if l <= self.p {
            return self.inner.eval(n, future, point, rng);
        }
        let mut letters: Vec<GroupElement> = future[..self.p].to_vec();
        let mut acc = 0.0;
        for _ in 0..self.tail_draws {
            letters.truncate(self.p);
            letters.extend((self.p..l).map(|_| self.ensemble.draw(rng)));
            acc += self.inner.eval(n, &letters, point, rng);
        }
        acc / self.tail_draws as f64
    }

    fn describe(&self) -> String {
        format!(
            "projected({}, p={}, tail_draws={})",
            self.inner.describe(),
            self.p,
            self.tail_draws
        )
    }
}
