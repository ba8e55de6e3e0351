use crate::ensemble::{apply_product, Ensemble};
use crate::exec::Rng;
use crate::projective::GroupElement;
use crate::testfn::Phi;

/// A bounded non-negative weight `theta(w)` depending on the letters.
pub trait Twist: Sync + Send {
    /// Number of letters read.
    fn lookahead(&self) -> usize;

    fn eval(&self, letters: &[GroupElement], rng: &mut Rng) -> f64;

    fn sup(&self) -> f64;
}

/// `theta = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitTwist;

impl Twist for UnitTwist {
    fn lookahead(&self) -> usize {
        0
    }

    fn eval(&self, _letters: &[GroupElement], _rng: &mut Rng) -> f64 {
        1.0
    }

    fn sup(&self) -> f64 {
        1.0
    }
}

/// `theta(w) = phi(g_1 ... g_depth x0)` for a non-negative `phi`.
#[derive(Debug, Clone)]
pub struct TwistOfProduct {
    pub phi: Phi,
    pub depth: usize,
    pub x0: Vec<f64>,
}

impl Twist for TwistOfProduct {
    fn lookahead(&self) -> usize {
        self.depth
    }

    fn eval(&self, letters: &[GroupElement], _rng: &mut Rng) -> f64 {
        self.phi.eval(&apply_product(&letters[..self.depth], &self.x0))
    }

    fn sup(&self) -> f64 {
        self.phi.sup()
    }
}

/// `theta_p = E(theta | first p letters)` by tail resampling.
#[derive(Clone)]
pub struct ProjectedTwist<T> {
    pub inner: T,
    pub p: usize,
    pub tail_draws: usize,
    pub ensemble: Ensemble,
}

impl<T: Twist> Twist for ProjectedTwist<T> {
    fn lookahead(&self) -> usize {
        self.inner.lookahead().min(self.p)
    }

    fn eval(&self, letters: &[GroupElement], rng: &mut Rng) -> f64 {
        let l = self.inner.lookahead();
        if l <= self.p {
            return self.inner.eval(letters, rng);
        }
        let mut buf: Vec<GroupElement> = letters[..self.p].to_vec();
        let mut acc = 0.0;
        for _ in 0..self.tail_draws.max(1) {
            buf.truncate(self.p);
            buf.extend((self.p..l).map(|_| self.ensemble.draw(rng)));
            acc += self.inner.eval(&buf, rng);
        }
        acc / self.tail_draws.max(1) as f64
    }

    fn sup(&self) -> f64 {
        self.inner.sup()
    }
}
