use crate::ensemble::Ensemble;
use crate::exec::Rng;
use crate::projective::{DualProjPoint, GroupElement, ProjPoint};

/// A space on which letters act, together with the additive cocycle that
/// drives the walk and a sampler for its stationary law.
pub trait ActedSpace: Sync + Send {
    type Point: Clone + Send + Sync + std::fmt::Debug;

    fn dim(&self) -> usize;

    /// Moves `p` by `g` and returns the cocycle increment.
    fn step(&self, g: &GroupElement, p: &mut Self::Point, scratch: &mut [f64]) -> f64;

    /// The stationary-law approximation built from `letters`, the first
    /// letter being applied first.
    fn start_from_letters(&self, letters: &[GroupElement]) -> Self::Point;

    /// Approximate draw from the stationary law using `depth` letters.
    fn sample_start(&self, ensemble: &Ensemble, depth: usize, rng: &mut Rng) -> Self::Point {
        let letters: Vec<GroupElement> = (0..depth.max(1)).map(|_| ensemble.draw(rng)).collect();
        self.start_from_letters(&letters)
    }
}

/// `P(V)` with `sigma(g, x) = log |g v|`.
#[derive(Debug, Clone, Copy)]
pub struct PrimalSpace {
    pub dim: usize,
}

impl ActedSpace for PrimalSpace {
    type Point = Vec<f64>;

    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&self, g: &GroupElement, p: &mut Vec<f64>, scratch: &mut [f64]) -> f64 {
        g.step_primal(p, scratch)
    }

    fn start_from_letters(&self, letters: &[GroupElement]) -> Vec<f64> {
        let mut u = ProjPoint::diagonal(self.dim).into_inner();
        let mut scratch = vec![0.0; self.dim];
        for g in letters {
            g.step_primal(&mut u, &mut scratch);
        }
        ProjPoint::new(u).expect("unit vector").into_inner()
    }
}

/// `P(V*)` where a letter `g` acts by `g^{-1}` (matrix `g^T` on covectors)
/// and the increment is `-sigma*(g^{-1}, y) = -log |g^T phi|`. The
/// stationary law is `nu*`.
#[derive(Debug, Clone, Copy)]
pub struct DualReversedSpace {
    pub dim: usize,
}

impl ActedSpace for DualReversedSpace {
    type Point = Vec<f64>;

    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&self, g: &GroupElement, p: &mut Vec<f64>, scratch: &mut [f64]) -> f64 {
        -g.step_dual_inverse(p, scratch)
    }

    fn start_from_letters(&self, letters: &[GroupElement]) -> Vec<f64> {
        let mut u = DualProjPoint::diagonal(self.dim).into_inner();
        let mut scratch = vec![0.0; self.dim];
        for g in letters {
            g.step_dual_inverse(&mut u, &mut scratch);
        }
        DualProjPoint::new(u).expect("unit vector").into_inner()
    }
}

/// The one-point space of a scalar walk: the increment of `g = (a)` is
/// `log |a|`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarLine;

impl ActedSpace for ScalarLine {
    type Point = ();

    fn dim(&self) -> usize {
        1
    }

    fn step(&self, g: &GroupElement, _p: &mut (), _scratch: &mut [f64]) -> f64 {
        assert_eq!(g.dim(), 1, "scalar line needs 1x1 letters");
        g.mat()[0].abs().ln()
    }

    fn start_from_letters(&self, _letters: &[GroupElement]) {}

    fn sample_start(&self, _ensemble: &Ensemble, _depth: usize, _rng: &mut Rng) {}
}
