//! Perturbed walks on an abstract acted space: `S~_n = S_n + f_n(T^n w, x_n) - f_0(w, x)`,
//! the killed functionals `U_n^{f,theta}`, finite-size projections, the
//! Markov chain on letter windows, and the quasi-monotonicity scan.

pub mod chain;
pub mod estimate;
pub mod perturbation;
pub mod scan;
pub mod space;
pub mod twist;

pub use chain::{
    estimate_w_chain, estimate_w_chain_averaged, martingale_residual, simulate_chain, ChainState, ChainTrajectory,
    MartingaleBlock, MartingaleRow,
};
pub use estimate::{
    approximation_profile, estimate_i1, estimate_u, sample_u_paths, ApproximationProfile, ApproximationRow, StartLaw,
    UEstimate, UPathSet,
};
pub use perturbation::{
    project_finite_size, BoundaryDelta, FnPerturbation, LetterLogNorm, Perturbation, Projected, ReversalDelta, Zero,
};
pub use scan::{quasi_monotonicity_scan, ScanCell, ScanConfig, ScanDirection, ScanReport};
pub use space::{ActedSpace, DualReversedSpace, PrimalSpace, ScalarLine};
pub use twist::{ProjectedTwist, Twist, TwistOfProduct, UnitTwist};
