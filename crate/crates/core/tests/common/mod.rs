#![allow(dead_code)]

use std::path::PathBuf;

use cocycle_lab::ensemble::{Ensemble, EnsembleSpec};
use cocycle_lab::projective::{DualProjPoint, ProjPoint};
use cocycle_lab::testfn::{Phi, PiecewiseLinear, TestFunction};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.toml"))
}

pub fn fixture(name: &str) -> Ensemble {
    Ensemble::new(EnsembleSpec::load(&fixture_path(name)).expect("fixture parses")).expect("fixture is valid")
}

pub fn point(v: &[f64]) -> ProjPoint {
    ProjPoint::from_slice(v).unwrap()
}

pub fn covector(v: &[f64]) -> DualProjPoint {
    DualProjPoint::from_slice(v).unwrap()
}

/// Generic starting point of the given dimension.
pub fn generic_point(d: usize) -> ProjPoint {
    point(&(0..d).map(|i| 1.0 + 0.37 * i as f64).collect::<Vec<_>>())
}

/// Three covectors in general position with respect to the fixtures.
pub fn generic_covectors(d: usize) -> Vec<DualProjPoint> {
    (0..3)
        .map(|j| {
            covector(
                &(0..d)
                    .map(|i| ((i + 1) as f64 * (j as f64 + 0.7)).sin() + 0.1)
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

/// A non-negative test function mixing a constant and a coordinate weight.
pub fn standard_h(d: usize) -> TestFunction {
    TestFunction::product(Phi::constant(1.0), PiecewiseLinear::hat(0.0, 1.0, 3.0)).plus(
        &TestFunction::product(
            Phi::CoordinateSquared { index: d - 1 },
            PiecewiseLinear::hat(0.5, 2.0, 4.0),
        ),
        0.5,
    )
}

/// Harmonic function `V(u) = lim E(u + S_n; tau_u > n)` of the standard
/// Gaussian walk killed below zero, solved by Nystrom on `[0, len]` with
/// `V(y) = y + c` beyond, where `c = -zeta(1/2) / sqrt(2 pi)` is the limiting
/// mean overshoot. Returns a closure evaluating the Nystrom interpolant.
pub fn gaussian_harmonic(step: f64, len: f64) -> impl Fn(f64) -> f64 {
    use nalgebra::{DMatrix, DVector};
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let std = Normal::new(0.0, 1.0).unwrap();
    let c = 1.460_354_508_809_586_8 / (2.0 * std::f64::consts::PI).sqrt();
    let m = (len / step).round() as usize + 1;
    let ys: Vec<f64> = (0..m).map(|j| j as f64 * step).collect();
    let w: Vec<f64> = (0..m)
        .map(|j| if j == 0 || j == m - 1 { step / 2.0 } else { step })
        .collect();
    let tail = move |u: f64| {
        let a = len - u;
        std.pdf(a) + (u + c) * (1.0 - std.cdf(a))
    };
    let mut a = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] -= w[j] * std.pdf(ys[j] - ys[i]);
        }
    }
    let b = DVector::from_iterator(m, ys.iter().map(|&u| tail(u)));
    let v = a.lu().solve(&b).expect("Nystrom system is regular");
    move |u: f64| (0..m).map(|j| w[j] * std.pdf(ys[j] - u) * v[j]).sum::<f64>() + tail(u)
}
