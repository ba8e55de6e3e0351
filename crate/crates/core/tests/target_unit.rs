use cocycle_lab::ensemble::EnsembleSpec;
use cocycle_lab::ensemble::*;
use cocycle_lab::projective::*;
use cocycle_lab::target::*;
use cocycle_lab::testfn::*;
use cocycle_lab::testfn::{Phi, PiecewiseLinear};
use cocycle_lab::walk::*;

fn ens(spec: EnsembleSpec) -> Ensemble {
    Ensemble::new(spec).unwrap()
}

#[test]
fn identity_rho_is_eta() {
    let e = ens(EnsembleSpec::identity(2));
    let x = ProjPoint::from_slice(&[0.6, 0.8]).unwrap();
    let h = TestFunction::product(Phi::CoordinateSquared { index: 1 }, PiecewiseLinear::hat(0.0, 1.0, 3.0));
    let r = estimate_rho_action(&e, &x, 4, 50, &h, Direction::Plus, 0).unwrap();
    let want = 0.64 * PiecewiseLinear::hat(0.0, 1.0, 3.0).tail_integral(0.0, 0.0);
    assert!((r.value - want).abs() < 1e-14);
    assert_eq!(r.stderr, 0.0);
}

#[test]
fn identity_density_and_tail() {
    let e = ens(EnsembleSpec::identity(1));
    let s = sample_rho(&e, &ProjPoint::basis(1, 0), 3, 10, Direction::Plus, 0).unwrap();
    for r in s.density(&[-2.0, 0.0, 1.5, 7.0]) {
        assert!((r.w - r.u.max(0.0)).abs() < 1e-14);
    }
    assert_eq!(s.negative_mass().value, 0.0);
}

#[test]
fn density_matches_direct_sum_and_is_monotone() {
    let e = ens(EnsembleSpec::rotation_diagonal(vec![0.5, -0.5], true));
    let s = sample_rho(&e, &ProjPoint::diagonal(2), 30, 3000, Direction::Plus, 5).unwrap();
    let grid: Vec<f64> = (0..400).map(|i| -3.0 + i as f64 * 0.02).collect();
    let rows = s.density(&grid);
    assert!(rows.windows(2).all(|w| w[1].w >= w[0].w));
    for r in rows.iter().step_by(37) {
        let direct: f64 = s
            .weights
            .iter()
            .map(|w| if r.u >= w.lower_cut + w.s_n { r.u - w.s_n } else { 0.0 })
            .sum::<f64>()
            / s.weights.len() as f64;
        assert!((r.w - direct).abs() < 1e-10);
    }
}

#[test]
fn identity_harmonicity_is_exact() {
    let e = ens(EnsembleSpec::identity(2));
    let h = TestFunction::of_t(PiecewiseLinear::hat(0.0, 1.0, 2.0));
    let r = harmonicity_residual(&e, &ProjPoint::diagonal(2), 3, 20, &h, 4, 0).unwrap();
    assert_eq!(r.residual.value, 0.0);
}

#[test]
fn identity_reversal_sides_agree() {
    let e = ens(EnsembleSpec::identity(2));
    let h = TestFunction::of_t(PiecewiseLinear::hat(0.0, 1.0, 2.0));
    let r = reversal_residual(&e, &ProjPoint::diagonal(2), 3, 40, 4, &h, 5, 0).unwrap();
    assert!(r.residual.value.abs() < 1e-14);
    assert!((r.lhs.value - 1.0).abs() < 1e-14);
}

#[test]
fn identity_translation_limit() {
    let e = ens(EnsembleSpec::identity(1));
    let psi = PiecewiseLinear::hat(-1.0, 0.0, 1.0);
    let h = TestFunction::of_t(psi);
    let rows = translation_profile(&e, &ProjPoint::basis(1, 0), 2, 10, &h, &[10.0, 100.0], 10, 0).unwrap();
    // (1/t) int u psi(u - t) du = int psi for a symmetric psi
    for r in rows {
        assert!((r.ratio.value - 1.0).abs() < 1e-12);
    }
}
