use cocycle_lab::error::*;
use cocycle_lab::projective::*;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn normalization_examples() {
    assert_eq!(normalize_point(&[0.0, 3.0]).unwrap().coords(), &[0.0, 1.0]);
    assert_eq!(normalize_point(&[-2.0, 0.0]).unwrap().coords(), &[1.0, 0.0]);
    let p = normalize_point(&[1.0, 1.0]).unwrap();
    assert!(close(p.coords()[0], FRAC_1_SQRT_2) && close(p.coords()[1], FRAC_1_SQRT_2));
    assert_eq!(normalize_point(&[0.0, 0.0]), Err(Error::InvalidPoint));
}

#[test]
fn action_examples() {
    let e1 = ProjPoint::basis(2, 0);
    let e2 = ProjPoint::basis(2, 1);
    let x = normalize_point(&[0.3, -0.7]).unwrap();
    assert_eq!(GroupElement::identity(2).act(&x).unwrap(), x);
    let g = GroupElement::diag(&[2.0, 1.0]).unwrap();
    assert_eq!(g.act(&e1).unwrap(), e1);
    let swap = GroupElement::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    assert_eq!(swap.act(&e1).unwrap(), e2);
    assert!(matches!(
        g.act(&ProjPoint::basis(3, 0)),
        Err(Error::DimensionError { .. })
    ));
}

#[test]
fn cocycle_examples() {
    let x = normalize_point(&[0.3, -0.7]).unwrap();
    assert_eq!(GroupElement::identity(2).cocycle(&x).unwrap(), 0.0);
    let g = GroupElement::diag(&[2.0, 1.0]).unwrap();
    assert!(close(g.cocycle(&ProjPoint::basis(2, 0)).unwrap(), LN_2));
    assert!(close(g.dual_cocycle(&DualProjPoint::basis(2, 0)).unwrap(), -LN_2));
}

#[test]
fn delta_examples() {
    let e1 = ProjPoint::basis(2, 0);
    assert_eq!(delta(&e1, &DualProjPoint::basis(2, 0)).unwrap(), 0.0);
    assert_eq!(delta(&e1, &DualProjPoint::basis(2, 1)).unwrap(), f64::INFINITY);
    let x = normalize_point(&[1.0, 1.0]).unwrap();
    assert!(close(delta(&x, &DualProjPoint::basis(2, 0)).unwrap(), 0.5 * LN_2));
}

#[test]
fn sin_distance_examples() {
    let e1 = ProjPoint::basis(2, 0);
    let e2 = ProjPoint::basis(2, 1);
    let x = normalize_point(&[1.0, 1.0]).unwrap();
    assert_eq!(sin_distance(&e1, &e1).unwrap(), 0.0);
    assert!(close(sin_distance(&e1, &e2).unwrap(), 1.0));
    assert!(close(sin_distance(&e1, &x).unwrap(), FRAC_1_SQRT_2));
}

#[test]
fn cohomology_examples() {
    let x = normalize_point(&[1.0, 1.0]).unwrap();
    let y = DualProjPoint::basis(2, 0);
    assert_eq!(cohomology_residual(&GroupElement::identity(2), &x, &y).unwrap(), 0.0);
    let g = GroupElement::diag(&[2.0, 1.0]).unwrap();
    assert!(cohomology_residual(&g, &x, &y).unwrap().abs() < 1e-12);
    let e2 = ProjPoint::basis(2, 1);
    assert!(matches!(cohomology_residual(&g, &e2, &y), Err(Error::InfiniteDelta(_))));
}

#[test]
fn ill_conditioned_rejected() {
    assert!(matches!(
        GroupElement::diag(&[1.0, 1e-13]),
        Err(Error::IllConditioned(_))
    ));
    assert_eq!(GroupElement::diag(&[1.0, 0.0]).unwrap_err(), Error::Singular);
}

#[test]
fn inverse_is_cached_correctly() {
    let g = GroupElement::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let prod = matmul(2, g.mat(), g.inv());
    for (i, v) in prod.iter().enumerate() {
        let want = if i % 3 == 0 { 1.0 } else { 0.0 };
        assert!((v - want).abs() < 1e-12);
    }
    let (ln, lninv) = g.log_norms();
    assert!(ln.is_finite() && lninv.is_finite());
}
