use cocycle_lab::testfn::*;

fn quad(psi: &PiecewiseLinear, lo: f64, a: f64) -> f64 {
    let (_, b) = psi.support();
    let lo2 = lo.max(psi.support().0);
    if lo2 >= b {
        return 0.0;
    }
    let n = 200_000;
    let h = (b - lo2) / n as f64;
    (0..n)
        .map(|i| {
            let u = lo2 + (i as f64 + 0.5) * h;
            (u + a) * psi.eval(u) * h
        })
        .sum()
}

#[test]
fn tail_integral_matches_quadrature() {
    let psi = PiecewiseLinear::new(vec![(-1.0, 0.0), (0.5, 2.0), (1.0, -0.5), (3.0, 0.0)]).unwrap();
    for &(lo, a) in &[(-5.0, 0.0), (0.2, 1.5), (0.7, -3.0), (2.5, 0.1), (4.0, 1.0)] {
        let exact = psi.tail_integral(lo, a);
        assert!((exact - quad(&psi, lo, a)).abs() < 1e-8, "lo={lo} a={a}");
    }
}

#[test]
fn hat_moments() {
    let psi = PiecewiseLinear::hat(0.0, 1.0, 2.0);
    assert!((psi.integral() - 1.0).abs() < 1e-15);
    // int u psi(u) du = 1 by symmetry
    assert!((psi.tail_integral(-1.0, 0.0) - 1.0).abs() < 1e-15);
    assert_eq!(psi.eval(1.0), 1.0);
    assert_eq!(psi.eval(2.0), 0.0);
    assert_eq!(psi.eval(0.5), 0.5);
}

#[test]
fn invalid_psi_rejected() {
    assert!(PiecewiseLinear::new(vec![(0.0, 0.0), (0.0, 0.0)]).is_err());
    assert!(PiecewiseLinear::new(vec![(0.0, 1.0), (1.0, 0.0)]).is_err());
}

#[test]
fn path_integral_shift() {
    let h = TestFunction::of_t(PiecewiseLinear::hat(1.0, 2.0, 3.0));
    // int_0^inf t psi(t + s) dt with s = 1: int (u - 1) psi(u) du = 1
    assert!((h.path_integral(&[1.0], 0.0, 1.0, 0.0) - 1.0).abs() < 1e-14);
}

#[test]
fn serde_round_trip() {
    let h = TestFunction::product(Phi::CoordinateSquared { index: 1 }, PiecewiseLinear::hat(0.0, 1.0, 2.0));
    let s = toml::to_string(&h).unwrap();
    let back: TestFunction = toml::from_str(&s).unwrap();
    assert_eq!(back, h);
}
