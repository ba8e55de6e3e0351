mod common;

use cocycle_lab::ensemble::{Ensemble, EnsembleSpec};
use cocycle_lab::exec::{derive_seed, stream_rng};
use cocycle_lab::harmonic::{estimate_v, estimate_variance, survival_curve, uniformity_sweep};
use cocycle_lab::projective::ProjPoint;
use cocycle_lab::stats::{within_sigma, MeanAcc};
use cocycle_lab::walk::{exit_time, simulate_path, Direction, ExitTime};
use common::*;

fn centered(spec: EnsembleSpec) -> Ensemble {
    Ensemble::new(spec).unwrap().centered_exact().unwrap().unwrap()
}

fn plus_minus_log2() -> Ensemble {
    Ensemble::new(EnsembleSpec::discrete_diag(&[&[2.0], &[0.5]])).unwrap()
}

#[test]
fn two_step_scalar_value() {
    let e = estimate_v(&plus_minus_log2(), &point(&[1.0]), 0.0, 2, 100_000, Direction::Plus, 3).unwrap();
    assert!(e.within(0.5 * 2f64.ln(), 3.0), "{e:?}");
}

#[test]
fn large_t_ratio_is_near_one() {
    let ens = centered(EnsembleSpec::rotation_diagonal(vec![0.6, -0.6], false));
    let e = estimate_v(&ens, &generic_point(2), 50.0, 200, 20_000, Direction::Plus, 5).unwrap();
    let r = e.value / 50.0;
    assert!((0.9..=1.1).contains(&r), "V/t = {r}");
}

#[test]
fn variance_agrees_at_n_and_2n() {
    let ens = centered(EnsembleSpec::rotation_diagonal(vec![0.5, -0.5], true));
    let x = generic_point(2);
    let a = estimate_variance(&ens, &x, 50, 20_000, 1).unwrap();
    let b = estimate_variance(&ens, &x, 100, 20_000, 2).unwrap();
    assert!(a.upsilon_sq > 0.0 && a.warning.is_none());
    assert!(
        within_sigma(a.upsilon_sq - b.upsilon_sq, a.stderr.hypot(b.stderr), 3.0),
        "{a:?} {b:?}"
    );
}

#[test]
fn scalar_survival_slope() {
    let ns: Vec<usize> = (6..=12).map(|k| 1usize << k).collect();
    let c = survival_curve(&plus_minus_log2(), &point(&[1.0]), 0.0, &ns, 20_000, 9).unwrap();
    assert!(c.rows.windows(2).all(|w| w[1].survival <= w[0].survival));
    let slope = c.log_log_fit.unwrap().slope;
    assert!((-0.65..=-0.38).contains(&slope), "slope {slope}");
}

#[test]
fn strongly_centered_v_does_not_depend_on_x() {
    let ens = centered(EnsembleSpec::rotation_diagonal(vec![0.5, -0.5], true));
    let grid: Vec<ProjPoint> = (0..5)
        .map(|i| {
            let a = 0.3 + i as f64 * 0.6;
            point(&[a.cos(), a.sin()])
        })
        .collect();
    let sweep = uniformity_sweep(&ens, &grid, 1.0, 40, 20_000, Direction::Plus, 4).unwrap();
    assert_eq!(sweep.rows.len(), 5);
    assert!(sweep.max_pairwise_z < 4.0, "{sweep:?}");
}

#[test]
fn censoring_matches_prefix_minimum() {
    let ens = fixture("proximal_d2");
    let (x, t, n) = (generic_point(2), 1.0, 30);
    let mut rng = stream_rng(77, 0);
    let mut acc = MeanAcc::new();
    for _ in 0..20_000 {
        let path = simulate_path(&ens, &x, n, false, &mut rng).unwrap();
        let min_all = path.partial_sums.iter().copied().fold(f64::INFINITY, f64::min);
        let alive = matches!(exit_time(&path, t, Direction::Plus), ExitTime::Censored(_));
        assert_eq!(alive, t >= -min_all);
        acc.push(if alive { t + path.s_n() } else { 0.0 });
    }
    let direct = acc.estimate(77);
    let e = estimate_v(&ens, &x, t, n, 20_000, Direction::Plus, 78).unwrap();
    assert!(
        within_sigma(e.value - direct.value, e.stderr.hypot(direct.stderr), 4.0),
        "{e:?} {direct:?}"
    );
}

#[test]
fn gaussian_harmonic_oracle_is_consistent() {
    let v = gaussian_harmonic(0.025, 20.0);
    // expected strict descending ladder height of a unit Gaussian walk
    assert!((v(0.0) - 0.5f64.sqrt()).abs() < 1e-3, "V(0) = {}", v(0.0));
    assert!((v(8.0) - 8.0 - 0.582_597).abs() < 2e-3);
    // V(u) = E[V(u + Z); u + Z >= 0], by a separate Simpson rule
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for u in [0.0, 0.5, 2.0] {
        let (hi, m) = (u + 12.0, 4800);
        let h = hi / m as f64;
        let f = |y: f64| v(y) * phi(y - u);
        let mut s = f(0.0) + f(hi);
        for k in 1..m {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        assert!((s * h / 3.0 - v(u)).abs() < 1e-3, "u = {u}");
    }
}

#[test]
fn gaussian_v_n_approaches_the_limit() {
    let ens = Ensemble::new(EnsembleSpec::scalar_log_normal(1.0)).unwrap();
    let v = gaussian_harmonic(0.025, 20.0);
    let x = point(&[1.0]);
    let short = estimate_v(&ens, &x, 1.0, 8, 40_000, Direction::Plus, derive_seed(5, 0)).unwrap();
    let long = estimate_v(&ens, &x, 1.0, 400, 40_000, Direction::Plus, derive_seed(5, 1)).unwrap();
    // V_n increases to V; the gap at n = 400 is a few percent
    assert!(short.value < long.value);
    assert!(long.value <= v(1.0) + 3.0 * long.stderr);
    assert!(
        (long.value - v(1.0)).abs() < 3.0 * long.stderr + 0.05 * v(1.0),
        "{long:?} vs {}",
        v(1.0)
    );
}
