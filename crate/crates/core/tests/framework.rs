mod common;

use cocycle_lab::ensemble::{Ensemble, EnsembleSpec};
use cocycle_lab::exec::{derive_seed, stream_rng};
use cocycle_lab::framework::*;
use cocycle_lab::harmonic::estimate_v;
use cocycle_lab::oracle::{exact_i1, exact_u, exact_w_chain};
use cocycle_lab::projective::{GroupElement, ProjPoint};
use cocycle_lab::stats::{ks_p_value, ks_statistic, within_sigma, MeanAcc};
use cocycle_lab::walk::Direction;
use common::*;

fn centered_dr(gains: &[f64]) -> Ensemble {
    Ensemble::new(EnsembleSpec::rotation_diagonal(gains.to_vec(), true))
        .unwrap()
        .centered_exact()
        .unwrap()
        .unwrap()
}

#[test]
fn identity_ensemble_u_is_t_plus() {
    let ens = Ensemble::new(EnsembleSpec::identity(2)).unwrap();
    let space = PrimalSpace { dim: 2 };
    for &t in &[-0.5, 0.0, 1.25] {
        let u = estimate_u(
            &space,
            &ens,
            &Zero,
            &UnitTwist,
            &StartLaw::Stationary { depth: 5 },
            t,
            4,
            200,
            1,
        )
        .unwrap();
        assert_eq!(u.estimate.value, t.max(0.0));
        assert_eq!(u.estimate.stderr, 0.0);
    }
}

#[test]
fn unperturbed_u_matches_averaged_v() {
    let ens = fixture("proximal_d2");
    let space = PrimalSpace { dim: 2 };
    let (t, n) = (0.5, 4);
    let u = estimate_u(
        &space,
        &ens,
        &Zero,
        &UnitTwist,
        &StartLaw::Stationary { depth: 20 },
        t,
        n,
        100_000,
        7,
    )
    .unwrap();
    // average V_n(x, t) over stationary starting points, one small estimate per point
    let mut rng = stream_rng(11, 0);
    let mut outer = MeanAcc::new();
    for i in 0..400 {
        let x = ens.sample_nu(20, &ProjPoint::diagonal(2), &mut rng);
        let v = estimate_v(&ens, &x, t, n, 250, Direction::Plus, derive_seed(12, i)).unwrap();
        outer.push(v.value);
    }
    let se = u.estimate.stderr.hypot(outer.stderr());
    assert!(
        within_sigma(u.estimate.value - outer.mean, se, 3.0),
        "{} vs {} (se {se})",
        u.estimate.value,
        outer.mean
    );
}

#[test]
fn perturbed_u_matches_oracle() {
    let ens = fixture("proximal_d2");
    let space = DualReversedSpace { dim: 2 };
    let f = BoundaryDelta {
        x0: generic_point(2).coords().to_vec(),
        depth: 2,
    };
    let start = StartLaw::Stationary { depth: 3 };
    for &(t, n) in &[(0.3, 2usize), (1.0, 3)] {
        let exact = exact_u(&space, &ens, &f, &UnitTwist, &start, t, n).unwrap();
        let mc = estimate_u(&space, &ens, &f, &UnitTwist, &start, t, n, 100_000, 3).unwrap();
        assert!(
            mc.estimate.within(exact, 4.0),
            "n = {n}: {} vs {exact}",
            mc.estimate.value
        );
        assert_eq!(mc.rejections, 0);
    }
}

#[test]
fn twisted_u_matches_oracle() {
    let ens = fixture("proximal_d2_three");
    let space = PrimalSpace { dim: 2 };
    let theta = TwistOfProduct {
        phi: cocycle_lab::testfn::Phi::CoordinateSquared { index: 0 },
        depth: 2,
        x0: vec![1.0, 0.0],
    };
    let f = LetterLogNorm { index: 1 };
    let start = StartLaw::Fixed(generic_point(2).coords().to_vec());
    let exact = exact_u(&space, &ens, &f, &theta, &start, 0.7, 3).unwrap();
    let mc = estimate_u(&space, &ens, &f, &theta, &start, 0.7, 3, 100_000, 5).unwrap();
    assert!(mc.estimate.within(exact, 4.0), "{} vs {exact}", mc.estimate.value);
}

#[test]
fn zero_perturbation_exit_time_is_unperturbed() {
    // with f = 0 the killed sums coincide path by path with the plain walk
    let ens = fixture("proximal_d2");
    let space = PrimalSpace { dim: 2 };
    let x = generic_point(2);
    let set = sample_u_paths(
        &space,
        &ens,
        &Zero,
        &UnitTwist,
        &StartLaw::Fixed(x.coords().to_vec()),
        &[5],
        0,
        4096,
        9,
    )
    .unwrap();
    let v = estimate_v(&ens, &x, 0.4, 5, 4096, Direction::Plus, 9).unwrap();
    let u = set.at(0, 0.4);
    assert!((u.value - v.value).abs() < 1e-12, "{} vs {}", u.value, v.value);
}

#[test]
fn projection_of_finite_lookahead_is_exact() {
    let ens = fixture("proximal_d2");
    let f = LetterLogNorm { index: 2 };
    let proj = project_finite_size(f, 3, 8, &ens);
    let mut rng = stream_rng(1, 0);
    let letters: Vec<GroupElement> = (0..4).map(|_| ens.draw(&mut rng)).collect();
    let x = vec![1.0, 0.0];
    let a = Perturbation::<Vec<f64>>::eval(&f, 0, &letters, &x, &mut rng);
    let b = proj.eval(0, &letters, &x, &mut rng);
    assert_eq!(a, b);
}

#[test]
fn projection_to_zero_letters_is_mean_log_norm() {
    let ens = fixture("proximal_d2");
    let (atoms, weights) = ens.atoms().unwrap();
    let mean: f64 = atoms.iter().zip(&weights).map(|(g, w)| w * g.log_norms().0).sum();
    let f = LetterLogNorm { index: 1 };
    let x = vec![1.0, 0.0];
    let mut rng = stream_rng(2, 0);
    let mut acc = MeanAcc::new();
    for _ in 0..20_000 {
        let letters = vec![ens.draw(&mut rng)];
        let proj = project_finite_size(f, 0, 4, &ens);
        acc.push(proj.eval(0, &letters, &x, &mut rng));
    }
    assert!(
        within_sigma(acc.mean - mean, acc.stderr(), 4.0),
        "{} vs {mean}",
        acc.mean
    );
}

#[test]
fn doubling_tail_draws_halves_variance() {
    let ens = fixture("proximal_d2");
    let f = LetterLogNorm { index: 1 };
    let x = vec![1.0, 0.0];
    let var = |draws: usize, seed: u64| {
        let mut rng = stream_rng(seed, 0);
        let proj = project_finite_size(f, 0, draws, &ens);
        let mut acc = MeanAcc::new();
        for _ in 0..40_000 {
            acc.push(proj.eval(0, &[], &x, &mut rng));
        }
        acc.variance()
    };
    let ratio = var(8, 3) / var(16, 4);
    // the variance estimates have relative error about sqrt(2 / 40000) each
    assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn projection_is_idempotent_in_law() {
    let ens = fixture("proximal_d2");
    let f = BoundaryDelta {
        x0: vec![1.0, 0.0],
        depth: 4,
    };
    let y = vec![0.6, 0.8];
    let once = project_finite_size(f.clone(), 1, 4, &ens);
    let twice = project_finite_size(project_finite_size(f, 1, 4, &ens), 1, 4, &ens);
    let mut rng = stream_rng(5, 0);
    let (mut a, mut b) = (MeanAcc::new(), MeanAcc::new());
    for _ in 0..20_000 {
        let letters: Vec<GroupElement> = (0..4).map(|_| ens.draw(&mut rng)).collect();
        a.push(once.eval(0, &letters, &y, &mut rng));
        b.push(twice.eval(0, &letters, &y, &mut rng));
    }
    let se = a.stderr().hypot(b.stderr());
    assert!(within_sigma(a.mean - b.mean, se, 3.0));
}

#[test]
fn twist_projection_tower_property() {
    let ens = fixture("proximal_d2");
    let theta = TwistOfProduct {
        phi: cocycle_lab::testfn::Phi::CoordinateSquared { index: 1 },
        depth: 5,
        x0: vec![1.0, 0.0],
    };
    let proj = ProjectedTwist {
        inner: theta.clone(),
        p: 2,
        tail_draws: 4,
        ensemble: ens.clone(),
    };
    let mut rng = stream_rng(6, 0);
    let (mut a, mut b) = (MeanAcc::new(), MeanAcc::new());
    for _ in 0..20_000 {
        let letters: Vec<GroupElement> = (0..5).map(|_| ens.draw(&mut rng)).collect();
        a.push(theta.eval(&letters, &mut rng));
        let other: Vec<GroupElement> = (0..5).map(|_| ens.draw(&mut rng)).collect();
        b.push(proj.eval(&other, &mut rng));
    }
    assert!(within_sigma(a.mean - b.mean, a.stderr().hypot(b.stderr()), 3.0));
}

#[test]
fn profile_of_zero_perturbation() {
    let ens = fixture("proximal_d2");
    let space = PrimalSpace { dim: 2 };
    let prof = approximation_profile(
        &space,
        &ens,
        &Zero,
        &UnitTwist,
        &StartLaw::Stationary { depth: 10 },
        0,
        1.0,
        &[0, 1, 2],
        4,
        500,
        1,
    )
    .unwrap();
    assert_eq!(prof.c_alpha.value, 1.0);
    assert!(prof.rows.iter().all(|r| r.d_hat.value == 0.0 && r.n_theta.value == 0.0));
}

#[test]
fn profile_vanishes_beyond_lookahead() {
    let ens = fixture("proximal_d2");
    let space = PrimalSpace { dim: 2 };
    let f = LetterLogNorm { index: 2 };
    let prof = approximation_profile(
        &space,
        &ens,
        &f,
        &UnitTwist,
        &StartLaw::Stationary { depth: 10 },
        1,
        0.5,
        &[0, 1, 2, 3],
        8,
        2000,
        2,
    )
    .unwrap();
    assert!(prof.rows[0].d_hat.value > 0.0 && prof.rows[1].d_hat.value > 0.0);
    assert_eq!(prof.rows[2].d_hat.value, 0.0);
    assert_eq!(prof.rows[3].d_hat.value, 0.0);
}

#[test]
fn profile_of_boundary_bracket_decays() {
    let ens = fixture("proximal_d2");
    let space = DualReversedSpace { dim: 2 };
    let f = BoundaryDelta {
        x0: vec![1.0, 0.0],
        depth: 24,
    };
    let prof = approximation_profile(
        &space,
        &ens,
        &f,
        &UnitTwist,
        &StartLaw::Stationary { depth: 30 },
        0,
        0.5,
        &[1, 2, 3, 4, 5, 6],
        16,
        4000,
        3,
    )
    .unwrap();
    let fit = prof.log_fit.expect("enough positive rows");
    assert!(fit.slope_negative(0.95), "slope {} +- {}", fit.slope, fit.slope_stderr);
}

#[test]
fn chain_with_identity_letters() {
    let ens = Ensemble::new(EnsembleSpec::identity(2)).unwrap();
    let space = PrimalSpace { dim: 2 };
    let x = vec![0.6, 0.8];
    let init = ChainState::new(vec![GroupElement::identity(2); 3], x.clone(), 0).unwrap();
    let traj = simulate_chain(&space, &ens, &init, 5, &mut stream_rng(0, 0));
    assert_eq!(traj.states.len(), 6);
    for (k, s) in traj.states.iter().enumerate() {
        assert_eq!(s.counter, k);
        assert_eq!(s.letters.len(), 3);
        assert!((s.point[0] - 0.6).abs() < 1e-15 && (s.point[1] - 0.8).abs() < 1e-15);
    }
    assert!(traj.increments.iter().all(|&v| v.abs() < 1e-15));
    let w = estimate_w_chain(&space, &ens, &init, &Zero, 0.7, 4, 100, 1).unwrap();
    assert!((w.value - 0.7).abs() < 1e-12);
}

#[test]
fn chain_with_single_atom_applies_powers() {
    let a = vec![vec![2.0, 1.0], vec![1.0, 1.0]];
    let ens = Ensemble::new(EnsembleSpec::discrete(vec![a.clone()], vec![1.0])).unwrap();
    let g = GroupElement::from_rows(&a).unwrap();
    let space = PrimalSpace { dim: 2 };
    let x = ProjPoint::from_slice(&[1.0, -0.3]).unwrap();
    let init = ChainState::new(vec![g.clone(), g.clone()], x.coords().to_vec(), 0).unwrap();
    let traj = simulate_chain(&space, &ens, &init, 4, &mut stream_rng(0, 0));
    let mut y = x.clone();
    for k in 1..=4 {
        y = g.act(&y).unwrap();
        let p = ProjPoint::from_slice(&traj.states[k].point).unwrap();
        assert!(cocycle_lab::projective::sin_distance(&p, &y).unwrap() < 1e-12);
    }
}

#[test]
fn chain_one_step_law_matches_direct_sampling() {
    // a continuous law, so that the two samples have no ties
    let ens = centered_dr(&[0.5, -0.5]);
    let space = PrimalSpace { dim: 2 };
    let x = generic_point(2);
    let mut rng = stream_rng(3, 0);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..4000 {
        let init = ChainState::new(vec![ens.draw(&mut rng), ens.draw(&mut rng)], x.coords().to_vec(), 0).unwrap();
        let traj = simulate_chain(&space, &ens, &init, 1, &mut rng);
        a.push(traj.states[1].point[0].abs());
        let g = ens.draw(&mut rng);
        b.push(g.act(&x).unwrap().coords()[0].abs());
    }
    let d = ks_statistic(&a, &b);
    assert!(ks_p_value(d, a.len(), b.len()) > 0.01);
}

#[test]
fn chain_w_matches_oracle() {
    let ens = fixture("proximal_d2");
    let space = DualReversedSpace { dim: 2 };
    let (atoms, _) = ens.atoms().unwrap();
    let init = ChainState::new(vec![atoms[0].clone(), atoms[1].clone()], vec![0.6, 0.8], 0).unwrap();
    let f = BoundaryDelta {
        x0: vec![1.0, 0.0],
        depth: 1,
    };
    for &t in &[0.2, 1.0] {
        let exact = exact_w_chain(&space, &ens, &init, &f, t, 3).unwrap();
        let mc = estimate_w_chain(&space, &ens, &init, &f, t, 3, 100_000, 4).unwrap();
        assert!(mc.within(exact, 4.0), "t = {t}: {} vs {exact}", mc.value);
    }
}

#[test]
fn chain_rejects_long_lookahead() {
    let ens = fixture("proximal_d2");
    let space = DualReversedSpace { dim: 2 };
    let init = ChainState::new(vec![GroupElement::identity(2); 2], vec![0.6, 0.8], 0).unwrap();
    let f = BoundaryDelta {
        x0: vec![1.0, 0.0],
        depth: 3,
    };
    assert!(estimate_w_chain(&space, &ens, &init, &f, 0.0, 3, 100, 0).is_err());
}

#[test]
fn disintegration_identity() {
    let ens = fixture("proximal_d2");
    let space = DualReversedSpace { dim: 2 };
    let f = BoundaryDelta {
        x0: generic_point(2).coords().to_vec(),
        depth: 2,
    };
    let start = StartLaw::Stationary { depth: 3 };
    let (t, n, p) = (0.5, 3, 2);
    let chain = estimate_w_chain_averaged(&space, &ens, &f, t, n, p, 100_000, &start, 21).unwrap();
    let direct = estimate_i1(&space, &ens, &f, &start, t, n, p, 100_000, 22)
        .unwrap()
        .estimate;
    let exact = exact_i1(&space, &ens, &f, &start, t, n, p).unwrap();
    assert!(within_sigma(
        chain.value - direct.value,
        chain.stderr.hypot(direct.stderr),
        3.0
    ));
    assert!(chain.within(exact, 4.0), "{} vs {exact}", chain.value);
}

#[test]
fn martingale_increments_vanish_for_isometries() {
    for ens in [
        Ensemble::new(EnsembleSpec::identity(2)).unwrap(),
        Ensemble::new(EnsembleSpec::rotations(3)).unwrap(),
    ] {
        let space = PrimalSpace { dim: ens.dim() };
        let rows = martingale_residual(&space, &ens, 2, 5, 500, &StartLaw::Stationary { depth: 5 }, 1).unwrap();
        assert!(rows.iter().all(|r| r.mean.value.abs() < 1e-12));
    }
}

#[test]
fn martingale_increments_are_centered() {
    let ens = centered_dr(&[0.5, -0.5]);
    let space = PrimalSpace { dim: 2 };
    let rows = martingale_residual(&space, &ens, 1, 6, 50_000, &StartLaw::Stationary { depth: 20 }, 2).unwrap();
    for r in rows.iter().filter(|r| r.mean.n_samples > 100) {
        assert!(r.mean.within(0.0, 4.0), "k = {} {:?}: {}", r.k, r.block, r.mean.value);
    }
}

#[test]
fn scan_unperturbed_has_no_zero_shift_violations() {
    let ens = centered_dr(&[0.5, -0.5]);
    let space = PrimalSpace { dim: 2 };
    let rep = quasi_monotonicity_scan(
        &space,
        &ens,
        &Zero,
        &UnitTwist,
        &StartLaw::Stationary { depth: 20 },
        &[0.0, 0.5, 2.0],
        &[4, 8, 16],
        20_000,
        ScanConfig {
            check_converse: false,
            ..ScanConfig::default()
        },
        3,
    )
    .unwrap();
    assert_eq!(rep.zero_shift_violations, 0);
    assert_eq!(rep.fitted_a, Some(0.0));
    let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    let cell = &json["cells"][0];
    for key in ["n", "m", "t", "lhs", "rhs", "stderr", "pass"] {
        assert!(cell.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn scan_identity_is_flat_in_both_directions() {
    let ens = Ensemble::new(EnsembleSpec::identity(2)).unwrap();
    let space = PrimalSpace { dim: 2 };
    let rep = quasi_monotonicity_scan(
        &space,
        &ens,
        &Zero,
        &UnitTwist,
        &StartLaw::Stationary { depth: 3 },
        &[0.0, 1.0],
        &[2, 4],
        500,
        ScanConfig::default(),
        4,
    )
    .unwrap();
    assert_eq!(rep.fitted_a, Some(0.0));
    assert!(rep.cells.iter().all(|c| c.pass && (c.lhs - c.rhs).abs() < 1e-12));
}
