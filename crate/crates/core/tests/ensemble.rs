mod common;

use cocycle_lab::ensemble::{equivariance_residual, CenterConfig, Ensemble, EnsembleSpec};
use cocycle_lab::exec::stream_rng;
use cocycle_lab::projective::{DualProjPoint, ProjPoint};
use cocycle_lab::stats::{ks_p_value, ks_statistic, linear_fit, within_sigma};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain long run of `{A, A^-1}`, `A = [[2,1],[1,1]]`, with batch-means error.
fn cat_map_reference(steps: usize, batches: usize) -> (f64, f64) {
    let mats = [[2.0, 1.0, 1.0, 1.0], [1.0, -1.0, -1.0, 2.0]];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut v = [1.0f64, 0.0];
    let per = steps / batches;
    let mut means = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut s = 0.0;
        for _ in 0..per {
            let m = &mats[rng.random_range(0..2)];
            let w = [m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]];
            let norm = w[0].hypot(w[1]);
            s += norm.ln();
            v = [w[0] / norm, w[1] / norm];
        }
        means.push(s / per as f64);
    }
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

#[test]
fn lyapunov_of_cat_map_pair() {
    let (reference, ref_err) = cat_map_reference(10_000_000, 100);
    let ens = Ensemble::new(EnsembleSpec::discrete(
        vec![
            vec![vec![2.0, 1.0], vec![1.0, 1.0]],
            vec![vec![1.0, -1.0], vec![-1.0, 2.0]],
        ],
        vec![0.5, 0.5],
    ))
    .unwrap();
    let est = ens.estimate_lyapunov(20_000, 50, 17);
    assert!(reference > 0.0, "{reference}");
    assert!(
        within_sigma(est.lambda_hat - reference, est.stderr.hypot(ref_err), 3.0),
        "{est:?} vs {reference} +- {ref_err}"
    );
}

#[test]
fn gaussian_perturbed_centering() {
    let ens = Ensemble::new(EnsembleSpec::gaussian_perturbed(3, 0.3)).unwrap();
    let cfg = CenterConfig {
        seed: 5,
        ..Default::default()
    };
    let once = ens.center(1e-3, cfg).unwrap();
    let check = once.estimate_lyapunov(cfg.steps, cfg.replicas, 99);
    assert!(check.lambda_hat.abs() <= 1e-3 + 3.0 * check.stderr, "{check:?}");
    // centering twice does not move the exponent further from zero
    let twice = once.center(1e-3, CenterConfig { seed: 6, ..cfg }).unwrap();
    let again = twice.estimate_lyapunov(cfg.steps, cfg.replicas, 99);
    assert!(again.lambda_hat.abs() <= check.lambda_hat.abs() + 3.0 * again.stderr.hypot(check.stderr));
}

fn projections<'a>(points: impl Iterator<Item = &'a [f64]> + Clone) -> Vec<Vec<f64>> {
    let dirs = [[1.0, 0.0], [0.6, 0.8], [-0.28, 0.96]];
    dirs.iter()
        .map(|w| points.clone().map(|p| (p[0] * w[0] + p[1] * w[1]).abs()).collect())
        .collect()
}

fn ks_passes(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    // Bonferroni over the three projections at overall level 0.01
    a.iter()
        .zip(b)
        .all(|(x, y)| ks_p_value(ks_statistic(x, y), x.len(), y.len()) > 0.01 / 3.0)
}

#[test]
fn primal_sampler_is_stationary() {
    let ens = fixture("proximal_d2");
    let mut rng = stream_rng(3, 0);
    let xs: Vec<ProjPoint> = (0..10_000)
        .map(|_| ens.sample_nu(50, &ProjPoint::diagonal(2), &mut rng))
        .collect();
    let moved: Vec<ProjPoint> = (0..10_000)
        .map(|_| {
            let x = ens.sample_nu(50, &ProjPoint::diagonal(2), &mut rng);
            ens.draw(&mut rng).act(&x).unwrap()
        })
        .collect();
    let a = projections(xs.iter().map(|p| p.coords()));
    let b = projections(moved.iter().map(|p| p.coords()));
    assert!(ks_passes(&a, &b));
}

#[test]
fn dual_sampler_is_stationary_for_inverse_law() {
    let ens = fixture("proximal_d2");
    let y0 = DualProjPoint::diagonal(2);
    let mut rng = stream_rng(4, 0);
    let ys: Vec<DualProjPoint> = (0..10_000).map(|_| ens.sample_nu_dual(50, &y0, &mut rng)).collect();
    let moved: Vec<DualProjPoint> = (0..10_000)
        .map(|_| {
            let y = ens.sample_nu_dual(50, &y0, &mut rng);
            ens.draw_inverse(&mut rng).act_dual(&y).unwrap()
        })
        .collect();
    let a = projections(ys.iter().map(|p| p.coords()));
    let b = projections(moved.iter().map(|p| p.coords()));
    assert!(ks_passes(&a, &b));
}

#[test]
fn sampler_depth_20_and_40_agree() {
    let ens = fixture("proximal_d2");
    let mut rng = stream_rng(8, 0);
    let x0 = ProjPoint::diagonal(2);
    let proj = |depth: usize, rng: &mut _| -> Vec<f64> {
        (0..10_000)
            .map(|_| ens.sample_nu(depth, &x0, rng).coords()[0].abs())
            .collect()
    };
    let a = proj(20, &mut rng);
    let b = proj(40, &mut rng);
    let d = ks_statistic(&a, &b);
    assert!(d < 0.03, "KS {d}");
}

#[test]
fn equivariance_residual_at_depth_30() {
    let ens = fixture("proximal_d2");
    let mut rng = stream_rng(9, 0);
    let x0 = ProjPoint::diagonal(2);
    let mut res: Vec<f64> = (0..1_000)
        .map(|_| {
            let letters: Vec<_> = (0..31).map(|_| ens.draw(&mut rng)).collect();
            equivariance_residual(&letters, &x0).unwrap()
        })
        .collect();
    res.sort_by(f64::total_cmp);
    assert!(res[500] < 1e-6, "median {}", res[500]);
}

#[test]
fn two_atom_contraction_slope_is_negative() {
    let ens = fixture("proximal_d2");
    let ns: Vec<usize> = (1..=12).map(|k| 2 * k).collect();
    let p = ens.contraction_profile(&ns, 20_000, 0.05, 10).unwrap();
    let (xs, ys): (Vec<f64>, Vec<f64>) = p
        .rows
        .iter()
        .filter(|r| r.fraction > 0.0)
        .map(|r| (r.n as f64, r.fraction.ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys).unwrap();
    assert!(fit.slope_negative(0.95), "{fit:?}");
}

#[test]
fn equal_seeds_give_equal_streams() {
    let ens = Ensemble::new(EnsembleSpec::gaussian_perturbed(3, 0.3)).unwrap();
    let (mut a, mut b) = (stream_rng(1, 2), stream_rng(1, 2));
    for _ in 0..100 {
        assert_eq!(ens.draw(&mut a).mat(), ens.draw(&mut b).mat());
    }
    assert_eq!(ens.estimate_lyapunov(500, 4, 7), ens.estimate_lyapunov(500, 4, 7));
}
