//! GP predictions against a dense-inverse evaluation of the textbook equations,
//! plus Monte-Carlo sanity checks of likelihood-based model selection.

use drbo::gp::{default_hyperparameter_grid, log_space, GpPosterior};
use drbo::{fit_hyperparams, gp_fit, log_marginal_likelihood, Dataset, JointInput, KernelKind, KernelSpec, Surrogate};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_dataset(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    Dataset::from_rows((0..n).map(|_| {
        (
            JointInput::new(vec![rng.random_range(0.0..1.0)], rng.random_range(0.0..1.0)),
            rng.random_range(-2.0..2.0),
        )
    }))
    .unwrap()
}

/// `μ = k*ᵀ A⁻¹ y`, `σ² = k** − k*ᵀ A⁻¹ k*` with `A⁻¹` from an LU inverse.
fn dense_inverse_predict(post: &GpPosterior, z: &[f64]) -> (f64, f64) {
    let spec = post.kernel();
    let data = post.dataset();
    let n = data.len();
    let pts: Vec<Vec<f64>> = data.inputs().iter().map(JointInput::to_joint).collect();
    let mut a = DMatrix::from_fn(n, n, |i, j| spec.eval_slices(&pts[i], &pts[j]));
    for i in 0..n {
        a[(i, i)] += spec.noise_variance + post.jitter();
    }
    let inv = a.try_inverse().expect("invertible");
    let k = DVector::from_iterator(n, pts.iter().map(|p| spec.eval_slices(z, p)));
    let y = DVector::from_column_slice(data.targets());
    let mean = (k.transpose() * &inv * y)[0];
    let var = spec.signal_variance - (k.transpose() * &inv * &k)[0];
    (mean, var)
}

#[test]
fn cholesky_matches_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..40 {
        let n = 1 + trial % 8;
        let data = random_dataset(&mut rng, n);
        let kind = if trial % 2 == 0 { KernelKind::SquaredExponential } else { KernelKind::Matern52 };
        let spec = KernelSpec::isotropic(kind, 2, rng.random_range(0.2..1.5), rng.random_range(0.5..2.0), 0.01).unwrap();
        let post = gp_fit(&data, &spec).unwrap();
        for q in 0..50 {
            let z = [q as f64 / 49.0, rng.random_range(0.0..1.0)];
            let (m, v) = post.predict_joint(&z).unwrap();
            let (mo, vo) = dense_inverse_predict(&post, &z);
            assert!((m - mo).abs() <= 1e-8, "mean {m} vs {mo}");
            assert!((v - vo.max(0.0)).abs() <= 1e-8, "var {v} vs {vo}");
            assert!(v >= 0.0 && v <= spec.signal_variance + 1e-9);
        }
    }
}

#[test]
fn noise_free_fit_interpolates_training_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data = random_dataset(&mut rng, 8);
    let spec = KernelSpec::isotropic(KernelKind::SquaredExponential, 2, 0.3, 1.0, 0.0).unwrap();
    let post = gp_fit(&data, &spec).unwrap();
    for (z, y) in data.inputs().iter().zip(data.targets()) {
        let (m, _) = post.predict(z).unwrap();
        // Exact up to the diagonal jitter, which scales the residual by |α|.
        assert!((m - y).abs() <= 1e-4, "{m} vs {y}");
    }
}

/// Draws targets from the GP prior with the given kernel at random inputs.
fn sample_prior(rng: &mut ChaCha8Rng, spec: &KernelSpec, n: usize) -> Dataset {
    let pts: Vec<JointInput> = (0..n)
        .map(|_| JointInput::new(vec![rng.random_range(0.0..1.0)], rng.random_range(0.0..1.0)))
        .collect();
    let joint: Vec<Vec<f64>> = pts.iter().map(JointInput::to_joint).collect();
    let mut k = DMatrix::from_fn(n, n, |i, j| spec.eval_slices(&joint[i], &joint[j]));
    for i in 0..n {
        k[(i, i)] += spec.noise_variance + 1e-10;
    }
    let l = k.cholesky().unwrap().unpack();
    let e = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let y = l * e;
    Dataset::from_rows(pts.into_iter().zip(y.iter().cloned())).unwrap()
}

#[test]
fn likelihood_prefers_true_lengthscale() {
    let mut wins = 0;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let truth = KernelSpec::isotropic(KernelKind::SquaredExponential, 2, 0.5, 1.0, 1e-2).unwrap();
        let data = sample_prior(&mut rng, &truth, 30);
        let wide = KernelSpec::isotropic(KernelKind::SquaredExponential, 2, 2.0, 1.0, 1e-2).unwrap();
        if log_marginal_likelihood(&data, &truth).unwrap() >= log_marginal_likelihood(&data, &wide).unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 8, "only {wins}/10");
}

#[test]
fn grid_search_recovers_lengthscale() {
    let ls = log_space(0.05, 2.0, 8);
    let truth_idx = 3;
    let mut hits = 0;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
        let truth = KernelSpec::isotropic(KernelKind::SquaredExponential, 2, ls[truth_idx], 1.0, 1e-2).unwrap();
        let data = sample_prior(&mut rng, &truth, 40);
        let grid: Vec<KernelSpec> = ls
            .iter()
            .map(|l| KernelSpec::isotropic(KernelKind::SquaredExponential, 2, *l, 1.0, 1e-2).unwrap())
            .collect();
        let best = fit_hyperparams(&data, &grid).unwrap();
        let idx = ls.iter().position(|l| *l == best.lengthscales[0]).unwrap();
        if idx.abs_diff(truth_idx) <= 1 {
            hits += 1;
        }
    }
    assert!(hits >= 7, "only {hits}/10");
}

#[test]
fn default_grid_fits_benchmark_scale_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = random_dataset(&mut rng, 12);
    let grid = default_hyperparameter_grid(KernelKind::Matern52, &[1.0, 1.0], 1e-2);
    let spec = fit_hyperparams(&data, &grid).unwrap();
    let post = gp_fit(&data, &spec).unwrap();
    let preds = post.predict_contexts(&[0.5], &[0.0, 0.5, 1.0]);
    assert!(preds.iter().all(|(m, v)| m.is_finite() && *v >= 0.0));
}
