//! Exact Gaussian-process regression on the joint `[x, c]` space.
//!
//! The posterior keeps the Cholesky factor of `K + (σ_f² + jitter)·I` and the
//! weight vector `α = (K + σ_f²·I)⁻¹ y`; predictions never form an inverse.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{DrboError, Result};
use crate::kernel::{JointInput, KernelKind, KernelSpec};

/// Relative jitter added to the diagonal before the first factorization attempt.
pub const BASE_JITTER: f64 = 1e-8;
/// Largest relative jitter tried before giving up.
pub const MAX_JITTER: f64 = 1e-4;

/// Observed `(x, c, y)` triples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    inputs: Vec<JointInput>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: impl IntoIterator<Item = (JointInput, f64)>) -> Result<Self> {
        let mut d = Dataset::new();
        for (z, y) in rows {
            d.push(z, y)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, input: JointInput, y: f64) -> Result<()> {
        if let Some(first) = self.inputs.first() {
            if first.dim() != input.dim() {
                return Err(DrboError::config(format!(
                    "dataset rows have dimension {} but got {}",
                    first.dim(),
                    input.dim()
                )));
            }
        }
        if !y.is_finite() {
            return Err(DrboError::domain(format!("non-finite observation {y}")));
        }
        self.inputs.push(input);
        self.targets.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[JointInput] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Joint dimension `d_x + 1`, or `None` for an empty dataset.
    pub fn joint_dim(&self) -> Option<usize> {
        self.inputs.first().map(JointInput::dim)
    }
}

/// Anything that answers predictive mean and variance at `(x, c)`.
///
/// Acquisition functions are written against this trait so they can be
/// exercised on planted surrogates as well as fitted GPs.
pub trait Surrogate: Sync {
    fn predict_xc(&self, x: &[f64], c: f64) -> (f64, f64);

    /// Predictions at `x` paired with every context in `contexts`.
    fn predict_contexts(&self, x: &[f64], contexts: &[f64]) -> Vec<(f64, f64)> {
        contexts.iter().map(|&c| self.predict_xc(x, c)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitOptions {
    /// Subtract the target mean before fitting and add it back to predictions.
    pub center_targets: bool,
}

/// A fitted GP. Immutable; safe to share across threads for prediction.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    dataset: Dataset,
    kernel: KernelSpec,
    /// Row-major training points, `n × dim`.
    train: Vec<f64>,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
    offset: f64,
}

/// Fit a zero-mean GP posterior to `dataset`.
pub fn gp_fit(dataset: &Dataset, spec: &KernelSpec) -> Result<GpPosterior> {
    GpPosterior::fit_with(dataset, spec, FitOptions::default())
}

impl GpPosterior {
    pub fn fit_with(dataset: &Dataset, spec: &KernelSpec, opts: FitOptions) -> Result<Self> {
        spec.validate()?;
        let dim = dataset
            .joint_dim()
            .ok_or_else(|| DrboError::config("cannot fit a GP to an empty dataset"))?;
        if dim != spec.dim() {
            return Err(DrboError::config(format!(
                "kernel has {} lengthscales but data has joint dimension {dim}",
                spec.dim()
            )));
        }
        let n = dataset.len();
        let mut train = Vec::with_capacity(n * dim);
        for z in dataset.inputs() {
            train.extend_from_slice(&z.x);
            train.push(z.c);
        }
        let gram = gram_matrix(spec, &train, dim, n);
        let (chol, jitter) = factor_with_jitter(&gram, spec)?;

        let offset = if opts.center_targets {
            dataset.targets().iter().sum::<f64>() / n as f64
        } else {
            0.0
        };
        let y = DVector::from_iterator(n, dataset.targets().iter().map(|y| y - offset));
        let alpha = cholesky_solve(&chol, &y);
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(DrboError::numerical("non-finite GP weight vector"));
        }

        Ok(GpPosterior {
            dataset: dataset.clone(),
            kernel: spec.clone(),
            train,
            chol,
            alpha,
            jitter,
            offset,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// Lower-triangular factor `L` with `L·Lᵀ = K + (σ_f² + jitter)·I`.
    pub fn chol_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Absolute jitter that was added to the diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn cross_cov(&self, z: &[f64]) -> DVector<f64> {
        let dim = self.dim();
        DVector::from_iterator(
            self.dataset.len(),
            self.train
                .chunks_exact(dim)
                .map(|row| self.kernel.eval_slices(z, row)),
        )
    }

    /// Predictive mean and variance of the latent function at a joint point.
    pub fn predict_joint(&self, z: &[f64]) -> Result<(f64, f64)> {
        if z.len() != self.dim() {
            return Err(DrboError::config(format!(
                "query has dimension {} but the GP expects {}",
                z.len(),
                self.dim()
            )));
        }
        Ok(self.predict_unchecked(z))
    }

    fn predict_unchecked(&self, z: &[f64]) -> (f64, f64) {
        let mut k = self.cross_cov(z);
        let mean = self.offset + k.dot(&self.alpha);
        self.chol.solve_lower_triangular_mut(&mut k);
        let var = (self.kernel.signal_variance - k.norm_squared()).max(0.0);
        (mean, var)
    }

    pub fn predict(&self, z: &JointInput) -> Result<(f64, f64)> {
        self.predict_joint(&z.to_joint())
    }

    /// `−½ yᵀα − Σ log L_ii − (t/2) log 2π` for the fitted data.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.dataset.len();
        let y = DVector::from_iterator(n, self.dataset.targets().iter().map(|y| y - self.offset));
        let log_det_half: f64 = self.chol.diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * y.dot(&self.alpha) - log_det_half - 0.5 * n as f64 * (2.0 * PI).ln()
    }
}

impl Surrogate for GpPosterior {
    fn predict_xc(&self, x: &[f64], c: f64) -> (f64, f64) {
        let mut z = Vec::with_capacity(x.len() + 1);
        z.extend_from_slice(x);
        z.push(c);
        self.predict_unchecked(&z)
    }

    fn predict_contexts(&self, x: &[f64], contexts: &[f64]) -> Vec<(f64, f64)> {
        let n = self.dataset.len();
        let m = contexts.len();
        let dim = self.dim();
        let mut z = Vec::with_capacity(dim);
        z.extend_from_slice(x);
        z.push(0.0);
        let mut cross = DMatrix::<f64>::zeros(n, m);
        for (j, &c) in contexts.iter().enumerate() {
            z[dim - 1] = c;
            for (i, row) in self.train.chunks_exact(dim).enumerate() {
                cross[(i, j)] = self.kernel.eval_slices(&z, row);
            }
        }
        let means = cross.tr_mul(&self.alpha);
        self.chol.solve_lower_triangular_mut(&mut cross);
        let sv = self.kernel.signal_variance;
        (0..m)
            .map(|j| {
                let var = (sv - cross.column(j).norm_squared()).max(0.0);
                (self.offset + means[j], var)
            })
            .collect()
    }
}

fn gram_matrix(spec: &KernelSpec, train: &[f64], dim: usize, n: usize) -> DMatrix<f64> {
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let zi = &train[i * dim..(i + 1) * dim];
        for j in 0..=i {
            let v = spec.eval_slices(zi, &train[j * dim..(j + 1) * dim]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += spec.noise_variance;
    }
    k
}

fn factor_with_jitter(gram: &DMatrix<f64>, spec: &KernelSpec) -> Result<(DMatrix<f64>, f64)> {
    let mut rel = BASE_JITTER;
    while rel <= MAX_JITTER * (1.0 + 1e-9) {
        let jitter = rel * spec.signal_variance;
        let mut a = gram.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += jitter;
        }
        if let Some(ch) = a.cholesky() {
            let l = ch.unpack();
            if l.diagonal().iter().all(|d| d.is_finite() && *d > 0.0) {
                return Ok((l, jitter));
            }
        }
        rel *= 10.0;
    }
    let eig = gram.clone().symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Err(DrboError::numerical(format!(
        "Cholesky failed for {n}x{n} kernel matrix after jitter {:.1e}; eigenvalues in [{min:.3e}, {max:.3e}], condition ~{:.3e}",
        MAX_JITTER * spec.signal_variance,
        max / min.abs().max(f64::MIN_POSITIVE),
        n = gram.nrows(),
    )))
}

fn cholesky_solve(l: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut v = y.clone();
    l.solve_lower_triangular_mut(&mut v);
    l.tr_solve_lower_triangular_mut(&mut v);
    v
}

/// Log marginal likelihood of `dataset` under `spec`.
pub fn log_marginal_likelihood(dataset: &Dataset, spec: &KernelSpec) -> Result<f64> {
    Ok(gp_fit(dataset, spec)?.log_marginal_likelihood())
}

/// Grid search over kernel specs by log marginal likelihood; ties keep the earliest.
pub fn fit_hyperparams(dataset: &Dataset, grid: &[KernelSpec]) -> Result<KernelSpec> {
    fit_hyperparams_with(dataset, grid, FitOptions::default())
}

pub fn fit_hyperparams_with(
    dataset: &Dataset,
    grid: &[KernelSpec],
    opts: FitOptions,
) -> Result<KernelSpec> {
    if grid.is_empty() {
        return Err(DrboError::config("hyperparameter grid is empty"));
    }
    let mut best: Option<(f64, &KernelSpec)> = None;
    let mut last_err = None;
    for spec in grid {
        match GpPosterior::fit_with(dataset, spec, opts) {
            Ok(post) => {
                let lml = post.log_marginal_likelihood();
                if lml.is_finite() && best.is_none_or(|(b, _)| lml > b) {
                    best = Some((lml, spec));
                }
            }
            Err(e @ DrboError::Config(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((_, spec)) => Ok(spec.clone()),
        None => Err(last_err
            .unwrap_or_else(|| DrboError::numerical("no grid entry gave a finite likelihood"))),
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// Default search space: 8 log-spaced lengthscale factors in `[0.05, 2]`
/// times each joint dimension's width, signal variance in `{0.5, 1, 2}`.
pub fn default_hyperparameter_grid(
    kind: KernelKind,
    joint_widths: &[f64],
    noise_variance: f64,
) -> Vec<KernelSpec> {
    let mut grid = Vec::with_capacity(24);
    for sv in [0.5, 1.0, 2.0] {
        for factor in log_space(0.05, 2.0, 8) {
            grid.push(KernelSpec {
                kind,
                lengthscales: joint_widths.iter().map(|w| w * factor).collect(),
                signal_variance: sv,
                noise_variance,
            });
        }
    }
    grid
}
