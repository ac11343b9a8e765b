//! Stationary covariance functions over the joint input-context space.

use serde::{Deserialize, Serialize};

use crate::error::{DrboError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    SquaredExponential,
    Matern52,
}

/// Kernel family plus its hyperparameters.
///
/// `lengthscales` has one entry per joint dimension (the input dimensions
/// followed by the context dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn new(
        kind: KernelKind,
        lengthscales: Vec<f64>,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        let spec = KernelSpec {
            kind,
            lengthscales,
            signal_variance,
            noise_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Isotropic kernel with the same lengthscale on every joint dimension.
    pub fn isotropic(
        kind: KernelKind,
        dim: usize,
        lengthscale: f64,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        Self::new(kind, vec![lengthscale; dim], signal_variance, noise_variance)
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengthscales.is_empty() {
            return Err(DrboError::config("kernel needs at least one lengthscale"));
        }
        if let Some(l) = self
            .lengthscales
            .iter()
            .find(|l| !(l.is_finite() && **l > 0.0))
        {
            return Err(DrboError::config(format!("lengthscale must be > 0, got {l}")));
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(DrboError::config(format!(
                "signal variance must be > 0, got {}",
                self.signal_variance
            )));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(DrboError::config(format!(
                "noise variance must be >= 0, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }

    /// Covariance between two points given as flat joint coordinates.
    ///
    /// Callers must pass slices of length `self.dim()`; use [`kernel_eval`] for
    /// a checked entry point.
    #[inline]
    pub fn eval_slices(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.lengthscales.len());
        debug_assert_eq!(b.len(), self.lengthscales.len());
        let r2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((ai, bi), l)| {
                let d = (ai - bi) / l;
                d * d
            })
            .sum();
        self.profile(r2)
    }

    #[inline]
    fn profile(&self, r2: f64) -> f64 {
        match self.kind {
            KernelKind::SquaredExponential => self.signal_variance * (-0.5 * r2).exp(),
            KernelKind::Matern52 => {
                let s5r = (5.0 * r2).sqrt();
                self.signal_variance * (1.0 + s5r + 5.0 * r2 / 3.0) * (-s5r).exp()
            }
        }
    }
}

/// A point `[x, c]` of the joint space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointInput {
    pub x: Vec<f64>,
    pub c: f64,
}

impl JointInput {
    pub fn new(x: Vec<f64>, c: f64) -> Self {
        JointInput { x, c }
    }

    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }

    /// Concatenated coordinates, context last.
    pub fn to_joint(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.x);
        v.push(self.c);
        v
    }
}

/// Checked kernel evaluation.
pub fn kernel_eval(spec: &KernelSpec, a: &JointInput, b: &JointInput) -> Result<f64> {
    if a.dim() != spec.dim() || b.dim() != spec.dim() {
        return Err(DrboError::config(format!(
            "kernel has {} dimensions but inputs have {} and {}",
            spec.dim(),
            a.dim(),
            b.dim()
        )));
    }
    Ok(spec.eval_slices(&a.to_joint(), &b.to_joint()))
}
