//! Self-check of the closed-form robust values against the simplex oracle
//! and of weak duality for the conjugate dual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::divergence::{
    default_lambda_grid, dual_objective, robust_value_chi2, robust_value_kl, robust_value_tv, worst_case_oracle,
    DivergenceKind, DualPoint,
};
use crate::engine::linspace;
use crate::error::{DrboError, Result};
use crate::gp::log_space;

type PlainForm = fn(&[f64], &[f64], f64) -> Result<f64>;
type KlForm = fn(&[f64], &[f64], f64, &[f64]) -> Result<f64>;

/// The closed forms under test. Swappable so the checker itself can be tested.
#[derive(Clone, Copy)]
pub struct ClosedForms {
    pub chi2: PlainForm,
    pub tv: PlainForm,
    pub kl: KlForm,
}

impl Default for ClosedForms {
    fn default() -> Self {
        ClosedForms {
            chi2: robust_value_chi2,
            tv: robust_value_tv,
            kl: robust_value_kl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceProfile {
    pub name: String,
    pub instances: usize,
    pub support: usize,
    pub radii: Vec<f64>,
    pub oracle_step: f64,
    /// Closed form vs oracle, χ² and TV.
    pub tol_chi2_tv: f64,
    /// Closed form vs oracle, KL.
    pub tol_kl: f64,
    pub tol_weak_duality: f64,
    /// Points per axis of the `(λ, b)` dual grid.
    pub dual_grid: usize,
    pub seed: u64,
}

impl ToleranceProfile {
    pub fn default_profile() -> Self {
        ToleranceProfile {
            name: "default".into(),
            instances: 50,
            support: 3,
            radii: vec![0.01, 0.05, 0.1],
            oracle_step: 0.005,
            tol_chi2_tv: 1e-2,
            tol_kl: 2e-2,
            tol_weak_duality: 1e-3,
            dual_grid: 40,
            seed: 0,
        }
    }

    /// Fewer instances on a coarser oracle grid.
    pub fn quick() -> Self {
        ToleranceProfile {
            name: "quick".into(),
            instances: 10,
            oracle_step: 0.01,
            ..Self::default_profile()
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default_profile()),
            "quick" => Ok(Self::quick()),
            other => Err(DrboError::config(format!(
                "unknown tolerance profile '{other}'; valid options: default, quick"
            ))),
        }
    }

    /// Seeded random value vectors in `[−1, 1]^support`.
    pub fn instances(&self) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.instances)
            .map(|_| (0..self.support).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub divergence: DivergenceKind,
    pub passed: bool,
    /// Largest observed violation (absolute gap or excess).
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
}

fn closed_form(forms: &ClosedForms, kind: DivergenceKind, f: &[f64], w: &[f64], eps: f64, lambdas: &[f64]) -> Result<f64> {
    match kind {
        DivergenceKind::Chi2 => (forms.chi2)(f, w, eps),
        DivergenceKind::TotalVariation => (forms.tv)(f, w, eps),
        DivergenceKind::Kl => (forms.kl)(f, w, eps, lambdas),
    }
}

/// Best dual value over a `grid × grid` lattice of `(λ, b)`.
pub fn grid_dual_sup(kind: DivergenceKind, f: &[f64], w: &[f64], eps: f64, grid: usize) -> Result<f64> {
    let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best = f64::NEG_INFINITY;
    for lambda in log_space(1e-2, 1e2, grid) {
        for b in linspace(lo - 2.0, hi + 2.0, grid) {
            best = best.max(dual_objective(kind, f, w, eps, DualPoint { lambda, b })?);
        }
    }
    Ok(best)
}

/// Runs every check, optionally restricted to one divergence.
pub fn run_verify(
    profile: &ToleranceProfile,
    only: Option<DivergenceKind>,
    forms: &ClosedForms,
) -> Result<Vec<CheckResult>> {
    let instances = profile.instances();
    let weights = vec![1.0 / profile.support as f64; profile.support];
    let lambdas = default_lambda_grid();
    let kinds: Vec<DivergenceKind> = match only {
        Some(k) => vec![k],
        None => DivergenceKind::ALL.to_vec(),
    };

    let mut out = Vec::new();
    for kind in kinds {
        let tol = match kind {
            DivergenceKind::Kl => profile.tol_kl,
            _ => profile.tol_chi2_tv,
        };
        let mut worst_gap: f64 = 0.0;
        let mut worst_excess: f64 = f64::NEG_INFINITY;
        let mut cases = 0;
        for f in &instances {
            for &eps in &profile.radii {
                let oracle = worst_case_oracle(kind, f, &weights, eps, profile.oracle_step)?.value;
                let cf = closed_form(forms, kind, f, &weights, eps, &lambdas)?;
                let gap = (cf - oracle).abs();
                worst_gap = if gap.is_nan() { f64::INFINITY } else { worst_gap.max(gap) };
                let dual = grid_dual_sup(kind, f, &weights, eps, profile.dual_grid)?;
                worst_excess = worst_excess.max(dual - oracle);
                cases += 1;
            }
        }
        out.push(CheckResult {
            check: "closed_form_vs_oracle".into(),
            divergence: kind,
            passed: worst_gap <= tol,
            worst: worst_gap,
            tolerance: tol,
            cases,
        });
        out.push(CheckResult {
            check: "weak_duality".into(),
            divergence: kind,
            passed: worst_excess <= profile.tol_weak_duality,
            worst: worst_excess,
            tolerance: profile.tol_weak_duality,
            cases,
        });
    }
    Ok(out)
}
