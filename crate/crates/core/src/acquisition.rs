//! Acquisition functions and their maximizer.
//!
//! Every acquisition is built from the per-context UCB values
//! `u_j(x) = μ(x, c_j) + √β·σ(x, c_j)` over a sampled [`ContextSet`]:
//!
//! | kind        | value                                                   |
//! |-------------|---------------------------------------------------------|
//! | `DroChi2`   | `E_p[u] − √(ε · Var_p[μ])`                              |
//! | `DroTv`     | `E_p[u] − (ε/2)(max_j μ_j − min_j μ_j)`                 |
//! | `DroKl`     | `max_λ −λε − λ log E_p[exp(−u/λ)]`                      |
//! | `Ucb`       | `E_p[u]`                                                |
//! | `StableOpt` | `min_j u_j`                                             |
//! | `Random`    | `0`; the maximizer draws uniformly instead              |

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{self, default_lambda_grid, ContextSet};
use crate::error::{DrboError, Result};
use crate::gp::Surrogate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExplorationSchedule {
    Constant(f64),
    /// `√β_t = scale · √(2 log(t² π² / 6))`
    LogGrowth(f64),
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        ExplorationSchedule::Constant(2.0)
    }
}

impl ExplorationSchedule {
    pub fn sqrt_beta(&self, t: usize) -> f64 {
        match *self {
            ExplorationSchedule::Constant(b) => b,
            ExplorationSchedule::LogGrowth(scale) => {
                let t = t.max(1) as f64;
                let arg = t * t * std::f64::consts::PI.powi(2) / 6.0;
                scale * (2.0 * arg.ln()).max(0.0).sqrt()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            ExplorationSchedule::Constant(b) | ExplorationSchedule::LogGrowth(b) => b,
        };
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(DrboError::config(format!("exploration weight must be >= 0, got {v}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KlLambda {
    Grid,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AcquisitionKind {
    DroChi2,
    DroTv,
    DroKl(KlLambda),
    Ucb,
    StableOpt,
    Random,
}

/// Names accepted by [`AcquisitionKind::from_name`].
pub const ACQUISITION_NAMES: [&str; 8] = [
    "dro_chi2", "dro_tv", "dro_kl", "dro_kl_l1", "dro_kl_l5", "ucb", "stableopt", "random",
];

impl AcquisitionKind {
    pub fn name(&self) -> String {
        match self {
            AcquisitionKind::DroChi2 => "dro_chi2".into(),
            AcquisitionKind::DroTv => "dro_tv".into(),
            AcquisitionKind::DroKl(KlLambda::Grid) => "dro_kl".into(),
            AcquisitionKind::DroKl(KlLambda::Fixed(l)) => format!("dro_kl_l{l}"),
            AcquisitionKind::Ucb => "ucb".into(),
            AcquisitionKind::StableOpt => "stableopt".into(),
            AcquisitionKind::Random => "random".into(),
        }
    }

    /// Parses `dro_chi2`, `dro_tv`, `dro_kl`, `dro_kl_l<λ>`, `ucb`, `stableopt`, `random`.
    pub fn from_name(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        let kind = match s.as_str() {
            "dro_chi2" => AcquisitionKind::DroChi2,
            "dro_tv" => AcquisitionKind::DroTv,
            "dro_kl" => AcquisitionKind::DroKl(KlLambda::Grid),
            "ucb" | "bo" => AcquisitionKind::Ucb,
            "stableopt" => AcquisitionKind::StableOpt,
            "random" => AcquisitionKind::Random,
            other => match other.strip_prefix("dro_kl_l").map(str::parse::<f64>) {
                Some(Ok(l)) if l > 0.0 && l.is_finite() => AcquisitionKind::DroKl(KlLambda::Fixed(l)),
                _ => {
                    return Err(DrboError::config(format!(
                        "unknown acquisition '{other}'; valid options: {}",
                        ACQUISITION_NAMES.join(", ")
                    )))
                }
            },
        };
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AcquisitionKind::DroKl(KlLambda::Fixed(l)) if !(l.is_finite() && *l > 0.0) => {
                Err(DrboError::config(format!("fixed λ must be > 0, got {l}")))
            }
            _ => Ok(()),
        }
    }
}

/// Everything an acquisition needs at one iteration.
pub struct AcquisitionContext<'a> {
    pub surrogate: &'a dyn Surrogate,
    pub contexts: &'a ContextSet,
    pub eps_t: f64,
    pub sqrt_beta_t: f64,
    pub lambda_grid: Vec<f64>,
}

impl<'a> AcquisitionContext<'a> {
    pub fn new(surrogate: &'a dyn Surrogate, contexts: &'a ContextSet, eps_t: f64, sqrt_beta_t: f64) -> Result<Self> {
        if contexts.is_empty() {
            return Err(DrboError::config("acquisition needs at least one context"));
        }
        if !(eps_t.is_finite() && eps_t >= 0.0) {
            return Err(DrboError::config(format!("ε_t must be >= 0, got {eps_t}")));
        }
        if !(sqrt_beta_t.is_finite() && sqrt_beta_t >= 0.0) {
            return Err(DrboError::config(format!("√β_t must be >= 0, got {sqrt_beta_t}")));
        }
        Ok(AcquisitionContext {
            surrogate,
            contexts,
            eps_t,
            sqrt_beta_t,
            lambda_grid: default_lambda_grid(),
        })
    }
}

/// Acquisition value at `x`.
pub fn acq_value(kind: AcquisitionKind, ctx: &AcquisitionContext<'_>, x: &[f64]) -> Result<f64> {
    if kind == AcquisitionKind::Random {
        return Ok(0.0);
    }
    let preds = ctx.surrogate.predict_contexts(x, ctx.contexts.supports());
    let w = ctx.contexts.weights();
    let mut mu = Vec::with_capacity(preds.len());
    let mut ucb = Vec::with_capacity(preds.len());
    for &(m, v) in &preds {
        let u = m + ctx.sqrt_beta_t * v.sqrt();
        if !u.is_finite() {
            return Err(DrboError::numerical(format!(
                "non-finite posterior output (μ = {m}, σ² = {v}) at x = {x:?}"
            )));
        }
        mu.push(m);
        ucb.push(u);
    }
    let eps = ctx.eps_t;
    let value = match kind {
        AcquisitionKind::DroChi2 => {
            divergence::weighted_mean(&ucb, w) - (eps * divergence::weighted_variance(&mu, w)).sqrt()
        }
        AcquisitionKind::DroTv => divergence::weighted_mean(&ucb, w) - 0.5 * eps * divergence::spread(&mu),
        AcquisitionKind::DroKl(KlLambda::Grid) => divergence::kl_unchecked(&ucb, w, eps, &ctx.lambda_grid),
        AcquisitionKind::DroKl(KlLambda::Fixed(l)) => divergence::kl_at_lambda(&ucb, w, eps, l),
        AcquisitionKind::Ucb => divergence::weighted_mean(&ucb, w),
        AcquisitionKind::StableOpt => ucb.iter().cloned().fold(f64::INFINITY, f64::min),
        AcquisitionKind::Random => unreachable!(),
    };
    Ok(value)
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBox(pub Vec<(f64, f64)>);

impl InputBox {
    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(DrboError::config("input box has no dimensions"));
        }
        if let Some((lo, hi)) = self.0.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(DrboError::config(format!("empty or invalid box side [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.0.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect()
    }

    fn clamp(&self, i: usize, v: f64) -> f64 {
        v.clamp(self.0[i].0, self.0[i].1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximizerSettings {
    /// Uniform random candidates scored before refinement.
    pub budget: usize,
    /// Coordinate-refinement passes; 0 disables refinement.
    pub refine_passes: usize,
    /// First-pass step as a fraction of each box side; halved every pass.
    pub initial_step: f64,
}

impl Default for MaximizerSettings {
    fn default() -> Self {
        MaximizerSettings {
            budget: 256,
            refine_passes: 3,
            initial_step: 0.1,
        }
    }
}

const MAX_MOVES_PER_AXIS: usize = 64;

/// Best of `budget` random candidates, then coordinate refinement.
///
/// Deterministic given the state of `rng`; ties resolve to the lowest
/// candidate index. `Random` returns one uniform draw.
pub fn maximize_acq<R: Rng + ?Sized>(
    kind: AcquisitionKind,
    ctx: &AcquisitionContext<'_>,
    bounds: &InputBox,
    settings: &MaximizerSettings,
    rng: &mut R,
) -> Result<Vec<f64>> {
    bounds.validate()?;
    if settings.budget == 0 {
        return Err(DrboError::config("maximizer budget must be >= 1"));
    }
    if kind == AcquisitionKind::Random {
        return Ok(bounds.sample(rng));
    }

    let candidates: Vec<Vec<f64>> = (0..settings.budget).map(|_| bounds.sample(rng)).collect();
    let scores = candidates
        .par_iter()
        .with_min_len(8)
        .map(|x| acq_value(kind, ctx, x))
        .collect::<Result<Vec<f64>>>()?;
    let mut best_idx = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best_idx] {
            best_idx = i;
        }
    }
    let mut best = candidates[best_idx].clone();
    let mut best_score = scores[best_idx];

    let mut step_frac = settings.initial_step;
    for _ in 0..settings.refine_passes {
        for i in 0..best.len() {
            let step = step_frac * (bounds.0[i].1 - bounds.0[i].0);
            for _ in 0..MAX_MOVES_PER_AXIS {
                let mut improved = false;
                for dir in [1.0, -1.0] {
                    let mut trial = best.clone();
                    trial[i] = bounds.clamp(i, best[i] + dir * step);
                    if trial[i] == best[i] {
                        continue;
                    }
                    let s = acq_value(kind, ctx, &trial)?;
                    if s > best_score {
                        best = trial;
                        best_score = s;
                        improved = true;
                        break;
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        step_frac *= 0.5;
    }
    Ok(best)
}
