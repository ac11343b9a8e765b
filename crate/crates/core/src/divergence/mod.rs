//! φ-divergence balls around a discrete reference distribution.
//!
//! For the three supported generators the inner worst case
//! `inf { E_q[f] : D_φ(q, p) ≤ ε }` reduces to a closed form through the
//! convex-conjugate dual `sup_{λ ≥ 0, b} b − λε − E_p[(λφ)*(b − f)]`.
//! [`oracle`] enumerates the simplex directly and is used to check those
//! closed forms.

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{DrboError, Result};
use crate::gp::log_space;

pub use oracle::{oracle_tolerance, worst_case_oracle, OracleResult};

/// Which generator φ defines the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DivergenceKind {
    /// φ(u) = (u − 1)²
    Chi2,
    /// φ(u) = |u − 1|
    TotalVariation,
    /// φ(u) = u log u
    Kl,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 3] = [
        DivergenceKind::Chi2,
        DivergenceKind::TotalVariation,
        DivergenceKind::Kl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DivergenceKind::Chi2 => "chi2",
            DivergenceKind::TotalVariation => "tv",
            DivergenceKind::Kl => "kl",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chi2" | "x2" | "chi-square" => Some(DivergenceKind::Chi2),
            "tv" | "total_variation" => Some(DivergenceKind::TotalVariation),
            "kl" => Some(DivergenceKind::Kl),
            _ => None,
        }
    }

    /// The generator φ on `u ≥ 0`.
    pub fn phi(self, u: f64) -> f64 {
        match self {
            DivergenceKind::Chi2 => (u - 1.0) * (u - 1.0),
            DivergenceKind::TotalVariation => (u - 1.0).abs(),
            DivergenceKind::Kl => {
                if u == 0.0 {
                    0.0
                } else {
                    u * u.ln()
                }
            }
        }
    }

    /// `D_φ(q, p) = Σ_j p_j φ(q_j / p_j)`, with the usual limits where `p_j = 0`.
    pub fn divergence(self, q: &[f64], p: &[f64]) -> f64 {
        q.iter()
            .zip(p)
            .map(|(&qj, &pj)| {
                if pj > 0.0 {
                    pj * self.phi(qj / pj)
                } else if qj <= 0.0 {
                    0.0
                } else {
                    match self {
                        DivergenceKind::TotalVariation => qj,
                        _ => f64::INFINITY,
                    }
                }
            })
            .sum()
    }
}

impl std::fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Value of a scaled conjugate `(λφ)*(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conjugate {
    Finite(f64),
    PlusInfinity,
}

impl Conjugate {
    pub fn value(self) -> f64 {
        match self {
            Conjugate::Finite(v) => v,
            Conjugate::PlusInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Conjugate::Finite(_))
    }
}

/// `(λφ)*(u) = sup_v u·v − λφ(v)` with φ taken over the whole real line.
///
/// * χ²: `u²/(4λ) + u`
/// * TV: `u` when `|u| ≤ λ`, otherwise `+∞`
/// * KL: `λ·exp(u/λ − 1)`
pub fn phi_conjugate(kind: DivergenceKind, u: f64, lambda: f64) -> Result<Conjugate> {
    if u.is_nan() || lambda.is_nan() {
        return Err(DrboError::domain("NaN argument to conjugate"));
    }
    match kind {
        DivergenceKind::Chi2 => {
            if lambda <= 0.0 {
                return Err(DrboError::domain(format!("χ² conjugate needs λ > 0, got {lambda}")));
            }
            Ok(Conjugate::Finite(u * u / (4.0 * lambda) + u))
        }
        DivergenceKind::TotalVariation => {
            if lambda < 0.0 {
                return Err(DrboError::domain(format!("TV conjugate needs λ ≥ 0, got {lambda}")));
            }
            if u.abs() <= lambda {
                Ok(Conjugate::Finite(u))
            } else {
                Ok(Conjugate::PlusInfinity)
            }
        }
        DivergenceKind::Kl => {
            if lambda <= 0.0 {
                return Err(DrboError::domain(format!("KL conjugate needs λ > 0, got {lambda}")));
            }
            Ok(Conjugate::Finite(lambda * (u / lambda - 1.0).exp()))
        }
    }
}

/// A discrete reference distribution over contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSet {
    supports: Vec<f64>,
    weights: Vec<f64>,
}

impl ContextSet {
    pub fn new(supports: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if supports.is_empty() {
            return Err(DrboError::config("context set must be nonempty"));
        }
        if supports.len() != weights.len() {
            return Err(DrboError::config(format!(
                "{} supports but {} weights",
                supports.len(),
                weights.len()
            )));
        }
        check_weights(&weights)?;
        if supports.iter().any(|c| !c.is_finite()) {
            return Err(DrboError::domain("non-finite context value"));
        }
        Ok(ContextSet { supports, weights })
    }

    pub fn uniform(supports: Vec<f64>) -> Result<Self> {
        let n = supports.len().max(1);
        let w = vec![1.0 / n as f64; supports.len()];
        Self::new(supports, w)
    }

    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }
}

/// Dual variables of the reformulated inner problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPoint {
    pub lambda: f64,
    pub b: f64,
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(DrboError::domain("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(DrboError::domain(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

fn check_inputs(f: &[f64], weights: &[f64], eps: f64) -> Result<()> {
    if f.is_empty() {
        return Err(DrboError::config("no function values"));
    }
    if f.len() != weights.len() {
        return Err(DrboError::config(format!(
            "{} function values but {} weights",
            f.len(),
            weights.len()
        )));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(DrboError::domain("non-finite function value"));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(DrboError::domain(format!("radius must be finite and >= 0, got {eps}")));
    }
    check_weights(weights)
}

pub(crate) fn weighted_mean(f: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Population variance under `w`.
pub(crate) fn weighted_variance(f: &[f64], w: &[f64]) -> f64 {
    let m = weighted_mean(f, w);
    f.iter().zip(w).map(|(a, b)| b * (a - m) * (a - m)).sum()
}

pub(crate) fn spread(f: &[f64]) -> f64 {
    let (lo, hi) = f
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// `b − λε − Σ_j p_j (λφ)*(b − f_j)`; `−∞` where the conjugate is infinite.
pub fn dual_objective(
    kind: DivergenceKind,
    f_values: &[f64],
    weights: &[f64],
    eps: f64,
    dp: DualPoint,
) -> Result<f64> {
    check_inputs(f_values, weights, eps)?;
    let mut penalty = 0.0;
    for (&fj, &wj) in f_values.iter().zip(weights) {
        if wj == 0.0 {
            continue;
        }
        match phi_conjugate(kind, dp.b - fj, dp.lambda)? {
            Conjugate::Finite(v) => penalty += wj * v,
            Conjugate::PlusInfinity => return Ok(f64::NEG_INFINITY),
        }
    }
    Ok(dp.b - dp.lambda * eps - penalty)
}

/// `E_p[f] − √(ε · Var_p[f])`.
pub fn robust_value_chi2(f_values: &[f64], weights: &[f64], eps: f64) -> Result<f64> {
    check_inputs(f_values, weights, eps)?;
    Ok(chi2_unchecked(f_values, weights, eps))
}

pub(crate) fn chi2_unchecked(f: &[f64], w: &[f64], eps: f64) -> f64 {
    weighted_mean(f, w) - (eps * weighted_variance(f, w)).sqrt()
}

/// `E_p[f] − (ε/2)(max f − min f)`.
pub fn robust_value_tv(f_values: &[f64], weights: &[f64], eps: f64) -> Result<f64> {
    check_inputs(f_values, weights, eps)?;
    Ok(tv_unchecked(f_values, weights, eps))
}

pub(crate) fn tv_unchecked(f: &[f64], w: &[f64], eps: f64) -> f64 {
    weighted_mean(f, w) - 0.5 * eps * spread(f)
}

/// Default λ grid for the KL form: 64 log-spaced points on `[1e−3, 1e3]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_space(1e-3, 1e3, 64)
}

/// `max_λ −λε − λ log Σ_j p_j exp(−f_j/λ)` over the supplied grid.
pub fn robust_value_kl(
    f_values: &[f64],
    weights: &[f64],
    eps: f64,
    lambda_grid: &[f64],
) -> Result<f64> {
    check_inputs(f_values, weights, eps)?;
    if lambda_grid.is_empty() {
        return Err(DrboError::config("λ grid is empty"));
    }
    if lambda_grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(DrboError::domain("λ grid must be strictly positive"));
    }
    Ok(kl_unchecked(f_values, weights, eps, lambda_grid))
}

pub(crate) fn kl_unchecked(f: &[f64], w: &[f64], eps: f64, lambda_grid: &[f64]) -> f64 {
    lambda_grid
        .iter()
        .map(|&l| kl_at_lambda(f, w, eps, l))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// KL dual at a fixed λ, with the log-sum-exp shifted by its largest exponent.
pub(crate) fn kl_at_lambda(f: &[f64], w: &[f64], eps: f64, lambda: f64) -> f64 {
    let shift = f
        .iter()
        .zip(w)
        .filter(|(_, wj)| **wj > 0.0)
        .map(|(fj, _)| -fj / lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = f
        .iter()
        .zip(w)
        .filter(|(_, wj)| **wj > 0.0)
        .map(|(fj, wj)| wj * (-fj / lambda - shift).exp())
        .sum();
    -lambda * eps - lambda * (sum.ln() + shift)
}

/// Robust value for any kind; KL uses `lambda_grid`.
pub fn robust_value(
    kind: DivergenceKind,
    f_values: &[f64],
    weights: &[f64],
    eps: f64,
    lambda_grid: &[f64],
) -> Result<f64> {
    match kind {
        DivergenceKind::Chi2 => robust_value_chi2(f_values, weights, eps),
        DivergenceKind::TotalVariation => robust_value_tv(f_values, weights, eps),
        DivergenceKind::Kl => robust_value_kl(f_values, weights, eps, lambda_grid),
    }
}

/// Γ_φ, an upper bound on total variation as a function of `D_φ`.
pub fn gamma_map(kind: DivergenceKind, d: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(DrboError::domain(format!("Γ needs d >= 0, got {d}")));
    }
    Ok(match kind {
        DivergenceKind::TotalVariation => d,
        DivergenceKind::Chi2 => {
            if d.is_infinite() {
                2.0
            } else {
                2.0 * (d / (1.0 + d)).sqrt()
            }
        }
        DivergenceKind::Kl => -(-d).exp_m1(),
    })
}

pub fn gamma_inverse(kind: DivergenceKind, y: f64) -> Result<f64> {
    let out_of_range = || {
        DrboError::domain(format!("{y} is outside the range of Γ for {kind}"))
    };
    if !y.is_finite() || y < 0.0 {
        return Err(out_of_range());
    }
    match kind {
        DivergenceKind::TotalVariation => Ok(y),
        DivergenceKind::Chi2 => {
            if y >= 2.0 {
                return Err(out_of_range());
            }
            let s = y * y / 4.0;
            Ok(s / (1.0 - s))
        }
        DivergenceKind::Kl => {
            if y >= 1.0 {
                return Err(out_of_range());
            }
            Ok(-(-y).ln_1p())
        }
    }
}

/// How the radius ε_t evolves over iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RadiusSchedule {
    Fixed(f64),
    /// `ε_t = Γ⁻¹(1 / (√t + √(t+1)))`, so that `Σ_{t≤T} Γ(ε_t) = √(T+1) − 1`.
    Adaptive(DivergenceKind),
}

impl RadiusSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadiusSchedule::Fixed(e) if !(e.is_finite() && e >= 0.0) => {
                Err(DrboError::config(format!("fixed radius must be >= 0, got {e}")))
            }
            _ => Ok(()),
        }
    }
}

/// ε_t for iteration `t ≥ 1` (t = 0 is treated as 1).
pub fn epsilon_at(schedule: RadiusSchedule, t: usize) -> f64 {
    match schedule {
        RadiusSchedule::Fixed(e) => e,
        RadiusSchedule::Adaptive(kind) => {
            let t = t.max(1) as f64;
            let target = 1.0 / (t.sqrt() + (t + 1.0).sqrt());
            // target ≤ 1/(1+√2) < 1, inside every Γ's range.
            gamma_inverse(kind, target).expect("adaptive target inside Γ range")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const U2: [f64; 2] = [0.5, 0.5];

    #[test]
    fn generators_vanish_at_one() {
        for k in DivergenceKind::ALL {
            assert_eq!(k.phi(1.0), 0.0);
            assert_eq!(k.divergence(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
        }
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(phi_conjugate(DivergenceKind::Chi2, 0.0, 1.0).unwrap(), Conjugate::Finite(0.0));
        assert_eq!(
            phi_conjugate(DivergenceKind::TotalVariation, 0.5, 1.0).unwrap(),
            Conjugate::Finite(0.5)
        );
        assert_eq!(
            phi_conjugate(DivergenceKind::TotalVariation, 1.5, 1.0).unwrap(),
            Conjugate::PlusInfinity
        );
        assert_eq!(
            phi_conjugate(DivergenceKind::TotalVariation, -1.5, 1.0).unwrap(),
            Conjugate::PlusInfinity
        );
        assert_abs_diff_eq!(
            phi_conjugate(DivergenceKind::Kl, 1.0, 1.0).unwrap().value(),
            1.0,
            epsilon = 1e-15
        );
        assert!(phi_conjugate(DivergenceKind::Chi2, 0.0, 0.0).is_err());
        assert!(phi_conjugate(DivergenceKind::Kl, 0.0, -1.0).is_err());
        assert!(phi_conjugate(DivergenceKind::TotalVariation, 0.0, 0.0).is_ok());
    }

    #[test]
    fn conjugate_matches_numeric_sup() {
        // sup_v u·v − λφ(v) by dense scan over v.
        for kind in DivergenceKind::ALL {
            for &(u, lambda) in &[(0.3, 1.0), (-0.4, 2.0), (0.1, 0.5)] {
                let scan = (0..200_000)
                    .map(|i| -10.0 + 20.0 * i as f64 / 200_000.0)
                    .filter(|v| kind != DivergenceKind::Kl || *v > 0.0)
                    .map(|v| u * v - lambda * kind.phi(v))
                    .fold(f64::NEG_INFINITY, f64::max);
                let c = phi_conjugate(kind, u, lambda).unwrap().value();
                assert_abs_diff_eq!(c, scan, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn chi2_and_tv_hand_values() {
        assert_abs_diff_eq!(robust_value_chi2(&[2.0, 2.0, 2.0], &[1.0 / 3.0; 3], 5.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(robust_value_chi2(&[0.0, 1.0], &U2, 0.04).unwrap(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(robust_value_tv(&[0.0, 1.0], &U2, 0.5).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(robust_value_tv(&[0.0, 1.0], &U2, 0.0).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn kl_constant_and_zero_radius() {
        let grid = default_lambda_grid();
        let v = robust_value_kl(&[1.5; 3], &[1.0 / 3.0; 3], 0.2, &grid).unwrap();
        assert_abs_diff_eq!(v, 1.5 - grid[0] * 0.2, epsilon = 1e-12);

        let f = [0.0, 1.0, -0.5];
        let w = [0.2, 0.5, 0.3];
        let mean = weighted_mean(&f, &w);
        let mut prev = f64::NEG_INFINITY;
        for &l in &grid {
            let v = kl_at_lambda(&f, &w, 0.0, l);
            assert!(v <= mean + 1e-12);
            assert!(v >= prev - 1e-12, "eps = 0 value should grow with λ");
            prev = v;
        }
        assert_abs_diff_eq!(robust_value_kl(&f, &w, 0.0, &grid).unwrap(), mean, epsilon = 1e-3);
    }

    #[test]
    fn kl_survives_extreme_values() {
        let v = robust_value_kl(&[1e4, -1e4], &U2, 0.1, &[1e-3, 1.0]).unwrap();
        assert!(v.is_finite());
        assert!(v <= 0.0);
    }

    #[test]
    fn dual_objective_constant_and_zero_radius() {
        let f = [0.7; 3];
        let w = [1.0 / 3.0; 3];
        // Optimal b is m (χ², TV) or m + λ (KL); the value is m − λε → m as λ → 0.
        let lambda = 1e-9;
        let cases = [
            (DivergenceKind::Chi2, DualPoint { lambda, b: 0.7 }),
            (DivergenceKind::TotalVariation, DualPoint { lambda: 0.0, b: 0.7 }),
            (DivergenceKind::Kl, DualPoint { lambda, b: 0.7 + lambda }),
        ];
        for (kind, dp) in cases {
            let v = dual_objective(kind, &f, &w, 0.3, dp).unwrap();
            assert_abs_diff_eq!(v, 0.7, epsilon = 1e-8);
        }
        // χ² with ε = 0: b = E f and large λ drive the dual to E_p[f].
        let v = dual_objective(DivergenceKind::Chi2, &[0.0, 1.0], &U2, 0.0, DualPoint { lambda: 1e6, b: 0.5 })
            .unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-6);
        // TV outside the λ box is −∞.
        let v = dual_objective(DivergenceKind::TotalVariation, &[0.0, 1.0], &U2, 0.1, DualPoint { lambda: 0.1, b: 0.5 })
            .unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn dual_objective_rejects_nonfinite() {
        assert!(matches!(
            dual_objective(DivergenceKind::Chi2, &[f64::NAN, 0.0], &U2, 0.1, DualPoint { lambda: 1.0, b: 0.0 }),
            Err(DrboError::Domain(_))
        ));
    }

    #[test]
    fn input_validation() {
        assert!(robust_value_tv(&[0.0], &[0.5], 0.1).is_err());
        assert!(robust_value_tv(&[0.0, 1.0], &U2, -0.1).is_err());
        assert!(robust_value_kl(&[0.0, 1.0], &U2, 0.1, &[]).is_err());
        assert!(robust_value_kl(&[0.0, 1.0], &U2, 0.1, &[0.0]).is_err());
        assert!(ContextSet::new(vec![0.0, 1.0], vec![0.5]).is_err());
        assert!(ContextSet::new(vec![], vec![]).is_err());
        assert!(ContextSet::new(vec![0.0, 1.0], vec![0.7, 0.7]).is_err());
        assert!(ContextSet::uniform(vec![0.1, 0.2, 0.3]).is_ok());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn gamma_examples() {
        for k in DivergenceKind::ALL {
            assert_eq!(gamma_map(k, 0.0).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(gamma_map(DivergenceKind::Chi2, 1.0).unwrap(), 1.41421, epsilon = 1e-5);
        assert_abs_diff_eq!(gamma_map(DivergenceKind::Kl, 2f64.ln()).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(gamma_inverse(DivergenceKind::TotalVariation, 0.3).unwrap(), 0.3);
        assert_abs_diff_eq!(gamma_inverse(DivergenceKind::Chi2, 2f64.sqrt()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gamma_inverse(DivergenceKind::Kl, 0.5).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert!(gamma_map(DivergenceKind::Kl, -0.1).is_err());
        assert!(gamma_inverse(DivergenceKind::Chi2, 2.0).is_err());
        assert!(gamma_inverse(DivergenceKind::Kl, 1.0).is_err());
        assert!(gamma_inverse(DivergenceKind::TotalVariation, -0.1).is_err());
    }

    #[test]
    fn schedules() {
        assert_eq!(epsilon_at(RadiusSchedule::Fixed(0.5), 17), 0.5);
        assert_abs_diff_eq!(
            epsilon_at(RadiusSchedule::Adaptive(DivergenceKind::TotalVariation), 1),
            0.41421,
            epsilon = 1e-5
        );
        for kind in DivergenceKind::ALL {
            let s = RadiusSchedule::Adaptive(kind);
            let total: f64 = (1..=100).map(|t| gamma_map(kind, epsilon_at(s, t)).unwrap()).sum();
            assert_abs_diff_eq!(total, 101f64.sqrt() - 1.0, epsilon = 1e-9);
            for t in 1..200 {
                let (a, b) = (epsilon_at(s, t), epsilon_at(s, t + 1));
                assert!(b < a && b > 0.0);
            }
        }
        assert!(RadiusSchedule::Fixed(-1.0).validate().is_err());
    }

    fn prob_vec(raw: Vec<f64>) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let rest: f64 = w[..w.len() - 1].iter().sum();
        let last = w.len() - 1;
        w[last] = 1.0 - rest;
        w
    }

    proptest! {
        #[test]
        fn robust_values_monotone_and_dominated(
            f in prop::collection::vec(-5.0..5.0f64, 2..6),
            e1 in 0.0..2.0f64, e2 in 0.0..2.0f64,
        ) {
            let w = vec![1.0 / f.len() as f64; f.len()];
            let w = prob_vec(w);
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let grid = default_lambda_grid();
            let mean = weighted_mean(&f, &w);
            for kind in DivergenceKind::ALL {
                let a = robust_value(kind, &f, &w, lo, &grid).unwrap();
                let b = robust_value(kind, &f, &w, hi, &grid).unwrap();
                prop_assert!(b <= a + 1e-12);
                prop_assert!(a <= mean + 1e-12);
            }
        }

        #[test]
        fn strict_penalty_when_nonconstant(f in prop::collection::vec(-5.0..5.0f64, 2..6), eps in 0.01..2.0f64) {
            prop_assume!(spread(&f) > 1e-3);
            let w = prob_vec(vec![1.0; f.len()]);
            let mean = weighted_mean(&f, &w);
            prop_assert!(robust_value_chi2(&f, &w, eps).unwrap() < mean);
            prop_assert!(robust_value_tv(&f, &w, eps).unwrap() < mean);
        }

        #[test]
        fn gamma_round_trip(y in 0.0..0.999f64) {
            for kind in DivergenceKind::ALL {
                let back = gamma_map(kind, gamma_inverse(kind, y).unwrap()).unwrap();
                prop_assert!((back - y).abs() <= 1e-12);
            }
        }
    }
}
