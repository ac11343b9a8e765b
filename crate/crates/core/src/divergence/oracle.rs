//! Brute-force worst-case distribution by simplex enumeration.
//!
//! Candidates are `q = p + step·k` for integer vectors `k` (last coordinate
//! fixed by normalization), restricted to the simplex. The lattice contains
//! `p` itself, so the feasible set is never empty.

use crate::error::{DrboError, Result};

use super::DivergenceKind;

/// Largest support the exhaustive enumeration accepts.
pub const MAX_ORACLE_SUPPORT: usize = 4;
pub const DEFAULT_ORACLE_STEP: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub q: Vec<f64>,
}

/// Worst case of `Σ q_j f_j` over lattice points with `D_φ(q, p) ≤ ε`.
pub fn worst_case_oracle(
    kind: DivergenceKind,
    f_values: &[f64],
    weights: &[f64],
    eps: f64,
    step: f64,
) -> Result<OracleResult> {
    let n = f_values.len();
    if n == 0 || n > MAX_ORACLE_SUPPORT {
        return Err(DrboError::config(format!(
            "oracle support must have 1..={MAX_ORACLE_SUPPORT} atoms, got {n}"
        )));
    }
    if weights.len() != n {
        return Err(DrboError::config("weights and values differ in length"));
    }
    if !(step > 0.0 && step <= 0.1) {
        return Err(DrboError::config(format!("oracle step must be in (0, 0.1], got {step}")));
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(DrboError::domain(format!("radius must be >= 0, got {eps}")));
    }
    if f_values.iter().any(|v| !v.is_finite()) {
        return Err(DrboError::domain("non-finite function value"));
    }

    let mut search = Search {
        kind,
        f: f_values,
        p: weights,
        eps: eps + 1e-12,
        step,
        q: vec![0.0; n],
        best: f64::INFINITY,
        best_q: weights.to_vec(),
    };
    search.recurse(0, 0.0);
    assert!(search.best.is_finite(), "reference distribution is always feasible");
    Ok(OracleResult {
        value: search.best,
        q: search.best_q,
    })
}

/// Gap bound between the lattice minimum and the true infimum.
pub fn oracle_tolerance(f_values: &[f64], step: f64) -> f64 {
    super::spread(f_values) * step * f_values.len() as f64
}

struct Search<'a> {
    kind: DivergenceKind,
    f: &'a [f64],
    p: &'a [f64],
    eps: f64,
    step: f64,
    q: Vec<f64>,
    best: f64,
    best_q: Vec<f64>,
}

impl Search<'_> {
    fn recurse(&mut self, j: usize, used: f64) {
        let n = self.f.len();
        if j == n - 1 {
            let mut last = 1.0 - used;
            if last < 0.0 {
                if last < -1e-12 {
                    return;
                }
                last = 0.0;
            }
            self.q[j] = last;
            if self.kind.divergence(&self.q, self.p) <= self.eps {
                let v: f64 = self.q.iter().zip(self.f).map(|(a, b)| a * b).sum();
                if v < self.best {
                    self.best = v;
                    self.best_q.copy_from_slice(&self.q);
                }
            }
            return;
        }
        let pj = self.p[j];
        let k_lo = (-pj / self.step - 1e-9).ceil() as i64;
        let k_hi = ((1.0 - used - pj) / self.step + 1e-9).floor() as i64;
        for k in k_lo..=k_hi {
            let qj = (pj + k as f64 * self.step).max(0.0);
            self.q[j] = qj;
            self.recurse(j + 1, used + qj);
        }
    }
}
