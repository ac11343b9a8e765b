//! Synthetic contextual test functions.
//!
//! Each classic benchmark is split so that its last coordinate is the context
//! `c` and the remaining coordinates form the decision variable `x`. Classic
//! benchmarks are minimization problems; with `negate` set (the registry
//! default) they are flipped so that every objective is maximized.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{DrboError, Result};

/// Names accepted by [`BenchmarkFunction::by_name`].
pub const BENCHMARK_NAMES: [&str; 5] = ["branin", "goldstein_price", "six_hump_camel", "hartmann3", "gap"];

const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchmarkId {
    Branin,
    GoldsteinPrice,
    SixHumpCamel,
    Hartmann3,
    Gap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkFunction {
    pub name: String,
    pub id: BenchmarkId,
    pub input_box: Vec<(f64, f64)>,
    pub context_interval: (f64, f64),
    pub negate: bool,
    pub noise_sigma: f64,
}

impl BenchmarkFunction {
    pub fn by_name(name: &str) -> Result<Self> {
        let id = match name {
            "branin" => BenchmarkId::Branin,
            "goldstein_price" => BenchmarkId::GoldsteinPrice,
            "six_hump_camel" => BenchmarkId::SixHumpCamel,
            "hartmann3" => BenchmarkId::Hartmann3,
            "gap" => BenchmarkId::Gap,
            other => {
                return Err(DrboError::config(format!(
                    "unknown benchmark '{other}'; valid options: {}",
                    BENCHMARK_NAMES.join(", ")
                )))
            }
        };
        Ok(Self::new(id))
    }

    pub fn new(id: BenchmarkId) -> Self {
        let (name, input_box, context_interval, negate) = match id {
            BenchmarkId::Branin => ("branin", vec![(-5.0, 10.0)], (0.0, 15.0), true),
            BenchmarkId::GoldsteinPrice => ("goldstein_price", vec![(-2.0, 2.0)], (-2.0, 2.0), true),
            BenchmarkId::SixHumpCamel => ("six_hump_camel", vec![(-3.0, 3.0)], (-2.0, 2.0), true),
            BenchmarkId::Hartmann3 => ("hartmann3", vec![(0.0, 1.0), (0.0, 1.0)], (0.0, 1.0), true),
            BenchmarkId::Gap => ("gap", vec![(0.0, 1.0)], (0.0, 1.0), false),
        };
        BenchmarkFunction {
            name: name.to_string(),
            id,
            input_box,
            context_interval,
            negate,
            noise_sigma: 0.0,
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn with_negate(mut self, negate: bool) -> Self {
        self.negate = negate;
        self
    }

    pub fn input_dim(&self) -> usize {
        self.input_box.len()
    }

    /// Widths of every joint dimension, context last.
    pub fn joint_widths(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self.input_box.iter().map(|(lo, hi)| hi - lo).collect();
        w.push(self.context_interval.1 - self.context_interval.0);
        w
    }

    fn check_domain(&self, x: &[f64], c: f64) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(DrboError::domain(format!(
                "{} takes {} input dimensions, got {}",
                self.name,
                self.input_dim(),
                x.len()
            )));
        }
        let inside = |v: f64, (lo, hi): (f64, f64)| {
            v.is_finite() && v >= lo - DOMAIN_SLACK && v <= hi + DOMAIN_SLACK
        };
        if !x.iter().zip(&self.input_box).all(|(v, b)| inside(*v, *b)) {
            return Err(DrboError::domain(format!("x = {x:?} outside the {} input box", self.name)));
        }
        if !inside(c, self.context_interval) {
            return Err(DrboError::domain(format!(
                "c = {c} outside the {} context interval",
                self.name
            )));
        }
        Ok(())
    }

    /// Noise-free value, sign-flipped when `negate` is set.
    pub fn evaluate(&self, x: &[f64], c: f64) -> Result<f64> {
        self.check_domain(x, c)?;
        let raw = self.raw(x, c);
        Ok(if self.negate { -raw } else { raw })
    }

    /// Evaluation plus `N(0, noise_sigma²)` noise drawn from `rng`.
    pub fn observe<R: Rng + ?Sized>(&self, x: &[f64], c: f64, rng: &mut R) -> Result<f64> {
        let v = self.evaluate(x, c)?;
        if self.noise_sigma > 0.0 {
            let noise = Normal::new(0.0, self.noise_sigma)
                .map_err(|e| DrboError::config(format!("noise sigma: {e}")))?;
            Ok(v + noise.sample(rng))
        } else {
            Ok(v)
        }
    }

    fn raw(&self, x: &[f64], c: f64) -> f64 {
        match self.id {
            BenchmarkId::Branin => branin(x[0], c),
            BenchmarkId::GoldsteinPrice => goldstein_price(x[0], c),
            BenchmarkId::SixHumpCamel => six_hump_camel(x[0], c),
            BenchmarkId::Hartmann3 => hartmann3([x[0], x[1], c]),
            BenchmarkId::Gap => gap(x[0], c),
        }
    }
}

pub fn branin(x1: f64, x2: f64) -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    let u = x2 - b * x1 * x1 + c * x1 - 6.0;
    u * u + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

pub fn goldstein_price(x: f64, y: f64) -> f64 {
    let a = 1.0
        + (x + y + 1.0).powi(2)
            * (19.0 - 14.0 * x + 3.0 * x * x - 14.0 * y + 6.0 * x * y + 3.0 * y * y);
    let b = 30.0
        + (2.0 * x - 3.0 * y).powi(2)
            * (18.0 - 32.0 * x + 12.0 * x * x + 48.0 * y - 36.0 * x * y + 27.0 * y * y);
    a * b
}

pub fn six_hump_camel(x1: f64, x2: f64) -> f64 {
    let x1s = x1 * x1;
    let x2s = x2 * x2;
    (4.0 - 2.1 * x1s + x1s * x1s / 3.0) * x1s + x1 * x2 + (-4.0 + 4.0 * x2s) * x2s
}

const H3_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const H3_A: [[f64; 3]; 4] = [
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
];
const H3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];

pub fn hartmann3(z: [f64; 3]) -> f64 {
    -H3_ALPHA
        .iter()
        .zip(H3_A.iter().zip(&H3_P))
        .map(|(alpha, (a, p))| {
            let s: f64 = (0..3).map(|j| a[j] * (z[j] - p[j]).powi(2)).sum();
            alpha * (-s).exp()
        })
        .sum::<f64>()
}

/// Two bumps: a context-insensitive one at `x = 0.2` of height 0.6 and a
/// taller context-sensitive one at `x = 0.8` whose height `1.6(1 − c)`
/// vanishes as `c → 1`. Under uniform `c` the mean favours `x = 0.8`; any
/// penalty on spread across contexts favours `x = 0.2`.
pub fn gap(x: f64, c: f64) -> f64 {
    let bump = |centre: f64| (-(x - centre).powi(2) / 0.02).exp();
    0.6 * bump(0.2) + 1.6 * (1.0 - c) * bump(0.8)
}
