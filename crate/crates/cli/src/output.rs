//! Results CSV and run manifest.

use std::io::{self, Write};

use drbo::engine::SuiteRun;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::SuiteConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// CSV header for runs with `input_dim` decision variables.
pub fn csv_header(input_dim: usize) -> String {
    let mut cols = vec!["run_id".to_string(), "seed".into(), "iter".into()];
    cols.extend((0..input_dim).map(|i| format!("x_{i}")));
    cols.extend(["c", "y", "eps_t", "r_t", "R_t", "wall_ms"].map(String::from));
    cols.join(",")
}

pub fn run_id(run: &SuiteRun) -> String {
    format!("{}#{}", run.config.label(), run.repeat)
}

/// Writes every successful run; failed runs contribute no rows.
pub fn write_csv<W: Write>(out: &mut W, runs: &[SuiteRun], input_dim: usize, record_timing: bool) -> io::Result<()> {
    writeln!(out, "{}", csv_header(input_dim))?;
    for run in runs {
        let Ok(rec) = &run.result else { continue };
        let id = run_id(run);
        for it in &rec.iterations {
            let mut fields = vec![id.clone(), rec.seed.to_string(), it.iter.to_string()];
            fields.extend(it.x.iter().map(|v| fmt_sig9(*v)));
            let wall = if record_timing { it.wall_ms } else { 0.0 };
            fields.extend([it.c, it.y, it.eps_t, it.r_t, it.cum_regret, wall].map(fmt_sig9));
            writeln!(out, "{}", fields.join(","))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedRun {
    pub run_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSeed {
    pub run_id: String,
    pub seed: u64,
}

pub fn run_seeds(runs: &[SuiteRun]) -> Vec<RunSeed> {
    runs.iter()
        .map(|r| RunSeed {
            run_id: run_id(r),
            seed: r.config.seed,
        })
        .collect()
}

/// Final cumulative regret across the repeats of one config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub label: String,
    pub runs: usize,
    pub mean: f64,
    pub stderr: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize(runs: &[SuiteRun]) -> Vec<MethodSummary> {
    let mut groups: Vec<(usize, String, Vec<f64>)> = Vec::new();
    for run in runs {
        let Ok(rec) = &run.result else { continue };
        match groups.iter_mut().find(|g| g.0 == run.config_index) {
            Some(g) => g.2.push(rec.final_regret()),
            None => groups.push((run.config_index, run.config.label(), vec![rec.final_regret()])),
        }
    }
    groups
        .into_iter()
        .map(|(_, label, mut v)| {
            v.sort_by(|a, b| a.total_cmp(b));
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let stderr = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            MethodSummary {
                label,
                runs: v.len(),
                mean,
                stderr,
                median: quantile(&v, 0.5),
                q1: quantile(&v, 0.25),
                q3: quantile(&v, 0.75),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config_hash: String,
    pub config: SuiteConfig,
    pub results_file: String,
    /// Seed of every run, in CSV order.
    pub seeds: Vec<RunSeed>,
    pub failures: Vec<FailedRun>,
}

/// Git-style content hash of the resolved config: SHA-256 over
/// `"blob <len>\0<canonical json>"`.
pub fn config_hash(config: &SuiteConfig) -> String {
    let body = serde_json::to_string(config).expect("config serializes");
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;
    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(-2.5), "-2.5");
        assert_eq!(fmt_sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_sig9(123456.789012), "123456.789");
        assert_eq!(fmt_sig9(1e-7), "1e-7");
        assert_eq!(fmt_sig9(1.23456789123e12), "1.23456789e12");
        assert_eq!(fmt_sig9(0.000123456789123), "0.000123456789");
        assert_eq!(fmt_sig9(999999999.7), "1e9");
    }

    #[test]
    fn header_layout() {
        assert_eq!(csv_header(2), "run_id,seed,iter,x_0,x_1,c,y,eps_t,r_t,R_t,wall_ms");
    }

    #[test]
    fn hash_tracks_config_changes() {
        let a = RawConfig::parse("eps = 0.5\n").unwrap().resolve().unwrap();
        let b = RawConfig::parse("eps = 0.5\n").unwrap().resolve().unwrap();
        let c = RawConfig::parse("eps = 0.25\n").unwrap().resolve().unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&c));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.75), 3.25);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }
}
