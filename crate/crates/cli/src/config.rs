//! Flat key-value run configuration.
//!
//! A config file is a TOML table with scalar values (and one list,
//! `acquisitions`). Command-line overrides use the same keys and win over the
//! file.

use std::collections::BTreeMap;

use drbo::acquisition::{AcquisitionKind, ExplorationSchedule, MaximizerSettings};
use drbo::divergence::{DivergenceKind, RadiusSchedule};
use drbo::benchmarks::{BenchmarkFunction, BENCHMARK_NAMES};
use drbo::engine::{ContextSampling, ExperimentConfig};
use drbo::kernel::KernelKind;
use serde::{Deserialize, Serialize};
use toml::Value;

/// Every key a config file or override may set.
pub const KNOWN_KEYS: &[&str] = &[
    "benchmark",
    "acquisitions",
    "divergence",
    "schedule",
    "eps",
    "iterations",
    "initial_design",
    "contexts",
    "context_sampling",
    "sqrt_beta",
    "beta_schedule",
    "kernel",
    "gp_noise",
    "center_targets",
    "noise_sigma",
    "seed",
    "repeats",
    "x_grid",
    "c_grid",
    "regret_eps",
    "budget",
    "refine_passes",
    "record_timing",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Fully resolved suite: one experiment per acquisition, each repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub experiments: Vec<ExperimentConfig>,
    pub repeats: usize,
    /// Write measured wall times to the CSV; off by default so reruns are byte-identical.
    pub record_timing: bool,
}

/// Raw key-value pairs, later keys overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Value>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| ConfigError(format!("malformed config: {e}")))?;
        let unknown: Vec<&str> = table
            .keys()
            .map(String::as_str)
            .filter(|k| !KNOWN_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            return Err(ConfigError(format!(
                "unknown config keys: {}; valid keys: {}",
                unknown.join(", "),
                KNOWN_KEYS.join(", ")
            )));
        }
        Ok(RawConfig {
            entries: table.into_iter().collect(),
        })
    }

    /// Sets `key` from a command-line string; numbers and booleans are
    /// recognised, anything else is kept as a string.
    pub fn set_str(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError(format!("unknown override key '{key}'")));
        }
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    pub fn resolve(&self) -> Result<SuiteConfig, ConfigError> {
        let mut bad = Vec::new();
        let mut base = ExperimentConfig::default();
        let mut acquisitions = vec![base.acquisition];
        let mut repeats = 1usize;
        let mut record_timing = false;
        let mut schedule = "fixed".to_string();
        let mut eps = 0.5;
        let mut sqrt_beta = 2.0;
        let mut beta_schedule = "constant".to_string();
        let mut maximizer = MaximizerSettings::default();

        for (key, value) in &self.entries {
            let r: Result<(), String> = (|| {
                match key.as_str() {
                    "benchmark" => base.benchmark = string(value)?,
                    "acquisitions" => {
                        let names = match value {
                            Value::Array(items) => items.iter().map(string).collect::<Result<Vec<_>, _>>()?,
                            Value::String(s) => s.split(',').map(|p| p.trim().to_string()).collect(),
                            _ => return Err("expected a list of names".into()),
                        };
                        acquisitions = names
                            .iter()
                            .map(|n| AcquisitionKind::from_name(n).map_err(|e| e.to_string()))
                            .collect::<Result<_, _>>()?;
                        if acquisitions.is_empty() {
                            return Err("at least one acquisition is required".into());
                        }
                    }
                    "divergence" => {
                        let s = string(value)?;
                        base.divergence = DivergenceKind::from_name(&s)
                            .ok_or_else(|| format!("unknown divergence '{s}'; valid options: chi2, tv, kl"))?;
                    }
                    "schedule" => schedule = string(value)?,
                    "eps" => eps = float(value)?,
                    "iterations" => base.iterations = count(value)?,
                    "initial_design" => base.initial_design = Some(count(value)?),
                    "contexts" => base.context_samples = count(value)?,
                    "context_sampling" => {
                        base.context_sampling = match string(value)?.as_str() {
                            "uniform" => ContextSampling::Uniform,
                            "grid" => ContextSampling::Grid,
                            s => return Err(format!("unknown context sampling '{s}'; valid options: uniform, grid")),
                        }
                    }
                    "sqrt_beta" => sqrt_beta = float(value)?,
                    "beta_schedule" => beta_schedule = string(value)?,
                    "kernel" => {
                        base.kernel = match string(value)?.as_str() {
                            "se" | "rbf" => KernelKind::SquaredExponential,
                            "matern52" => KernelKind::Matern52,
                            s => return Err(format!("unknown kernel '{s}'; valid options: se, matern52")),
                        }
                    }
                    "gp_noise" => base.gp_noise = float(value)?,
                    "center_targets" => base.center_targets = boolean(value)?,
                    "noise_sigma" => base.noise_sigma = float(value)?,
                    "seed" => base.seed = count(value)? as u64,
                    "repeats" => repeats = count(value)?,
                    "x_grid" => base.x_grid = count(value)?,
                    "c_grid" => base.c_grid = count(value)?,
                    "regret_eps" => base.regret_eps = Some(float(value)?),
                    "budget" => maximizer.budget = count(value)?,
                    "refine_passes" => maximizer.refine_passes = count(value)?,
                    "record_timing" => record_timing = boolean(value)?,
                    other => return Err(format!("unknown key '{other}'")),
                }
                Ok(())
            })();
            if let Err(msg) = r {
                bad.push(format!("{key}: {msg}"));
            }
        }

        base.radius = match schedule.as_str() {
            "fixed" => RadiusSchedule::Fixed(eps),
            "adaptive" => RadiusSchedule::Adaptive(base.divergence),
            s => {
                bad.push(format!("schedule: unknown schedule '{s}'; valid options: fixed, adaptive"));
                RadiusSchedule::Fixed(eps)
            }
        };
        base.exploration = match beta_schedule.as_str() {
            "constant" => ExplorationSchedule::Constant(sqrt_beta),
            "log" => ExplorationSchedule::LogGrowth(sqrt_beta),
            s => {
                bad.push(format!("beta_schedule: unknown schedule '{s}'; valid options: constant, log"));
                ExplorationSchedule::Constant(sqrt_beta)
            }
        };
        base.maximizer = maximizer;
        if repeats == 0 {
            bad.push("repeats: must be >= 1".into());
        }
        if BenchmarkFunction::by_name(&base.benchmark).is_err() {
            bad.push(format!(
                "benchmark: unknown benchmark '{}'; valid options: {}",
                base.benchmark,
                BENCHMARK_NAMES.join(", ")
            ));
        }
        if !bad.is_empty() {
            return Err(ConfigError(format!("invalid config values:\n  {}", bad.join("\n  "))));
        }

        let experiments: Vec<ExperimentConfig> = acquisitions
            .into_iter()
            .map(|acquisition| ExperimentConfig { acquisition, ..base.clone() })
            .collect();
        for e in &experiments {
            e.validate().map_err(|e| ConfigError(e.to_string()))?;
        }
        Ok(SuiteConfig {
            experiments,
            repeats,
            record_timing,
        })
    }
}

fn string(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        other => Err(format!("expected a string, got {other}")),
    }
}

fn float(v: &Value) -> Result<f64, String> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(format!("expected a number, got {other}")),
    }
}

fn count(v: &Value) -> Result<usize, String> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(format!("expected a nonnegative integer, got {other}")),
    }
}

fn boolean(v: &Value) -> Result<bool, String> {
    match v {
        Value::Boolean(b) => Ok(*b),
        other => Err(format!("expected true or false, got {other}")),
    }
}
