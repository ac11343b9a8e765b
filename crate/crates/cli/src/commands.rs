//! The `run`, `verify` and `list` verbs, written against injectable output
//! streams so they can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use drbo::acquisition::ACQUISITION_NAMES;
use drbo::benchmarks::{BenchmarkFunction, BENCHMARK_NAMES};
use drbo::divergence::DivergenceKind;
use drbo::engine::run_suite;
use drbo::verify::{run_verify, ClosedForms, ToleranceProfile};
use serde_json::json;

use crate::config::{RawConfig, SuiteConfig};
use crate::output::{config_hash, run_id, run_seeds, summarize, write_csv, FailedRun, RunManifest, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

pub const DEFAULT_OUT_DIR: &str = "drbo-out";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.csv";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config_path: Option<PathBuf>,
    /// `(key, value)` pairs applied after the file, in order.
    pub overrides: Vec<(String, String)>,
    pub out_dir: Option<PathBuf>,
    /// Fallback output directory, normally from `DRBO_OUT`.
    pub env_out_dir: Option<PathBuf>,
    pub jobs: usize,
    pub force: bool,
    pub dry_run: bool,
}

impl RunOptions {
    pub fn resolved_out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| self.env_out_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

pub fn load_suite(opts: &RunOptions) -> Result<SuiteConfig, String> {
    let mut raw = match &opts.config_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            RawConfig::parse(&text).map_err(|e| e.to_string())?
        }
        None => RawConfig::default(),
    };
    for (k, v) in &opts.overrides {
        raw.set_str(k, v).map_err(|e| e.to_string())?;
    }
    raw.resolve().map_err(|e| e.to_string())
}

pub fn cmd_run(opts: &RunOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let suite = match load_suite(opts) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let hash = config_hash(&suite);

    if opts.dry_run {
        let doc = json!({ "config_hash": hash, "config": suite });
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
        return EXIT_OK;
    }

    let dir = opts.resolved_out_dir();
    let results_path = dir.join(RESULTS_FILE);
    let manifest_path = dir.join(MANIFEST_FILE);
    if !opts.force && (results_path.exists() || manifest_path.exists()) {
        let _ = writeln!(
            err,
            "error: {} already holds results; pass --force to overwrite",
            dir.display()
        );
        return EXIT_CONFIG;
    }

    let input_dim = match BenchmarkFunction::by_name(&suite.experiments[0].benchmark) {
        Ok(f) => f.input_dim(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let runs = match run_suite(&suite.experiments, suite.repeats, opts.jobs.max(1)) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };

    let mut failures = Vec::new();
    let mut any_numerical = false;
    for run in &runs {
        if let Err(e) = &run.result {
            any_numerical |= e.is_numerical();
            let _ = writeln!(err, "run {} failed: {e}", run_id(run));
            failures.push(FailedRun {
                run_id: run_id(run),
                error: e.to_string(),
            });
        }
    }

    if let Err(e) = write_outputs(&dir, &suite, &hash, &runs, input_dim, failures.clone()) {
        let _ = writeln!(err, "error: cannot write results to {}: {e}", dir.display());
        return EXIT_CONFIG;
    }
    let _ = writeln!(
        out,
        "wrote {} runs ({} failed) to {} [config {}]",
        runs.len(),
        failures.len(),
        dir.display(),
        &hash[..12]
    );
    let _ = writeln!(
        out,
        "{:<28} {:>4} {:>22} {:>30}",
        "method", "runs", "final R_T mean±se", "median [q1, q3]"
    );
    for m in summarize(&runs) {
        let _ = writeln!(
            out,
            "{:<28} {:>4} {:>22} {:>30}",
            m.label,
            m.runs,
            format!("{:.4}±{:.4}", m.mean, m.stderr),
            format!("{:.4} [{:.4}, {:.4}]", m.median, m.q1, m.q3)
        );
    }

    if failures.is_empty() {
        EXIT_OK
    } else if failures.len() == runs.len() {
        if any_numerical {
            EXIT_NUMERICAL
        } else {
            EXIT_CONFIG
        }
    } else {
        EXIT_PARTIAL
    }
}

fn write_outputs(
    dir: &Path,
    suite: &SuiteConfig,
    hash: &str,
    runs: &[drbo::SuiteRun],
    input_dim: usize,
    failures: Vec<FailedRun>,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, runs, input_dim, suite.record_timing)?;
    fs::write(dir.join(RESULTS_FILE), csv)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        config_hash: hash.to_string(),
        config: suite.clone(),
        results_file: RESULTS_FILE.to_string(),
        seeds: run_seeds(runs),
        failures,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    fs::write(dir.join(MANIFEST_FILE), text + "\n")
}

pub fn cmd_verify(
    profile: &str,
    divergence: Option<&str>,
    json_out: bool,
    forms: &ClosedForms,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let profile = match ToleranceProfile::by_name(profile) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let only = match divergence.map(|d| (d, DivergenceKind::from_name(d))) {
        None => None,
        Some((_, Some(k))) => Some(k),
        Some((d, None)) => {
            let _ = writeln!(err, "error: unknown divergence '{d}'; valid options: chi2, tv, kl");
            return EXIT_CONFIG;
        }
    };
    let results = match run_verify(&profile, only, forms) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    if json_out {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&results).expect("json"));
    } else {
        let _ = writeln!(out, "{:<6} {:<22} {:>6} {:>12} {:>10}  result", "div", "check", "cases", "worst", "tol");
        for r in &results {
            let _ = writeln!(
                out,
                "{:<6} {:<22} {:>6} {:>12.3e} {:>10.1e}  {}",
                r.divergence.name(),
                r.check,
                r.cases,
                r.worst,
                r.tolerance,
                if r.passed { "PASS" } else { "FAIL" }
            );
        }
    }
    if results.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

pub const SCHEDULE_NAMES: [&str; 2] = ["fixed", "adaptive"];

pub fn cmd_list(json_out: bool, out: &mut dyn Write) -> i32 {
    let divergences: Vec<&str> = DivergenceKind::ALL.iter().map(|d| d.name()).collect();
    if json_out {
        let doc = json!({
            "benchmarks": BENCHMARK_NAMES,
            "acquisitions": ACQUISITION_NAMES,
            "divergences": divergences,
            "schedules": SCHEDULE_NAMES,
        });
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        let _ = writeln!(out, "benchmarks:   {}", BENCHMARK_NAMES.join(", "));
        let _ = writeln!(out, "acquisitions: {}", ACQUISITION_NAMES.join(", "));
        let _ = writeln!(out, "divergences:  {}", divergences.join(", "));
        let _ = writeln!(out, "schedules:    {}", SCHEDULE_NAMES.join(", "));
    }
    EXIT_OK
}
