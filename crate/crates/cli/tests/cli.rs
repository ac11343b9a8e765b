use std::fs;
use std::path::Path;
use std::process::Command;

use drbo::verify::ClosedForms;
use drbo::{robust_value_tv, Result};
use drbo_cli::commands::{EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK};
use drbo_cli::{cmd_run, cmd_verify, RunOptions};
use serde_json::Value;

fn drbo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_drbo"))
        .args(args)
        .env_remove("DRBO_OUT")
        .output()
        .expect("spawn drbo")
}

fn write_minimal(dir: &Path) -> String {
    let path = dir.join("min.toml");
    fs::write(
        &path,
        "benchmark = \"gap\"\nacquisitions = [\"dro_tv\"]\nschedule = \"fixed\"\neps = 0.5\niterations = 10\nrepeats = 2\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn minimal_run_writes_twenty_rows_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_minimal(tmp.path());
    let out = tmp.path().join("out");
    let o = drbo(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 21);
    assert_eq!(lines[0], "run_id,seed,iter,x_0,c,y,eps_t,r_t,R_t,wall_ms");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 10));

    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["results_file"], "results.csv");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["config"]["repeats"], 2);
    let seeds = manifest["seeds"].as_array().unwrap();
    assert_eq!(seeds.len(), 2);
    assert_eq!(seeds[1]["seed"], 1);
    assert!(lines[20].starts_with(&format!("{},1,", seeds[1]["run_id"].as_str().unwrap())));
    assert!(String::from_utf8_lossy(&o.stdout).contains("median [q1, q3]"));
}

#[test]
fn eps_override_is_recorded_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_minimal(tmp.path());
    let out = tmp.path().join("out");
    let o = drbo(&["run", "--config", &cfg, "--eps", "0.25", "--iterations", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["experiments"][0]["radius"]["Fixed"], 0.25);
    assert_eq!(manifest["config"]["experiments"][0]["iterations"], 3);
}

#[test]
fn dry_run_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_minimal(tmp.path());
    let out = tmp.path().join("out");
    let o = drbo(&["run", "--config", &cfg, "--dry-run", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["experiments"].as_array().unwrap().len(), 1);
    assert!(!out.exists());
}

#[test]
fn existing_results_need_force() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_minimal(tmp.path());
    let out = tmp.path().join("out");
    let out_s = out.to_str().unwrap();
    assert!(drbo(&["run", "--config", &cfg, "--iterations", "2", "--out", out_s]).status.success());
    let again = drbo(&["run", "--config", &cfg, "--iterations", "2", "--out", out_s]);
    assert_eq!(again.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&again.stderr).contains("--force"));
    assert!(drbo(&["run", "--config", &cfg, "--iterations", "2", "--out", out_s, "--force"]).status.success());
}

#[test]
fn out_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_minimal(tmp.path());
    let env_dir = tmp.path().join("from-env");
    let opts = RunOptions {
        config_path: Some(cfg.into()),
        overrides: vec![("iterations".into(), "2".into()), ("repeats".into(), "1".into())],
        env_out_dir: Some(env_dir.clone()),
        jobs: 1,
        ..Default::default()
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(cmd_run(&opts, &mut out, &mut err), EXIT_OK);
    assert!(env_dir.join("results.csv").exists());
}

#[test]
fn bad_config_lists_every_offending_key() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(&path, "benchmark = \"nope\"\nacquisitions = [\"dro_tv\"]\ncolour = 3\n").unwrap();
    let o = drbo(&["run", "--config", path.to_str().unwrap(), "--dry-run"]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("colour"), "{msg}");

    fs::write(&path, "benchmark = \"nope\"\nacquisitions = [\"dro_tv\", \"ei\"]\n").unwrap();
    let o = drbo(&["run", "--config", path.to_str().unwrap(), "--dry-run"]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("nope") && msg.contains("ei") && msg.contains("branin"), "{msg}");
}

#[test]
fn set_override_matches_named_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_minimal(tmp.path());
    let a = drbo(&["run", "--config", &cfg, "--dry-run", "--set", "eps=0.1", "--acquisitions", "dro_tv,ucb"]);
    let b = drbo(&["run", "--config", &cfg, "--dry-run", "--eps", "0.1", "--set", "acquisitions=dro_tv,ucb"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["config"]["experiments"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_default_profile_passes() {
    let o = drbo(&["verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let table = String::from_utf8_lossy(&o.stdout);
    assert_eq!(table.matches("PASS").count(), 6);
}

#[test]
fn verify_divergence_filter_and_json() {
    let o = drbo(&["verify", "--profile", "quick", "--divergence", "chi2", "--json"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = doc.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["divergence"] == "Chi2" || r["divergence"] == "chi2"));

    let bad = drbo(&["verify", "--divergence", "hellinger"]);
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
}

fn tv_flipped(f: &[f64], w: &[f64], eps: f64) -> Result<f64> {
    // Sign error in the penalty: mean + (ε/2)·spread.
    let mean: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
    Ok(2.0 * mean - robust_value_tv(f, w, eps)?)
}

#[test]
fn verify_flags_a_sign_error_in_tv() {
    let forms = ClosedForms {
        tv: tv_flipped,
        ..ClosedForms::default()
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cmd_verify("default", None, false, &forms, &mut out, &mut err);
    assert_eq!(code, EXIT_CHECK_FAILED);
    let table = String::from_utf8(out).unwrap();
    let failing: Vec<&str> = table.lines().filter(|l| l.ends_with("FAIL")).collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|l| l.starts_with("tv ")), "{table}");
}

#[test]
fn list_reports_registries() {
    let o = drbo(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["gap", "six_hump_camel", "dro_kl", "stableopt", "adaptive"] {
        assert!(text.contains(name), "{name} missing");
    }

    let o = drbo(&["list", "--json"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["divergences"], serde_json::json!(["chi2", "tv", "kl"]));
    assert_eq!(doc["benchmarks"].as_array().unwrap().len(), 5);
    assert_eq!(doc["schedules"], serde_json::json!(["fixed", "adaptive"]));
}
