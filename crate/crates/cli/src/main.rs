use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drbo::verify::ClosedForms;
use drbo_cli::{cmd_list, cmd_run, cmd_verify, RunOptions};

#[derive(Parser)]
#[command(name = "drbo", version, about = "Distributionally robust Bayesian optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment suite and write manifest.json + results.csv.
    Run(Box<RunArgs>),
    /// Check the closed-form robust values against the brute-force oracle.
    Verify {
        #[arg(long, default_value = "default")]
        profile: String,
        /// Restrict to one divergence (chi2, tv, kl).
        #[arg(long)]
        divergence: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// List built-in benchmarks, acquisitions, divergences and schedules.
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $DRBO_OUT, else ./drbo-out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    force: bool,
    #[arg(long)]
    dry_run: bool,
    /// Generic override, repeatable: --set key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long)]
    benchmark: Option<String>,
    /// Comma-separated acquisition names.
    #[arg(long)]
    acquisitions: Option<String>,
    #[arg(long)]
    divergence: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    initial_design: Option<String>,
    #[arg(long)]
    contexts: Option<String>,
    #[arg(long)]
    context_sampling: Option<String>,
    #[arg(long)]
    sqrt_beta: Option<String>,
    #[arg(long)]
    beta_schedule: Option<String>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    gp_noise: Option<String>,
    #[arg(long)]
    center_targets: Option<String>,
    #[arg(long)]
    noise_sigma: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    x_grid: Option<String>,
    #[arg(long)]
    c_grid: Option<String>,
    #[arg(long)]
    regret_eps: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    refine_passes: Option<String>,
    #[arg(long)]
    record_timing: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>, String> {
        let mut v = Vec::new();
        for s in &self.set {
            let (k, val) = s
                .split_once('=')
                .ok_or_else(|| format!("--set expects KEY=VALUE, got '{s}'"))?;
            v.push((k.trim().to_string(), val.trim().to_string()));
        }
        let named = [
            ("benchmark", &self.benchmark),
            ("divergence", &self.divergence),
            ("schedule", &self.schedule),
            ("eps", &self.eps),
            ("iterations", &self.iterations),
            ("initial_design", &self.initial_design),
            ("contexts", &self.contexts),
            ("context_sampling", &self.context_sampling),
            ("sqrt_beta", &self.sqrt_beta),
            ("beta_schedule", &self.beta_schedule),
            ("kernel", &self.kernel),
            ("gp_noise", &self.gp_noise),
            ("center_targets", &self.center_targets),
            ("noise_sigma", &self.noise_sigma),
            ("seed", &self.seed),
            ("repeats", &self.repeats),
            ("x_grid", &self.x_grid),
            ("c_grid", &self.c_grid),
            ("regret_eps", &self.regret_eps),
            ("budget", &self.budget),
            ("refine_passes", &self.refine_passes),
            ("record_timing", &self.record_timing),
        ];
        for (k, val) in named {
            if let Some(val) = val {
                v.push((k.to_string(), val.clone()));
            }
        }
        if let Some(a) = &self.acquisitions {
            // Kept as a string; the resolver splits on commas.
            v.push(("acquisitions".into(), format!("\"{a}\"")));
        }
        Ok(v)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout();
    let mut err = io::stderr();
    let code = match cli.command {
        Command::Run(args) => match args.overrides() {
            Ok(overrides) => {
                let opts = RunOptions {
                    config_path: args.config.clone(),
                    overrides,
                    out_dir: args.out.clone(),
                    env_out_dir: std::env::var_os("DRBO_OUT").map(PathBuf::from),
                    jobs: args.jobs,
                    force: args.force,
                    dry_run: args.dry_run,
                };
                cmd_run(&opts, &mut out, &mut err)
            }
            Err(e) => {
                eprintln!("error: {e}");
                drbo_cli::commands::EXIT_CONFIG
            }
        },
        Command::Verify { profile, divergence, json } => {
            cmd_verify(&profile, divergence.as_deref(), json, &ClosedForms::default(), &mut out, &mut err)
        }
        Command::List { json } => cmd_list(json, &mut out),
    };
    ExitCode::from(code as u8)
}
