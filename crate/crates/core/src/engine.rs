//! The DRBO outer loop, baseline loops and robust-regret tracking.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{
    maximize_acq, AcquisitionContext, AcquisitionKind, ExplorationSchedule, InputBox, MaximizerSettings,
};
use crate::benchmarks::BenchmarkFunction;
use crate::divergence::{self, default_lambda_grid, epsilon_at, ContextSet, DivergenceKind, RadiusSchedule};
use crate::error::{DrboError, Result};
use crate::gp::{default_hyperparameter_grid, fit_hyperparams_with, Dataset, FitOptions, GpPosterior};
use crate::kernel::{JointInput, KernelKind, KernelSpec};

/// Hyperparameters are refit every iteration up to this one, then every
/// [`REFIT_EVERY`] iterations.
pub const REFIT_ALWAYS_UNTIL: usize = 25;
pub const REFIT_EVERY: usize = 5;

/// How the per-iteration context sample `{c_j}` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextSampling {
    /// iid uniform over the context interval, redrawn every iteration.
    Uniform,
    /// Evenly spaced grid including both endpoints.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub benchmark: String,
    pub acquisition: AcquisitionKind,
    pub divergence: DivergenceKind,
    pub radius: RadiusSchedule,
    pub iterations: usize,
    /// `None` means `3·(d_x + 1)`.
    pub initial_design: Option<usize>,
    pub context_samples: usize,
    pub context_sampling: ContextSampling,
    pub exploration: ExplorationSchedule,
    pub kernel: KernelKind,
    /// Noise variance assumed by every kernel in the hyperparameter grid.
    pub gp_noise: f64,
    pub center_targets: bool,
    /// Observation noise standard deviation of the benchmark.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Points per input dimension of the regret grid.
    pub x_grid: usize,
    /// Points of the context grid used by the regret oracle.
    pub c_grid: usize,
    /// Radius used to score regret; `None` uses the schedule's `ε_t`.
    pub regret_eps: Option<f64>,
    pub maximizer: MaximizerSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            benchmark: "gap".into(),
            acquisition: AcquisitionKind::DroTv,
            divergence: DivergenceKind::TotalVariation,
            radius: RadiusSchedule::Fixed(0.5),
            iterations: 30,
            initial_design: None,
            context_samples: 30,
            context_sampling: ContextSampling::Uniform,
            exploration: ExplorationSchedule::default(),
            kernel: KernelKind::SquaredExponential,
            gp_noise: 1e-2,
            center_targets: false,
            noise_sigma: 0.0,
            seed: 0,
            x_grid: 200,
            c_grid: 101,
            regret_eps: None,
            maximizer: MaximizerSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<BenchmarkFunction> {
        let f = BenchmarkFunction::by_name(&self.benchmark)?;
        if self.iterations < 1 {
            return Err(DrboError::config("iterations must be >= 1"));
        }
        if self.initial_design == Some(0) {
            return Err(DrboError::config("initial design size must be >= 1"));
        }
        if self.context_samples < 2 {
            return Err(DrboError::config("context sample size must be >= 2"));
        }
        if self.x_grid < 1 || self.c_grid < 1 {
            return Err(DrboError::config("regret grids must be nonempty"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(DrboError::config("noise_sigma must be >= 0"));
        }
        if !(self.gp_noise.is_finite() && self.gp_noise >= 0.0) {
            return Err(DrboError::config("gp_noise must be >= 0"));
        }
        if let Some(e) = self.regret_eps {
            if !(e.is_finite() && e >= 0.0) {
                return Err(DrboError::config("regret_eps must be >= 0"));
            }
        }
        if self.maximizer.budget == 0 {
            return Err(DrboError::config("maximizer budget must be >= 1"));
        }
        self.radius.validate()?;
        self.exploration.validate()?;
        self.acquisition.validate()?;
        Ok(f.with_noise(self.noise_sigma))
    }

    pub fn initial_design_size(&self, input_dim: usize) -> usize {
        self.initial_design.unwrap_or(3 * (input_dim + 1))
    }

    /// Short label identifying the method, e.g. `dro_tv-tv-fixed0.5`.
    pub fn label(&self) -> String {
        let sched = match self.radius {
            RadiusSchedule::Fixed(e) => format!("fixed{e}"),
            RadiusSchedule::Adaptive(_) => "adaptive".to_string(),
        };
        format!("{}-{}-{}", self.acquisition.name(), self.divergence, sched)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub x: Vec<f64>,
    pub c: f64,
    pub y: f64,
    pub eps_t: f64,
    pub r_t: f64,
    pub cum_regret: f64,
    /// Wall time of the whole iteration.
    pub wall_ms: f64,
    /// Wall time spent maximizing the acquisition.
    pub acq_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub seed: u64,
    pub initial_design: usize,
    pub dataset_len: usize,
    pub iterations: Vec<IterationRecord>,
}

impl RegretRecord {
    pub fn final_regret(&self) -> f64 {
        self.iterations.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn selected_inputs(&self) -> Vec<Vec<f64>> {
        self.iterations.iter().map(|r| r.x.clone()).collect()
    }

    /// Mean acquisition-maximization time per iteration, in milliseconds.
    pub fn mean_acq_ms(&self) -> f64 {
        if self.iterations.is_empty() {
            return 0.0;
        }
        self.iterations.iter().map(|r| r.acq_ms).sum::<f64>() / self.iterations.len() as f64
    }
}

/// `n` evenly spaced points on `[lo, hi]`; a single point sits at the midpoint.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Cartesian grid with `per_dim` points along every side of `bounds`.
pub fn input_grid(bounds: &[(f64, f64)], per_dim: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = bounds.iter().map(|&(lo, hi)| linspace(lo, hi, per_dim)).collect();
    let mut grid = vec![vec![]];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    grid
}

fn robust_of(kind: DivergenceKind, values: &[f64], weights: &[f64], eps: f64, lambdas: &[f64]) -> f64 {
    match kind {
        DivergenceKind::Chi2 => divergence::chi2_unchecked(values, weights, eps),
        DivergenceKind::TotalVariation => divergence::tv_unchecked(values, weights, eps),
        DivergenceKind::Kl => divergence::kl_unchecked(values, weights, eps, lambdas),
    }
}

/// Robust regret at one iteration, computed from scratch.
///
/// Returns `(r_t, x*)`, with `x*` the grid maximizer of the robust value
/// under uniform weights on `c_grid`.
pub fn robust_regret_step(
    f: &BenchmarkFunction,
    kind: DivergenceKind,
    eps_t: f64,
    x_t: &[f64],
    x_grid: &[Vec<f64>],
    c_grid: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let mut oracle = RegretOracle::new(f, kind, x_grid.to_vec(), c_grid.to_vec())?;
    oracle.regret(eps_t, x_t)
}

/// Caches true function values on the regret grid for a whole run.
pub struct RegretOracle {
    f: BenchmarkFunction,
    kind: DivergenceKind,
    x_grid: Vec<Vec<f64>>,
    c_grid: Vec<f64>,
    weights: Vec<f64>,
    lambdas: Vec<f64>,
    /// Row-major `x_grid.len() × c_grid.len()` noise-free values.
    values: Vec<f64>,
    best_by_eps: HashMap<u64, (f64, usize)>,
}

impl RegretOracle {
    pub fn new(
        f: &BenchmarkFunction,
        kind: DivergenceKind,
        x_grid: Vec<Vec<f64>>,
        c_grid: Vec<f64>,
    ) -> Result<Self> {
        if x_grid.is_empty() || c_grid.is_empty() {
            return Err(DrboError::config("regret grids must be nonempty"));
        }
        let f = f.clone().with_noise(0.0);
        let mut values = Vec::with_capacity(x_grid.len() * c_grid.len());
        for x in &x_grid {
            for &c in &c_grid {
                values.push(f.evaluate(x, c)?);
            }
        }
        let weights = vec![1.0 / c_grid.len() as f64; c_grid.len()];
        Ok(RegretOracle {
            f,
            kind,
            x_grid,
            c_grid,
            weights,
            lambdas: default_lambda_grid(),
            values,
            best_by_eps: HashMap::new(),
        })
    }

    /// Robust value of `x` under uniform weights on the context grid.
    pub fn robust_value(&self, x: &[f64], eps: f64) -> Result<f64> {
        let vals = self
            .c_grid
            .iter()
            .map(|&c| self.f.evaluate(x, c))
            .collect::<Result<Vec<f64>>>()?;
        Ok(robust_of(self.kind, &vals, &self.weights, eps, &self.lambdas))
    }

    /// Grid maximizer of the robust value and its value.
    pub fn best(&mut self, eps: f64) -> (f64, &[f64]) {
        let n_c = self.c_grid.len();
        let (kind, weights, lambdas, values) = (self.kind, &self.weights, &self.lambdas, &self.values);
        let &mut (v, i) = self.best_by_eps.entry(eps.to_bits()).or_insert_with(|| {
            let mut best = (f64::NEG_INFINITY, 0);
            for (i, row) in values.chunks_exact(n_c).enumerate() {
                let v = robust_of(kind, row, weights, eps, lambdas);
                if v > best.0 {
                    best = (v, i);
                }
            }
            best
        });
        (v, &self.x_grid[i])
    }

    /// `(r_t, x*)` for the choice `x_t` at radius `eps`.
    pub fn regret(&mut self, eps: f64, x_t: &[f64]) -> Result<(f64, Vec<f64>)> {
        let chosen = self.robust_value(x_t, eps)?;
        let (best, x_star) = self.best(eps);
        Ok((best - chosen, x_star.to_vec()))
    }
}

fn draw_contexts(cfg: &ExperimentConfig, interval: (f64, f64), rng: &mut ChaCha8Rng) -> Result<ContextSet> {
    let supports = match cfg.context_sampling {
        ContextSampling::Uniform => (0..cfg.context_samples)
            .map(|_| rng.random_range(interval.0..=interval.1))
            .collect(),
        ContextSampling::Grid => linspace(interval.0, interval.1, cfg.context_samples),
    };
    ContextSet::uniform(supports)
}

fn needs_refit(t: usize) -> bool {
    t <= REFIT_ALWAYS_UNTIL || t.is_multiple_of(REFIT_EVERY)
}

/// One full optimization run. Deterministic given `config.seed`.
pub fn run_drbo(config: &ExperimentConfig) -> Result<RegretRecord> {
    let f = config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bounds = InputBox(f.input_box.clone());
    let ctx_interval = f.context_interval;
    let n0 = config.initial_design_size(f.input_dim());

    let mut data = Dataset::new();
    for _ in 0..n0 {
        let x = bounds.sample(&mut rng);
        let c = rng.random_range(ctx_interval.0..=ctx_interval.1);
        let y = f.observe(&x, c, &mut rng)?;
        data.push(JointInput::new(x, c), y)?;
    }

    let x_grid = input_grid(&f.input_box, config.x_grid);
    let c_grid = linspace(ctx_interval.0, ctx_interval.1, config.c_grid);
    let mut oracle = RegretOracle::new(&f, config.divergence, x_grid, c_grid)?;

    let grid = default_hyperparameter_grid(config.kernel, &f.joint_widths(), config.gp_noise);
    let opts = FitOptions {
        center_targets: config.center_targets,
    };
    let mut spec: Option<KernelSpec> = None;
    let mut records = Vec::with_capacity(config.iterations);
    let mut cumulative = 0.0;

    for t in 1..=config.iterations {
        let at = |e: DrboError| DrboError::AtIteration {
            iteration: t,
            source: Box::new(e),
        };
        let started = Instant::now();

        if spec.is_none() || needs_refit(t) {
            spec = Some(fit_hyperparams_with(&data, &grid, opts).map_err(at)?);
        }
        let posterior =
            GpPosterior::fit_with(&data, spec.as_ref().expect("fitted above"), opts).map_err(at)?;

        let eps_t = epsilon_at(config.radius, t);
        let contexts = draw_contexts(config, ctx_interval, &mut rng).map_err(at)?;
        let ctx = AcquisitionContext::new(&posterior, &contexts, eps_t, config.exploration.sqrt_beta(t))
            .map_err(at)?;

        let acq_started = Instant::now();
        let x_t = maximize_acq(config.acquisition, &ctx, &bounds, &config.maximizer, &mut rng).map_err(at)?;
        let acq_ms = acq_started.elapsed().as_secs_f64() * 1e3;

        let c_t = rng.random_range(ctx_interval.0..=ctx_interval.1);
        let y_t = f.observe(&x_t, c_t, &mut rng).map_err(at)?;
        data.push(JointInput::new(x_t.clone(), c_t), y_t).map_err(at)?;

        let (r_t, _) = oracle.regret(config.regret_eps.unwrap_or(eps_t), &x_t).map_err(at)?;
        cumulative += r_t;

        records.push(IterationRecord {
            iter: t,
            x: x_t,
            c: c_t,
            y: y_t,
            eps_t,
            r_t,
            cum_regret: cumulative,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            acq_ms,
        });
    }

    Ok(RegretRecord {
        seed: config.seed,
        initial_design: n0,
        dataset_len: data.len(),
        iterations: records,
    })
}

/// Seed for `repeat` of config number `config_index`.
pub fn derive_seed(base_seed: u64, config_index: usize, repeat: usize) -> u64 {
    base_seed
        .wrapping_add(1000 * config_index as u64)
        .wrapping_add(repeat as u64)
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub config_index: usize,
    pub repeat: usize,
    pub config: ExperimentConfig,
    pub result: Result<RegretRecord>,
}

/// Runs every config `repeats` times on `parallelism` workers.
///
/// Results are ordered by `(config, repeat)` whatever the degree of
/// parallelism; a failing run is recorded and the rest continue.
pub fn run_suite(configs: &[ExperimentConfig], repeats: usize, parallelism: usize) -> Result<Vec<SuiteRun>> {
    if repeats == 0 {
        return Err(DrboError::config("repeats must be >= 1"));
    }
    let jobs: Vec<(usize, usize, ExperimentConfig)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, cfg)| {
            (0..repeats).map(move |r| {
                let mut c = cfg.clone();
                c.seed = derive_seed(cfg.seed, ci, r);
                (ci, r, c)
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| DrboError::config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.into_par_iter()
            .map(|(config_index, repeat, config)| {
                let result = run_drbo(&config);
                SuiteRun {
                    config_index,
                    repeat,
                    config,
                    result,
                }
            })
            .collect()
    }))
}
