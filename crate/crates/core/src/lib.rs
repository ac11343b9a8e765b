//! Distributionally robust Bayesian optimization over φ-divergence balls.
//!
//! A GP surrogate is fitted on the joint `[x, c]` space; acquisition functions
//! score a candidate `x` by a closed-form worst case of its UCB over a
//! χ², total-variation or KL ball around the sampled context distribution.

pub mod acquisition;
pub mod benchmarks;
pub mod divergence;
pub mod engine;
pub mod error;
pub mod gp;
pub mod kernel;
pub mod verify;

pub use acquisition::{
    acq_value, maximize_acq, AcquisitionContext, AcquisitionKind, ExplorationSchedule, InputBox, KlLambda,
    MaximizerSettings,
};
pub use benchmarks::{BenchmarkFunction, BenchmarkId, BENCHMARK_NAMES};
pub use divergence::{
    dual_objective, epsilon_at, gamma_inverse, gamma_map, phi_conjugate, robust_value_chi2, robust_value_kl,
    robust_value_tv, worst_case_oracle, ContextSet, DivergenceKind, DualPoint, RadiusSchedule,
};
pub use engine::{run_drbo, run_suite, ContextSampling, ExperimentConfig, RegretRecord, SuiteRun};
pub use error::{DrboError, Result};
pub use gp::{fit_hyperparams, gp_fit, log_marginal_likelihood, Dataset, GpPosterior, Surrogate};
pub use kernel::{kernel_eval, JointInput, KernelKind, KernelSpec};
