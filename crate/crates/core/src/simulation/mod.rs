//! Generative models and the Monte Carlo harness.

pub mod config;
pub mod experiment;
pub mod model;

pub use config::{ExperimentConfig, SimulationFile};
pub use experiment::{
    paired_bootstrap_mean_diff, run_experiment, write_results_csv, EstimatorKind, EstimatorSummary,
    ExperimentResult, TestKind, TestSummary,
};
pub use model::{
    replication_rng, sample_model, sample_model_seeded, ColumnOverride, Copula, Marginal, ModelSpec,
};
