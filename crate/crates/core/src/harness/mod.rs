//! Data ingestion, experiment configuration and orchestration, and the
//! report builders behind the `pls-lab` command line.

pub mod config;
mod dataset;
pub mod experiment;
pub mod gradcheck;
pub mod idx;
pub mod reports;

pub use config::{ExperimentConfig, GradcheckConfig, ProblemConfig, TargetKind};
pub use dataset::{load_mnist, Dataset};
pub use experiment::{records_csv, run_experiment, run_grid, write_outcome, Outcome, Summary, BASELINE_RATE_GRID};
pub use gradcheck::{check_gradients, gradcheck, GradcheckOptions, GradcheckReport};
