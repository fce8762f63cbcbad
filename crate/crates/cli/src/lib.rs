//! Batch experiment runner: named scenarios, JSON configs, CSV traces and a
//! JSON summary per run.

pub mod config;
pub mod error;
pub mod runner;
pub mod scenarios;

pub use config::{ConstantSpec, Estimate, ExperimentConfig, SolverKind};
pub use error::{CliError, EXIT_AUDIT, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};
pub use runner::{execute, run_experiment, trace_csv, write_outputs, Outcome, Summary};
pub use scenarios::{
    build_instance, estimate_game_constants, estimate_problem_constants, list_scenarios,
    ScenarioName,
};
