//! Configuration-driven experiment runner: reads a TOML experiment, runs the
//! requested estimators or invariant suites and writes JSON and CSV reports.

pub mod config;
pub mod report;
pub mod run;

use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

use spde_galerkin::estimators::EstimatorError;
use spde_galerkin::solvers::SolverError;

pub use config::{ExperimentConfig, ExperimentKind, Overrides};
pub use report::{QuantityReport, Slope, SuiteRecord};
pub use run::{execute, run_experiment, RunOutcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("config is missing the [{0}] block")]
    MissingBlock(&'static str),
    /// Model admissibility; carries the violated rule.
    #[error("inadmissible model: rule `{0}` is violated")]
    Inadmissible(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("path diverged: seed {seed}, step {step}")]
    Diverged { seed: u64, step: usize },
    #[error(transparent)]
    Estimator(EstimatorError),
    #[error("cannot write report: {0}")]
    Output(String),
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Solver(SolverError::Diverged { seed, step }) => CliError::Diverged {
                seed: seed.unwrap_or_default(),
                step,
            },
            other => CliError::Estimator(other),
        }
    }
}

impl CliError {
    /// 2 for rejected configs, 3 for divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::MissingBlock(_) | CliError::Inadmissible(_) | CliError::Invalid(_) => 2,
            CliError::Diverged { .. } => 3,
            _ => 1,
        }
    }

    /// One-line JSON diagnostic for standard error.
    pub fn diagnostic(&self) -> serde_json::Value {
        let message = self.to_string();
        match self {
            CliError::Inadmissible(rule) => json!({ "error": "inadmissible", "rule": rule, "message": message }),
            CliError::Diverged { seed, step } => {
                json!({ "error": "diverged", "seed": seed, "step": step, "message": message })
            }
            CliError::Parse(_) | CliError::MissingBlock(_) | CliError::Invalid(_) => {
                json!({ "error": "invalid-config", "message": message })
            }
            CliError::Io { .. } | CliError::Output(_) => json!({ "error": "io", "message": message }),
            CliError::Estimator(_) => json!({ "error": "estimator", "message": message }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_names_seed_and_step() {
        let e: CliError = EstimatorError::Solver(SolverError::Diverged { seed: Some(42), step: 17 }).into();
        assert_eq!(e.exit_code(), 3);
        let d = e.diagnostic();
        assert_eq!((d["seed"].as_u64(), d["step"].as_u64()), (Some(42), Some(17)));
        assert!(e.to_string().contains("seed 42, step 17"));
    }
}
