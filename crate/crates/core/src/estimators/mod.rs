//! Coupled Monte Carlo estimation of strong and weak Galerkin errors, test
//! functionals, closed-form oracles for the linear case and rate fits.

mod diagnostics;
mod engine;
mod functional;
mod oracles;
mod report;

pub use diagnostics::{
    independence_diagnostic, model_convolution, noise_levels, step_halving_check, IndependenceReport,
    StepHalvingReport,
};
pub use engine::{
    coupled_error_curves, coupled_samples, strong_error_curve, weak_error_curve, CoupledPlan, CoupledReports,
    CoupledSamples, DEFAULT_EPSILON, MIN_PATHS,
};
pub use functional::{
    default_probe, eval_test_functional, inner_value, FunctionalAccumulator, InnerMap, OuterMap, TestFunctional,
};
pub use oracles::{
    cosine_expectation, gaussian_bump_expectation, linear_functional_expectation, linear_gaussian_modes,
    linear_phi_expectation, linear_weak_error_oracle, GaussianModes,
};
pub use report::{fit_rate, mean_and_stderr, pairwise_sum, ErrorPoint, ErrorReport, RateFit, CONFIDENCE};

use thiserror::Error;

use crate::models::ModelError;
use crate::noise::NoiseError;
use crate::solvers::SolverError;
use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("at least {required} Monte Carlo paths are required, got {found}")]
    TooFewPaths { required: usize, found: usize },
    #[error("a rate fit needs at least 3 usable points, got {0}")]
    TooFewPoints(usize),
    #[error("a rate fit needs positive values, got {value} at N = {n}")]
    NonPositive { n: f64, value: f64 },
    #[error("invalid resolutions: {0}")]
    Resolutions(String),
    #[error("invalid functional window: {0}")]
    Window(String),
    #[error("no closed-form oracle for {0}")]
    NoOracle(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
