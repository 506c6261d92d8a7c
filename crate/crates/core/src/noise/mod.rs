//! Brownian paths with cross-resolution coupling, exact sampling of the
//! stochastic convolution, multiplication noise on the torus and the
//! commutator process.

mod convolution;
mod multiplication;
mod oracles;
mod path;

pub use convolution::{
    convolution_step_exact, convolution_step_multiplicative, ou_variance, stochastic_convolution, wave_convolution,
    OuPropagator,
};
pub use multiplication::{commutator_apply, sample_rho_n, MultiplicationOperator};
pub use oracles::{multiplicative_moment_oracle, rho_moment_oracle, tail_moment_oracle, TruncatedSum};
pub use path::{mode_normals, path_seed, sample_noise_path, NoisePath};

use thiserror::Error;

use crate::models::ModelError;
use crate::spectral::{Basis, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise path needs at least one mode and one step")]
    EmptyPath,
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("{required} modes required but only {available} available")]
    TooFewModes { required: usize, available: usize },
    #[error("noise path has {found} steps, solver grid has {expected}")]
    StepMismatch { expected: usize, found: usize },
    #[error("operation not defined on the {0} basis")]
    WrongBasis(Basis),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
