//! Spectral Galerkin discretization of semilinear SPDEs driven by Q-Wiener
//! noise, with coupled Monte Carlo estimators for strong and weak errors.

pub mod estimators;
pub mod models;
pub mod noise;
pub mod scalar;
pub mod solvers;
pub mod spectral;
pub mod suites;

pub use scalar::Scalar;

/// Double-precision spectral field.
pub type Field = spectral::SpectralField<f64>;
/// Double-precision phase-space field (wave family).
pub type Phase = spectral::PhaseField<f64>;
/// Double-precision noise path.
pub type Path = noise::NoisePath<f64>;
/// Double-precision model state.
pub type State = solvers::ModelState<f64>;
/// Double-precision Galerkin integrator.
pub type Integrator = solvers::GalerkinIntegrator<f64>;
