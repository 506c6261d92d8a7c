//! Time integration of the Galerkin systems, the Itô map and the residual
//! `R_N`.

mod integrator;
mod ito;

pub use integrator::{integrate_galerkin, GalerkinIntegrator};
pub use ito::{
    frechet_check_ito_map, ito_map, ito_map_picard, residual_r_n, FrechetReport, ItoMap, PicardOutcome,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ModelError;
use crate::noise::NoiseError;
use crate::spectral::{GridState, PhaseField, SpectralError, SpectralField};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("non-finite state at step {step} (seed {seed:?})")]
    Diverged { seed: Option<u64>, step: usize },
    #[error("fixed-point iteration did not reach {tolerance:e} within {iterations} iterations (last change {change:e})")]
    NoConvergence {
        tolerance: f64,
        iterations: usize,
        change: f64,
    },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("state kind does not match the model family")]
    StateKind,
    #[error("resolution {requested} exceeds the available {available}")]
    Resolution { requested: usize, available: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepPolicy {
    Fixed,
    /// Double the step count until the monitored statistic moves by less
    /// than `tolerance` (relative), at most `max_halvings` times.
    HalveUntilStable {
        tolerance: f64,
        #[serde(default = "default_max_halvings")]
        max_halvings: usize,
    },
}

fn default_max_halvings() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub m_steps: usize,
    #[serde(default = "default_policy")]
    pub step_policy: StepPolicy,
    /// Tolerance of the fixed-point verification of the Itô map; the identity
    /// checks compare against ten times this value.
    #[serde(default = "default_picard_tolerance")]
    pub picard_tolerance: f64,
    #[serde(default = "default_max_picard")]
    pub max_picard_iterations: usize,
    /// Collocation nodes for `F`; `None` uses `4 N` per resolution.
    #[serde(default)]
    pub collocation_nodes: Option<usize>,
}

fn default_policy() -> StepPolicy {
    StepPolicy::Fixed
}

fn default_picard_tolerance() -> f64 {
    1e-10
}

fn default_max_picard() -> usize {
    200
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            m_steps: 2048,
            step_policy: default_policy(),
            picard_tolerance: default_picard_tolerance(),
            max_picard_iterations: default_max_picard(),
            collocation_nodes: None,
        }
    }
}

impl SolverConfig {
    pub fn with_steps(m_steps: usize) -> Self {
        Self {
            m_steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.m_steps < 2 {
            return Err(SolverError::Config("M_steps >= 2".into()));
        }
        if !(self.picard_tolerance > 0.0) {
            return Err(SolverError::Config("Picard tolerance > 0".into()));
        }
        if self.max_picard_iterations == 0 {
            return Err(SolverError::Config("max Picard iterations >= 1".into()));
        }
        if let StepPolicy::HalveUntilStable { tolerance, .. } = self.step_policy {
            if !(tolerance > 0.0) {
                return Err(SolverError::Config("step-halving tolerance > 0".into()));
            }
        }
        Ok(())
    }

    /// Node count used for a system of resolution `n`.
    pub fn nodes_for(&self, n: usize) -> usize {
        self.collocation_nodes.unwrap_or(4 * n)
    }
}

/// State of a model: a scalar field (heat, torus) or a phase-space pair
/// (wave).
#[derive(Clone, Debug, PartialEq)]
pub enum ModelState<T> {
    Field(SpectralField<T>),
    Phase(PhaseField<T>),
}

impl<T: Scalar> ModelState<T> {
    pub fn as_field(&self) -> Option<&SpectralField<T>> {
        match self {
            ModelState::Field(u) => Some(u),
            ModelState::Phase(_) => None,
        }
    }

    pub fn as_phase(&self) -> Option<&PhaseField<T>> {
        match self {
            ModelState::Phase(x) => Some(x),
            ModelState::Field(_) => None,
        }
    }

    /// The displacement `u` (the field itself for parabolic models).
    pub fn position(&self) -> &SpectralField<T> {
        match self {
            ModelState::Field(u) => u,
            ModelState::Phase(x) => &x.position,
        }
    }

    pub fn resized(&self, resolution: usize) -> Self {
        match self {
            ModelState::Field(u) => ModelState::Field(u.resized(resolution)),
            ModelState::Phase(x) => ModelState::Phase(x.resized(resolution)),
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        match self {
            ModelState::Field(u) => ModelState::Field(u.scaled(alpha)),
            ModelState::Phase(x) => {
                let mut y = x.clone();
                y.position = x.position.scaled(alpha);
                y.velocity = x.velocity.scaled(alpha);
                ModelState::Phase(y)
            }
        }
    }

    pub fn axpy(&mut self, alpha: T, other: &Self) -> Result<(), SolverError> {
        match (self, other) {
            (ModelState::Field(a), ModelState::Field(b)) => a.axpy(alpha, b),
            (ModelState::Phase(a), ModelState::Phase(b)) => a.axpy(alpha, b),
            _ => return Err(SolverError::StateKind),
        }
        Ok(())
    }

    pub fn project(&self, n: usize) -> Result<Self, SolverError> {
        Ok(match self {
            ModelState::Field(u) => ModelState::Field(u.project(n)?),
            ModelState::Phase(x) => ModelState::Phase(x.project(n)?),
        })
    }

    pub fn project_complement(&self, n: usize) -> Result<Self, SolverError> {
        Ok(match self {
            ModelState::Field(u) => ModelState::Field(u.project_complement(n)?),
            ModelState::Phase(x) => ModelState::Phase(x.project_complement(n)?),
        })
    }
}

impl<T: Scalar> GridState for ModelState<T> {
    type Scalar = T;

    fn norm_sq_raw(&self, s: f64) -> T {
        match self {
            ModelState::Field(u) => u.hs_norm_sq_raw(s),
            ModelState::Phase(x) => x.hs_norm_sq_raw(s),
        }
    }

    /// Infinite for states of different kinds.
    fn distance_sq_raw(&self, other: &Self, s: f64) -> T {
        match (self, other) {
            (ModelState::Field(a), ModelState::Field(b)) => a.distance_sq_raw(b, s),
            (ModelState::Phase(a), ModelState::Phase(b)) => a.distance_sq_raw(b, s),
            _ => T::infinity(),
        }
    }

    fn resolution(&self) -> usize {
        match self {
            ModelState::Field(u) => u.resolution(),
            ModelState::Phase(x) => x.resolution(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            ModelState::Field(u) => u.is_finite(),
            ModelState::Phase(x) => x.is_finite(),
        }
    }
}
