use num_traits::{Float, Zero};

use super::{Exponent, PhaseField, SpectralError, SpectralField};
use crate::Scalar;

/// A state that can live on a trajectory: something with an `H^s` norm and a
/// distance that tolerates differing resolutions.
pub trait GridState: Clone {
    type Scalar: Scalar;

    fn norm_sq_raw(&self, s: f64) -> Self::Scalar;

    fn distance_sq_raw(&self, other: &Self, s: f64) -> Self::Scalar;

    fn resolution(&self) -> usize;

    fn is_finite(&self) -> bool;
}

impl<T: Scalar> GridState for SpectralField<T> {
    type Scalar = T;

    fn norm_sq_raw(&self, s: f64) -> T {
        self.hs_norm_sq_raw(s)
    }

    fn distance_sq_raw(&self, other: &Self, s: f64) -> T {
        SpectralField::distance_sq_raw(self, other, s)
    }

    fn resolution(&self) -> usize {
        SpectralField::resolution(self)
    }

    fn is_finite(&self) -> bool {
        SpectralField::is_finite(self)
    }
}

impl<T: Scalar> GridState for PhaseField<T> {
    type Scalar = T;

    fn norm_sq_raw(&self, s: f64) -> T {
        self.hs_norm_sq_raw(s)
    }

    fn distance_sq_raw(&self, other: &Self, s: f64) -> T {
        PhaseField::distance_sq_raw(self, other, s)
    }

    fn resolution(&self) -> usize {
        PhaseField::resolution(self)
    }

    fn is_finite(&self) -> bool {
        PhaseField::is_finite(self)
    }
}

/// States on the uniform grid `t_m = m T / M`, `m = 0, ..., M`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S: GridState> {
    horizon: S::Scalar,
    states: Vec<S>,
}

impl<S: GridState> Trajectory<S> {
    pub fn new(horizon: S::Scalar, states: Vec<S>) -> Result<Self, SpectralError> {
        if states.len() < 2 {
            return Err(SpectralError::ShortTrajectory(states.len()));
        }
        if !(horizon > S::Scalar::zero()) || !horizon.is_finite() {
            return Err(SpectralError::BadHorizon(horizon.as_f64()));
        }
        let res = states[0].resolution();
        if let Some(bad) = states.iter().find(|s| s.resolution() != res) {
            return Err(SpectralError::LengthMismatch {
                expected: res,
                found: bad.resolution(),
            });
        }
        Ok(Self { horizon, states })
    }

    pub fn horizon(&self) -> S::Scalar {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn dt(&self) -> S::Scalar {
        self.horizon / S::Scalar::from_usize_exact(self.steps())
    }

    pub fn time(&self, m: usize) -> S::Scalar {
        self.horizon * S::Scalar::from_usize_exact(m) / S::Scalar::from_usize_exact(self.steps())
    }

    pub fn times(&self) -> Vec<S::Scalar> {
        (0..self.states.len()).map(|m| self.time(m)).collect()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn into_states(self) -> Vec<S> {
        self.states
    }

    pub fn state(&self, m: usize) -> &S {
        &self.states[m]
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectories hold at least two states")
    }

    pub fn resolution(&self) -> usize {
        self.states[0].resolution()
    }

    /// `max_m |Y(t_m)|_s`: the grid surrogate of `sup_{t <= T} |Y(t)|_s`.
    pub fn sup_norm(&self, s: Exponent) -> S::Scalar {
        self.states
            .iter()
            .map(|y| y.norm_sq_raw(s.get()))
            .fold(S::Scalar::zero(), |a, b| a.max(b))
            .sqrt()
    }

    /// `max_m |Y(t_m) - Z(t_m)|_s` for trajectories on the same grid.
    pub fn sup_distance(&self, other: &Self, s: Exponent) -> Result<S::Scalar, SpectralError> {
        if self.states.len() != other.states.len() {
            return Err(SpectralError::GridMismatch);
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.distance_sq_raw(b, s.get()))
            .fold(S::Scalar::zero(), |a, b| a.max(b))
            .sqrt())
    }

    pub fn map<R: GridState<Scalar = S::Scalar>>(&self, f: impl FnMut(&S) -> R) -> Trajectory<R> {
        Trajectory {
            horizon: self.horizon,
            states: self.states.iter().map(f).collect(),
        }
    }
}

/// Free-function form of [`Trajectory::sup_norm`].
pub fn sup_norm_trajectory<S: GridState>(y: &Trajectory<S>, s: Exponent) -> S::Scalar {
    y.sup_norm(s)
}
