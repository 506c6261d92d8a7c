//! Eigenbasis field algebra: interpolation norms, semigroup and wave-group
//! actions, spectral projections and collocation transforms.

mod basis;
mod field;
mod phase;
mod trajectory;
mod transform;

pub use basis::Basis;
pub use field::SpectralField;
pub use phase::{apply_group_wave, PhaseField, WaveRotation};
pub use trajectory::{sup_norm_trajectory, GridState, Trajectory};
pub use transform::{from_collocation, min_nodes, to_collocation, Collocation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("regularity exponent {0} outside the supported range [-2, 2]")]
    ExponentOutOfRange(f64),
    #[error("negative time {0} for the semigroup")]
    NegativeTime(f64),
    #[error("projection level {requested} exceeds field resolution {available}")]
    ResolutionTooLarge { requested: usize, available: usize },
    #[error("resolution must be positive")]
    ZeroResolution,
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("storage index {index} outside a field of {len} coefficients")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("expected a {expected} basis, found {found}")]
    BasisMismatch { expected: &'static str, found: Basis },
    #[error("{nodes} collocation nodes, at least {required} required")]
    TooFewNodes { nodes: usize, required: usize },
    #[error("zero-frequency coefficient of a real torus field must be real")]
    NotConjugateSymmetric,
    #[error("a trajectory needs at least two grid nodes, got {0}")]
    ShortTrajectory(usize),
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("trajectories live on different grids")]
    GridMismatch,
    #[error("transform failed: {0}")]
    Transform(String),
}

/// Regularity exponent `s` of an interpolation space `H^s`, restricted to
/// `[-2, 2]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent(f64);

impl Exponent {
    pub const ZERO: Exponent = Exponent(0.0);

    pub fn new(s: f64) -> Result<Self, SpectralError> {
        if (-2.0..=2.0).contains(&s) {
            Ok(Exponent(s))
        } else {
            Err(SpectralError::ExponentOutOfRange(s))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Exponent {
    type Error = SpectralError;

    fn try_from(s: f64) -> Result<Self, Self::Error> {
        Exponent::new(s)
    }
}

impl From<Exponent> for f64 {
    fn from(s: Exponent) -> f64 {
        s.0
    }
}

/// Free-function forms of the field operations.
pub fn hs_norm<T: crate::Scalar>(u: &SpectralField<T>, s: Exponent) -> T {
    u.hs_norm(s)
}

pub fn apply_semigroup<T: crate::Scalar>(u: &SpectralField<T>, t: T) -> Result<SpectralField<T>, SpectralError> {
    u.apply_semigroup(t)
}

pub fn project<T: crate::Scalar>(u: &SpectralField<T>, n: usize) -> Result<SpectralField<T>, SpectralError> {
    u.project(n)
}

pub fn project_complement<T: crate::Scalar>(
    u: &SpectralField<T>,
    n: usize,
) -> Result<SpectralField<T>, SpectralError> {
    u.project_complement(n)
}

/// Sharp constant in `|e^{tA}u|_{s2} <= C t^{-(s2-s1)/2} |u|_{s1}` obtained by
/// maximizing `lambda^{(s2-s1)/2} e^{-t lambda}` over `lambda > 0`; returns the
/// full factor `((s2-s1)/(2 e t))^{(s2-s1)/2}` (1 when `s1 = s2`).
pub fn smoothing_factor(s1: f64, s2: f64, t: f64) -> f64 {
    let d = s2 - s1;
    if d <= 0.0 {
        return 1.0;
    }
    (d / (2.0 * std::f64::consts::E * t)).powf(d / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_range() {
        assert!(Exponent::new(2.0).is_ok());
        assert!(Exponent::new(-2.0).is_ok());
        assert_eq!(Exponent::new(2.5), Err(SpectralError::ExponentOutOfRange(2.5)));
        assert!(Exponent::new(f64::NAN).is_err());
    }

    #[test]
    fn smoothing_factor_is_the_per_mode_maximum() {
        // brute-force maximization over a fine lambda grid
        for &(s1, s2, t) in &[(0.0, 1.0, 0.1), (-0.5, 1.5, 0.01), (0.25, 0.75, 1.0)] {
            let d: f64 = s2 - s1;
            let mut best: f64 = 0.0;
            let mut lam: f64 = 1e-3;
            while lam < 1e6 {
                best = best.max(lam.powf(d / 2.0) * (-t * lam).exp());
                lam *= 1.0001;
            }
            let c = smoothing_factor(s1, s2, t);
            assert!((best - c).abs() / c < 1e-6, "{best} vs {c}");
        }
    }
}
