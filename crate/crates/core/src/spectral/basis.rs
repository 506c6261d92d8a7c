use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::Scalar;

/// Eigenbasis of the linear operator a field is expanded in.
///
/// Storage layout of coefficient index `i`:
///
/// * `DirichletSine`: mode `k = i + 1`, eigenfunction `sqrt(2) sin(k pi x)` on
///   `(0, 1)`, eigenvalue `pi^2 k^2`.
/// * `FourierTorus`: real orthonormal basis of `L^2(R/Z)`. Index 0 is the
///   constant, index `2n - 1` is `sqrt(2) cos(2 pi n x)` and index `2n` is
///   `sqrt(2) sin(2 pi n x)`. Both members of a pair share the eigenvalue
///   `4 pi^2 n^2 + 1`. Complex exponential coefficients are recovered with
///   [`SpectralField::complex_coeff`](super::SpectralField::complex_coeff).
/// * `WavePhase`: position/velocity pairs over the Dirichlet sine basis; used
///   only as the tag of a [`PhaseField`](super::PhaseField).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    DirichletSine,
    FourierTorus,
    WavePhase,
}

impl Basis {
    /// Number of stored coefficients for resolution `n`.
    pub fn len_for(self, n: usize) -> usize {
        match self {
            Basis::DirichletSine => n,
            Basis::FourierTorus => 2 * n + 1,
            Basis::WavePhase => 2 * n,
        }
    }

    /// Scalar basis underlying a phase-space basis (identity otherwise).
    pub fn scalar(self) -> Basis {
        match self {
            Basis::WavePhase => Basis::DirichletSine,
            other => other,
        }
    }

    /// Wavenumber of storage index `i` (sine: `k >= 1`, torus: `|n| >= 0`).
    #[inline]
    pub fn wavenumber(self, i: usize) -> usize {
        match self {
            Basis::DirichletSine | Basis::WavePhase => i + 1,
            Basis::FourierTorus => i.div_ceil(2),
        }
    }

    /// Projection level `N` a storage index belongs to: the smallest `N`
    /// whose span contains it.
    #[inline]
    pub fn level_of(self, i: usize) -> usize {
        self.wavenumber(i).max(1)
    }

    #[inline]
    pub fn eigenvalue_of_wavenumber<T: Scalar>(self, k: usize) -> T {
        let k = T::from_usize_exact(k);
        let pi = T::PI();
        match self {
            Basis::DirichletSine | Basis::WavePhase => pi * pi * k * k,
            Basis::FourierTorus => T::lit(4.0) * pi * pi * k * k + T::one(),
        }
    }

    /// Eigenvalue `lambda` attached to storage index `i` (`A e = -lambda e`).
    #[inline]
    pub fn eigenvalue<T: Scalar>(self, i: usize) -> T {
        self.eigenvalue_of_wavenumber(self.wavenumber(i))
    }

    /// Eigenvalues for every stored coefficient at resolution `n`.
    pub fn eigenvalues<T: Scalar>(self, n: usize) -> Vec<T> {
        (0..self.scalar().len_for(n))
            .map(|i| self.scalar().eigenvalue(i))
            .collect()
    }

    pub(crate) fn require_scalar(self) -> Result<(), SpectralError> {
        match self {
            Basis::WavePhase => Err(SpectralError::BasisMismatch {
                expected: "dirichlet-sine or fourier-torus",
                found: self,
            }),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Basis::DirichletSine => "dirichlet-sine",
            Basis::FourierTorus => "fourier-torus",
            Basis::WavePhase => "wave-phase",
        })
    }
}
