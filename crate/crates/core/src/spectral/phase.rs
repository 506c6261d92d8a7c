use super::{Basis, Exponent, SpectralError, SpectralField};
use crate::Scalar;

/// Position/velocity pair `(u, v)` of the wave equation, both expanded in
/// the Dirichlet sine basis at the same resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField<T> {
    pub position: SpectralField<T>,
    pub velocity: SpectralField<T>,
}

impl<T: Scalar> PhaseField<T> {
    pub fn new(position: SpectralField<T>, velocity: SpectralField<T>) -> Result<Self, SpectralError> {
        for part in [&position, &velocity] {
            if part.basis() != Basis::DirichletSine {
                return Err(SpectralError::BasisMismatch {
                    expected: "dirichlet-sine",
                    found: part.basis(),
                });
            }
        }
        if position.resolution() != velocity.resolution() {
            return Err(SpectralError::LengthMismatch {
                expected: position.resolution(),
                found: velocity.resolution(),
            });
        }
        Ok(Self { position, velocity })
    }

    pub fn zeros(resolution: usize) -> Self {
        Self {
            position: SpectralField::zeros(Basis::DirichletSine, resolution),
            velocity: SpectralField::zeros(Basis::DirichletSine, resolution),
        }
    }

    pub fn basis(&self) -> Basis {
        Basis::WavePhase
    }

    pub fn resolution(&self) -> usize {
        self.position.resolution()
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.velocity.is_finite()
    }

    /// `|u|_s^2 + |v|_{s-1}^2`.
    pub fn hs_norm_sq_raw(&self, s: f64) -> T {
        self.position.hs_norm_sq_raw(s) + self.velocity.hs_norm_sq_raw(s - 1.0)
    }

    /// Norm of the phase space `H^s x H^{s-1}`.
    pub fn hs_norm(&self, s: Exponent) -> T {
        self.hs_norm_sq_raw(s.get()).sqrt()
    }

    pub fn distance_sq_raw(&self, other: &Self, s: f64) -> T {
        self.position.distance_sq_raw(&other.position, s)
            + self.velocity.distance_sq_raw(&other.velocity, s - 1.0)
    }

    /// Coordinates in the orthonormal phase basis `(e_l, 0)`,
    /// `(0, sqrt(lambda_l) e_l)`, interleaved per mode.
    pub fn phase_coordinates(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(2 * self.resolution());
        for (i, (&u, &v)) in self
            .position
            .coeffs()
            .iter()
            .zip(self.velocity.coeffs())
            .enumerate()
        {
            let root = Basis::DirichletSine.eigenvalue::<T>(i).sqrt();
            out.push(u);
            out.push(v / root);
        }
        out
    }

    /// `P_N` on phase space: both components projected.
    pub fn project(&self, n: usize) -> Result<Self, SpectralError> {
        Ok(Self {
            position: self.position.project(n)?,
            velocity: self.velocity.project(n)?,
        })
    }

    pub fn project_complement(&self, n: usize) -> Result<Self, SpectralError> {
        Ok(Self {
            position: self.position.project_complement(n)?,
            velocity: self.velocity.project_complement(n)?,
        })
    }

    pub fn resized(&self, resolution: usize) -> Self {
        Self {
            position: self.position.resized(resolution),
            velocity: self.velocity.resized(resolution),
        }
    }

    pub fn axpy(&mut self, alpha: T, other: &Self) {
        self.position.axpy(alpha, &other.position);
        self.velocity.axpy(alpha, &other.velocity);
    }

    /// Wave group `e^{tA}` for any real `t`: per mode a rotation by
    /// `t sqrt(lambda_k)` in the `(u_k, v_k / sqrt(lambda_k))` plane.
    pub fn apply_group_wave(&self, t: T) -> Self {
        let mut out = self.clone();
        let (pos, vel) = (out.position.coeffs_mut(), out.velocity.coeffs_mut());
        for i in 0..pos.len() {
            let root = Basis::DirichletSine.eigenvalue::<T>(i).sqrt();
            let (s, c) = (t * root).sin_cos();
            let (u, v) = (pos[i], vel[i]);
            pos[i] = c * u + s / root * v;
            vel[i] = -root * s * u + c * v;
        }
        out
    }
}

/// The wave group at a fixed time step, with the per-mode rotation
/// coefficients cached for repeated application.
#[derive(Clone, Debug)]
pub struct WaveRotation<T> {
    cos: Vec<T>,
    sin: Vec<T>,
    root: Vec<T>,
}

impl<T: Scalar> WaveRotation<T> {
    pub fn new(resolution: usize, t: T) -> Self {
        let root: Vec<T> = (0..resolution)
            .map(|i| Basis::DirichletSine.eigenvalue::<T>(i).sqrt())
            .collect();
        let (sin, cos) = root.iter().map(|&r| (t * r).sin_cos()).unzip();
        Self { cos, sin, root }
    }

    pub fn resolution(&self) -> usize {
        self.root.len()
    }

    /// In-place `x <- e^{tA} x`; `x` may have lower resolution.
    pub fn apply(&self, x: &mut PhaseField<T>) {
        let (pos, vel) = (x.position.coeffs_mut(), x.velocity.coeffs_mut());
        assert!(pos.len() <= self.root.len(), "rotation resolution too small");
        for i in 0..pos.len() {
            let (c, s, r) = (self.cos[i], self.sin[i], self.root[i]);
            let (u, v) = (pos[i], vel[i]);
            pos[i] = c * u + s / r * v;
            vel[i] = -r * s * u + c * v;
        }
    }
}

/// Free-function form of [`PhaseField::apply_group_wave`].
pub fn apply_group_wave<T: Scalar>(x: &PhaseField<T>, t: T) -> PhaseField<T> {
    x.apply_group_wave(t)
}
