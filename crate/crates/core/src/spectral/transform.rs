//! Orthogonal transforms between eigen-coefficients and nodal values.
//!
//! Sine fields are sampled on the interior nodes `x_j = j / M`,
//! `j = 1, ..., M - 1` through a type-I discrete sine transform, evaluated as
//! a real FFT of the odd extension of length `2M`. Torus fields are sampled on
//! `x_j = j / M`, `j = 0, ..., M - 1` through a real FFT of length `M`.

use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::{Basis, SpectralError, SpectralField};
use crate::Scalar;

/// Smallest node count accepted for a field of resolution `n`.
pub fn min_nodes(n: usize) -> usize {
    2 * (n + 1)
}

/// Reusable transform plan plus scratch buffers for one `(basis, M)` pair.
pub struct Collocation<T: Scalar> {
    basis: Basis,
    nodes: usize,
    forward: Arc<dyn RealToComplex<T>>,
    inverse: Arc<dyn ComplexToReal<T>>,
    real_buf: Vec<T>,
    spec_buf: Vec<Complex<T>>,
    fwd_scratch: Vec<Complex<T>>,
    inv_scratch: Vec<Complex<T>>,
}

impl<T: Scalar> Clone for Collocation<T> {
    fn clone(&self) -> Self {
        Self {
            basis: self.basis,
            nodes: self.nodes,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            real_buf: self.real_buf.clone(),
            spec_buf: self.spec_buf.clone(),
            fwd_scratch: self.fwd_scratch.clone(),
            inv_scratch: self.inv_scratch.clone(),
        }
    }
}

impl<T: Scalar> std::fmt::Debug for Collocation<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Collocation")
            .field("basis", &self.basis)
            .field("nodes", &self.nodes)
            .finish()
    }
}

impl<T: Scalar> Collocation<T> {
    /// Plans transforms for `nodes` collocation points. The resolution bound
    /// is checked per call, see [`Collocation::max_resolution`].
    pub fn new(basis: Basis, nodes: usize) -> Result<Self, SpectralError> {
        basis.require_scalar()?;
        if nodes < min_nodes(1) {
            return Err(SpectralError::TooFewNodes {
                nodes,
                required: min_nodes(1),
            });
        }
        let fft_len = match basis {
            Basis::DirichletSine => 2 * nodes,
            _ => nodes,
        };
        let mut planner = RealFftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        Ok(Self {
            basis,
            nodes,
            real_buf: forward.make_input_vec(),
            spec_buf: forward.make_output_vec(),
            fwd_scratch: forward.make_scratch_vec(),
            inv_scratch: inverse.make_scratch_vec(),
            forward,
            inverse,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Number of nodal values produced by [`Collocation::to_values`].
    pub fn value_len(&self) -> usize {
        match self.basis {
            Basis::DirichletSine => self.nodes - 1,
            _ => self.nodes,
        }
    }

    /// Largest resolution the anti-aliasing rule `M >= 2(N + 1)` admits.
    pub fn max_resolution(&self) -> usize {
        self.nodes / 2 - 1
    }

    /// Node positions matching [`Collocation::to_values`].
    pub fn node_positions(&self) -> Vec<T> {
        let m = T::from_usize_exact(self.nodes);
        match self.basis {
            Basis::DirichletSine => (1..self.nodes)
                .map(|j| T::from_usize_exact(j) / m)
                .collect(),
            _ => (0..self.nodes).map(|j| T::from_usize_exact(j) / m).collect(),
        }
    }

    fn check(&self, field_basis: Basis, resolution: usize) -> Result<(), SpectralError> {
        if field_basis != self.basis {
            return Err(SpectralError::BasisMismatch {
                expected: "the collocation basis",
                found: field_basis,
            });
        }
        if self.nodes < min_nodes(resolution) {
            return Err(SpectralError::TooFewNodes {
                nodes: self.nodes,
                required: min_nodes(resolution),
            });
        }
        Ok(())
    }

    /// Evaluates `u` at the nodes, writing `value_len()` values into `out`.
    pub fn to_values(&mut self, u: &SpectralField<T>, out: &mut [T]) -> Result<(), SpectralError> {
        self.check(u.basis(), u.resolution())?;
        assert_eq!(out.len(), self.value_len());
        let zero = Complex::new(T::zero(), T::zero());
        self.spec_buf.iter_mut().for_each(|c| *c = zero);
        let coeffs = u.coeffs();
        match self.basis {
            Basis::DirichletSine => {
                // x_j = 2 Re sum_n X_n e^{i pi n j / M} with X_n = -i c_n / sqrt 2
                let h = T::FRAC_1_SQRT_2();
                for (k, &c) in coeffs.iter().enumerate() {
                    self.spec_buf[k + 1] = Complex::new(T::zero(), -c * h);
                }
                self.inverse
                    .process_with_scratch(&mut self.spec_buf, &mut self.real_buf, &mut self.inv_scratch)
                    .map_err(|e| SpectralError::Transform(e.to_string()))?;
                out.copy_from_slice(&self.real_buf[1..self.nodes]);
            }
            _ => {
                let h = T::FRAC_1_SQRT_2();
                self.spec_buf[0] = Complex::new(coeffs[0], T::zero());
                for n in 1..=u.resolution() {
                    self.spec_buf[n] = Complex::new(coeffs[2 * n - 1] * h, -coeffs[2 * n] * h);
                }
                self.inverse
                    .process_with_scratch(&mut self.spec_buf, &mut self.real_buf, &mut self.inv_scratch)
                    .map_err(|e| SpectralError::Transform(e.to_string()))?;
                out.copy_from_slice(&self.real_buf);
            }
        }
        Ok(())
    }

    /// Discrete orthogonal projection of nodal values onto the first
    /// `out.resolution()` modes; overwrites `out`'s coefficients.
    pub fn from_values(&mut self, values: &[T], out: &mut SpectralField<T>) -> Result<(), SpectralError> {
        self.check(out.basis(), out.resolution())?;
        if values.len() != self.value_len() {
            return Err(SpectralError::LengthMismatch {
                expected: self.value_len(),
                found: values.len(),
            });
        }
        let m = self.nodes;
        let mt = T::from_usize_exact(m);
        match self.basis {
            Basis::DirichletSine => {
                let buf = &mut self.real_buf;
                buf[0] = T::zero();
                buf[m] = T::zero();
                for (j, &v) in values.iter().enumerate() {
                    buf[j + 1] = v;
                    buf[2 * m - 1 - j] = -v;
                }
                self.forward
                    .process_with_scratch(buf, &mut self.spec_buf, &mut self.fwd_scratch)
                    .map_err(|e| SpectralError::Transform(e.to_string()))?;
                let scale = -T::one() / (T::SQRT_2() * mt);
                for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
                    *c = self.spec_buf[k + 1].im * scale;
                }
            }
            _ => {
                self.real_buf.copy_from_slice(values);
                self.forward
                    .process_with_scratch(&mut self.real_buf, &mut self.spec_buf, &mut self.fwd_scratch)
                    .map_err(|e| SpectralError::Transform(e.to_string()))?;
                let n = out.resolution();
                let coeffs = out.coeffs_mut();
                coeffs[0] = self.spec_buf[0].re / mt;
                let scale = T::SQRT_2() / mt;
                for k in 1..=n {
                    coeffs[2 * k - 1] = self.spec_buf[k].re * scale;
                    coeffs[2 * k] = -self.spec_buf[k].im * scale;
                }
            }
        }
        Ok(())
    }
}

/// Nodal values of `u` on `nodes` collocation points.
pub fn to_collocation<T: Scalar>(u: &SpectralField<T>, nodes: usize) -> Result<Vec<T>, SpectralError> {
    let mut plan = Collocation::new(u.basis(), nodes)?;
    let mut out = vec![T::zero(); plan.value_len()];
    plan.to_values(u, &mut out)?;
    Ok(out)
}

/// Inverse of [`to_collocation`]: the node count is inferred from the number
/// of values (`M - 1` interior values for sine, `M` for torus).
pub fn from_collocation<T: Scalar>(
    values: &[T],
    basis: Basis,
    resolution: usize,
) -> Result<SpectralField<T>, SpectralError> {
    let nodes = match basis {
        Basis::DirichletSine => values.len() + 1,
        _ => values.len(),
    };
    let mut plan = Collocation::new(basis, nodes)?;
    let mut out = SpectralField::zeros(basis, resolution);
    plan.from_values(values, &mut out)?;
    Ok(out)
}
