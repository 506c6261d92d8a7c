use num_complex::Complex;

use super::{Basis, Exponent, SpectralError};
use crate::Scalar;

/// A function represented by its coefficients in the eigenbasis of `A`,
/// truncated at resolution `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T> {
    basis: Basis,
    resolution: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn new(basis: Basis, resolution: usize, coeffs: Vec<T>) -> Result<Self, SpectralError> {
        basis.require_scalar()?;
        if resolution == 0 {
            return Err(SpectralError::ZeroResolution);
        }
        let expected = basis.len_for(resolution);
        if coeffs.len() != expected {
            return Err(SpectralError::LengthMismatch {
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self {
            basis,
            resolution,
            coeffs,
        })
    }

    pub fn zeros(basis: Basis, resolution: usize) -> Self {
        Self::new(basis, resolution, vec![T::zero(); basis.len_for(resolution)])
            .expect("zero field is well formed")
    }

    /// Unit vector along storage index `index`.
    pub fn unit(basis: Basis, resolution: usize, index: usize) -> Result<Self, SpectralError> {
        let mut field = Self::new(basis, resolution, vec![T::zero(); basis.len_for(resolution)])?;
        let len = field.coeffs.len();
        *field
            .coeffs
            .get_mut(index)
            .ok_or(SpectralError::IndexOutOfRange { index, len })? = T::one();
        Ok(field)
    }

    /// Builds a torus field from its non-negative frequency exponential
    /// coefficients `c_0, ..., c_N`. Negative frequencies are implied by
    /// `c_{-n} = conj(c_n)`, so the field is real valued; `c_0` must be real.
    pub fn from_complex(resolution: usize, coeffs: &[Complex<T>]) -> Result<Self, SpectralError> {
        if coeffs.len() != resolution + 1 {
            return Err(SpectralError::LengthMismatch {
                expected: resolution + 1,
                found: coeffs.len(),
            });
        }
        let tol = T::epsilon().sqrt() * (T::one() + coeffs[0].re.abs());
        if coeffs[0].im.abs() > tol {
            return Err(SpectralError::NotConjugateSymmetric);
        }
        let sqrt2 = T::SQRT_2();
        let mut out = Vec::with_capacity(2 * resolution + 1);
        out.push(coeffs[0].re);
        for c in &coeffs[1..] {
            out.push(sqrt2 * c.re);
            out.push(-sqrt2 * c.im);
        }
        Self::new(Basis::FourierTorus, resolution, out)
    }

    #[inline]
    pub fn basis(&self) -> Basis {
        self.basis
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    #[inline]
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Exponential coefficient `<u, e_n>` with `e_n = exp(2 i pi n x)`, for a
    /// torus field. Zero outside the stored band.
    pub fn complex_coeff(&self, n: i64) -> Complex<T> {
        assert_eq!(self.basis, Basis::FourierTorus, "complex coefficients need a torus field");
        let m = n.unsigned_abs() as usize;
        if m > self.resolution {
            return Complex::new(T::zero(), T::zero());
        }
        if m == 0 {
            return Complex::new(self.coeffs[0], T::zero());
        }
        let h = T::FRAC_1_SQRT_2();
        let c = Complex::new(self.coeffs[2 * m - 1] * h, -self.coeffs[2 * m] * h);
        if n < 0 {
            c.conj()
        } else {
            c
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `sum_k lambda_k^s |coeff_k|^2` without range validation; also used for
    /// the `s - 1` velocity exponent of phase fields.
    pub fn hs_norm_sq_raw(&self, s: f64) -> T {
        let basis = self.basis;
        if s == 0.0 {
            return self.coeffs.iter().map(|&c| c * c).sum();
        }
        let s = T::lit(s);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| basis.eigenvalue::<T>(i).powf(s) * c * c)
            .sum()
    }

    /// Interpolation-space norm `|u|_s = sqrt(sum_k lambda_k^s <u, e_k>^2)`.
    pub fn hs_norm(&self, s: Exponent) -> T {
        self.hs_norm_sq_raw(s.get()).sqrt()
    }

    /// `<u, v>_s`; fields of different resolution are compared on their
    /// common modes (the missing ones are zero).
    pub fn hs_inner(&self, other: &Self, s: Exponent) -> T {
        assert_eq!(self.basis, other.basis);
        let sv = T::lit(s.get());
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (&a, &b))| self.basis.eigenvalue::<T>(i).powf(sv) * a * b)
            .sum()
    }

    /// `|u - v|_s^2`, zero-padding the shorter field.
    pub fn distance_sq_raw(&self, other: &Self, s: f64) -> T {
        assert_eq!(self.basis, other.basis, "distance between fields in different bases");
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (&self.coeffs, &other.coeffs)
        } else {
            (&other.coeffs, &self.coeffs)
        };
        let weight = |i: usize| -> T {
            if s == 0.0 {
                T::one()
            } else {
                self.basis.eigenvalue::<T>(i).powf(T::lit(s))
            }
        };
        let mut acc = T::zero();
        for (i, &a) in long.iter().enumerate() {
            let d = a - short.get(i).copied().unwrap_or(T::zero());
            acc = acc + weight(i) * d * d;
        }
        acc
    }

    /// `e^{tA} u`: multiplies coefficient `k` by `exp(-t lambda_k)`.
    pub fn apply_semigroup(&self, t: T) -> Result<Self, SpectralError> {
        if !(t >= T::zero()) {
            return Err(SpectralError::NegativeTime(t.as_f64()));
        }
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c = *c * (-t * self.basis.eigenvalue::<T>(i)).exp();
        }
        Ok(out)
    }

    /// `P_N u`: keeps modes of level `<= n`, at the original resolution.
    pub fn project(&self, n: usize) -> Result<Self, SpectralError> {
        self.check_level(n)?;
        let cut = self.basis.len_for(n);
        let mut out = self.clone();
        out.coeffs[cut..].iter_mut().for_each(|c| *c = T::zero());
        Ok(out)
    }

    /// `(I - P_N) u`.
    pub fn project_complement(&self, n: usize) -> Result<Self, SpectralError> {
        self.check_level(n)?;
        let cut = self.basis.len_for(n);
        let mut out = self.clone();
        out.coeffs[..cut].iter_mut().for_each(|c| *c = T::zero());
        Ok(out)
    }

    /// Same function viewed at another resolution: zero padding upwards,
    /// projection downwards.
    pub fn resized(&self, resolution: usize) -> Self {
        let len = self.basis.len_for(resolution);
        let mut coeffs = vec![T::zero(); len];
        let common = len.min(self.coeffs.len());
        coeffs[..common].copy_from_slice(&self.coeffs[..common]);
        Self {
            basis: self.basis,
            resolution,
            coeffs,
        }
    }

    /// `self += alpha * other` on the common modes.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        debug_assert_eq!(self.basis, other.basis);
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = *a + alpha * b;
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = *c * alpha);
        out
    }

    fn check_level(&self, n: usize) -> Result<(), SpectralError> {
        if n > self.resolution {
            return Err(SpectralError::ResolutionTooLarge {
                requested: n,
                available: self.resolution,
            });
        }
        Ok(())
    }
}

impl<'a, T: Scalar> std::ops::Add<&'a SpectralField<T>> for &'a SpectralField<T> {
    type Output = SpectralField<T>;

    fn add(self, rhs: &'a SpectralField<T>) -> SpectralField<T> {
        let res = self.resolution.max(rhs.resolution);
        let mut out = self.resized(res);
        out.axpy(T::one(), rhs);
        out
    }
}

impl<'a, T: Scalar> std::ops::Sub<&'a SpectralField<T>> for &'a SpectralField<T> {
    type Output = SpectralField<T>;

    fn sub(self, rhs: &'a SpectralField<T>) -> SpectralField<T> {
        let res = self.resolution.max(rhs.resolution);
        let mut out = self.resized(res);
        out.axpy(-T::one(), rhs);
        out
    }
}
