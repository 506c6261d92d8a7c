use num_complex::Complex;

use super::{path::NoisePath, NoiseError, OuPropagator};
use crate::models::Multiplier;
use crate::spectral::{Basis, SpectralField, Trajectory};
use crate::Scalar;

/// Multiplication `x -> b x` on the torus, applied as a discrete convolution
/// of exponential coefficients: `(b x)_n = sum_j b_j x_{n - j}`. Exact for
/// the band-limited multipliers supported here.
#[derive(Clone, Debug)]
pub struct MultiplicationOperator<T> {
    radius: usize,
    /// `b_j` for `j = -radius..=radius`, stored at `j + radius`.
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> MultiplicationOperator<T> {
    pub fn new(b: &Multiplier) -> Self {
        let radius = b.support_radius();
        let r = radius as i64;
        let coeffs = (-r..=r)
            .map(|j| {
                let c = b.coeff(j);
                Complex::new(T::lit(c.re), T::lit(c.im))
            })
            .collect();
        Self { radius, coeffs }
    }

    /// Support radius `R` of `b`: `b x` widens the band of `x` by `R`.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn is_constant(&self) -> bool {
        self.radius == 0
    }

    /// Writes `P_M (b x)` into `out`, with `M = out.resolution()`.
    pub fn apply_into(&self, x: &SpectralField<T>, out: &mut SpectralField<T>) -> Result<(), NoiseError> {
        if x.basis() != Basis::FourierTorus {
            return Err(NoiseError::WrongBasis(x.basis()));
        }
        if out.basis() != Basis::FourierTorus {
            return Err(NoiseError::WrongBasis(out.basis()));
        }
        self.apply_raw(x.coeffs(), out.coeffs_mut());
        Ok(())
    }

    /// Slice form of [`MultiplicationOperator::apply_into`] on real torus
    /// coefficient layouts (odd lengths `2K + 1` and `2M + 1`).
    pub fn apply_raw(&self, x: &[T], out: &mut [T]) {
        debug_assert!(x.len() % 2 == 1 && out.len() % 2 == 1);
        let k_max = (x.len() / 2) as i64;
        let h = T::FRAC_1_SQRT_2();
        let coeff = |n: i64| -> Complex<T> {
            let m = n.unsigned_abs() as usize;
            if n.abs() > k_max {
                Complex::new(T::zero(), T::zero())
            } else if m == 0 {
                Complex::new(x[0], T::zero())
            } else if n > 0 {
                Complex::new(x[2 * m - 1] * h, -x[2 * m] * h)
            } else {
                Complex::new(x[2 * m - 1] * h, x[2 * m] * h)
            }
        };
        let r = self.radius as i64;
        let conv = |n: i64| {
            let mut c = Complex::new(T::zero(), T::zero());
            for j in -r..=r {
                c = c + self.coeffs[(j + r) as usize] * coeff(n - j);
            }
            c
        };
        let sqrt2 = T::SQRT_2();
        out[0] = conv(0).re;
        for n in 1..=(out.len() / 2) {
            let c = conv(n as i64);
            out[2 * n - 1] = sqrt2 * c.re;
            out[2 * n] = -sqrt2 * c.im;
        }
    }

    pub fn apply(&self, x: &SpectralField<T>, resolution: usize) -> Result<SpectralField<T>, NoiseError> {
        let mut out = SpectralField::zeros(Basis::FourierTorus, resolution);
        self.apply_into(x, &mut out)?;
        Ok(out)
    }
}

/// `[B, P_N] x = B P_N x - P_N B x`, returned at the resolution of `x`,
/// which must be at least `N + R` so that both terms are fully resolved.
pub fn commutator_apply<T: Scalar>(
    b: &MultiplicationOperator<T>,
    n: usize,
    x: &SpectralField<T>,
) -> Result<SpectralField<T>, NoiseError> {
    let k = x.resolution();
    if k < n + b.radius() {
        return Err(NoiseError::TooFewModes {
            required: n + b.radius(),
            available: k,
        });
    }
    let mut out = b.apply(&x.project(n)?, k)?;
    let inner = b.apply(x, n)?.resized(k);
    out.axpy(-T::one(), &inner);
    Ok(out)
}

/// Grid sample of the commutator process
/// `rho_N(t) = int_0^t e^{(t-r)A} [B, P_N] dW(r)` on `steps` uniform steps
/// over `[0, horizon]`, driven by the cylindrical path of `seed` at
/// resolution `N + R`. Each step uses the variance-matching exponential
/// rule, so every coefficient has the exact marginal variance at each grid
/// time.
pub fn sample_rho_n<T: Scalar>(
    seed: u64,
    b: &Multiplier,
    n: usize,
    steps: usize,
    horizon: f64,
) -> Result<Trajectory<SpectralField<T>>, NoiseError> {
    let op = MultiplicationOperator::<T>::new(b);
    let wide = n + op.radius();
    let path = NoisePath::<T>::sample(seed, wide, steps, T::lit(horizon), Basis::FourierTorus)?;
    let prop = OuPropagator::<T>::new(Basis::FourierTorus, wide, horizon / steps as f64, None)?;
    let mut rho = SpectralField::zeros(Basis::FourierTorus, wide);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(rho.clone());
    if op.is_constant() {
        states.resize(steps + 1, rho);
        return Ok(Trajectory::new(T::lit(horizon), states)?);
    }
    for m in 0..steps {
        let c = commutator_apply(&op, n, &path.increment_field(m, wide)?)?;
        prop.step_gain(rho.coeffs_mut(), c.coeffs());
        states.push(rho.clone());
    }
    Ok(Trajectory::new(T::lit(horizon), states)?)
}
