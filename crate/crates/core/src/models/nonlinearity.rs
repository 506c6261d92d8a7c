use serde::{Deserialize, Serialize};

use crate::spectral::{Collocation, SpectralError, SpectralField};
use crate::Scalar;

/// Pointwise (Nemytskii) nonlinearity `F(u)(x) = f(u(x))`.
///
/// Every catalog entry is globally bounded with bounded first and second
/// derivatives, so `F: H -> H` is `C^2` with bounded derivatives and
/// `s_F = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Nonlinearity {
    Zero,
    /// `f(x) = amplitude * sin(x)`
    ScaledSine { amplitude: f64 },
    /// `f(x) = amplitude * x / (1 + x^2)`
    BoundedCubicSurrogate { amplitude: f64 },
}

/// `x = sqrt(2) - 1` maximizes `|d^2/dx^2 (x / (1 + x^2))|`.
fn cubic_surrogate_d2_sup() -> f64 {
    let x = std::f64::consts::SQRT_2 - 1.0;
    (2.0 * x * (x * x - 3.0) / (1.0 + x * x).powi(3)).abs()
}

impl Nonlinearity {
    pub fn is_zero(&self) -> bool {
        match *self {
            Nonlinearity::Zero => true,
            Nonlinearity::ScaledSine { amplitude } | Nonlinearity::BoundedCubicSurrogate { amplitude } => {
                amplitude == 0.0
            }
        }
    }

    #[inline]
    pub fn eval<T: Scalar>(&self, x: T) -> T {
        match *self {
            Nonlinearity::Zero => T::zero(),
            Nonlinearity::ScaledSine { amplitude } => T::lit(amplitude) * x.sin(),
            Nonlinearity::BoundedCubicSurrogate { amplitude } => T::lit(amplitude) * x / (T::one() + x * x),
        }
    }

    /// `sup |f|`.
    pub fn sup(&self) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::ScaledSine { amplitude } => amplitude.abs(),
            Nonlinearity::BoundedCubicSurrogate { amplitude } => 0.5 * amplitude.abs(),
        }
    }

    /// `sup |f'|`, the Lipschitz constant of `F` on `H`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::ScaledSine { amplitude } => amplitude.abs(),
            Nonlinearity::BoundedCubicSurrogate { amplitude } => amplitude.abs(),
        }
    }

    /// `sup |f''|`.
    pub fn second_derivative_sup(&self) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::ScaledSine { amplitude } => amplitude.abs(),
            Nonlinearity::BoundedCubicSurrogate { amplitude } => amplitude.abs() * cubic_surrogate_d2_sup(),
        }
    }

    /// Regularity exponent of the catalog maps.
    pub fn s_f(&self) -> f64 {
        0.0
    }
}

/// Collocation evaluator for `P_N F(u)`, reusable across time steps.
#[derive(Clone, Debug)]
pub struct NemytskiiEvaluator<T: Scalar> {
    f: Nonlinearity,
    plan: Collocation<T>,
    values: Vec<T>,
}

impl<T: Scalar> NemytskiiEvaluator<T> {
    pub fn new(f: Nonlinearity, plan: Collocation<T>) -> Self {
        let values = vec![T::zero(); plan.value_len()];
        Self { f, plan, values }
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.f
    }

    pub fn nodes(&self) -> usize {
        self.plan.nodes()
    }

    /// Writes `P_N F(u)` into `out`, where `N = out.resolution()`.
    pub fn apply_into(&mut self, u: &SpectralField<T>, out: &mut SpectralField<T>) -> Result<(), SpectralError> {
        if self.f.is_zero() {
            out.coeffs_mut().iter_mut().for_each(|c| *c = T::zero());
            return Ok(());
        }
        self.plan.to_values(u, &mut self.values)?;
        let f = self.f;
        self.values.iter_mut().for_each(|v| *v = f.eval(*v));
        self.plan.from_values(&self.values, out)
    }

    pub fn apply(&mut self, u: &SpectralField<T>) -> Result<SpectralField<T>, SpectralError> {
        let mut out = SpectralField::zeros(u.basis(), u.resolution());
        self.apply_into(u, &mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_bounds_hold_on_a_dense_grid() {
        for f in [
            Nonlinearity::ScaledSine { amplitude: 1.5 },
            Nonlinearity::BoundedCubicSurrogate { amplitude: 2.0 },
        ] {
            let h = 1e-4;
            let (mut m0, mut m1, mut m2) = (0f64, 0f64, 0f64);
            let mut x = -20.0;
            while x < 20.0 {
                let (a, b, c) = (f.eval(x - h), f.eval::<f64>(x), f.eval(x + h));
                m0 = m0.max(b.abs());
                m1 = m1.max(((c - a) / (2.0 * h)).abs());
                m2 = m2.max(((c - 2.0 * b + a) / (h * h)).abs());
                x += 1e-3;
            }
            assert!(m0 <= f.sup() + 1e-9 && m0 > 0.99 * f.sup());
            assert!(m1 <= f.lipschitz() + 1e-6 && m1 > 0.99 * f.lipschitz());
            assert!(m2 <= f.second_derivative_sup() + 1e-4 && m2 > 0.99 * f.second_derivative_sup());
        }
    }
}
