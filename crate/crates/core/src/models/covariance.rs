use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::spectral::Basis;

/// Covariance `Q` of the driving noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Covariance {
    /// `Q e_k = lambda_k^{-exponent} e_k`; exponent 0 is space-time white noise.
    Diagonal { exponent: f64 },
    /// `Q = B^2` with `B` multiplication by a smooth positive `b` on the torus.
    Multiplication(Multiplier),
}

impl Covariance {
    pub fn white() -> Self {
        Covariance::Diagonal { exponent: 0.0 }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Covariance::Diagonal { .. })
    }

    /// Per-coefficient variances `q_i` for storage indices at resolution `n`.
    /// Only meaningful for the diagonal kind.
    pub fn diagonal_variances(&self, basis: Basis, n: usize) -> Result<Vec<f64>, ModelError> {
        match self {
            Covariance::Diagonal { exponent } => Ok(basis
                .scalar()
                .eigenvalues::<f64>(n)
                .into_iter()
                .map(|l| l.powf(-exponent))
                .collect()),
            Covariance::Multiplication(_) => Err(ModelError::NotDiagonal),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Covariance::Diagonal { exponent } if !(*exponent >= 0.0 && exponent.is_finite()) => {
                Err(ModelError::Inadmissible {
                    rule: "covariance exponent r >= 0".into(),
                })
            }
            Covariance::Diagonal { .. } => Ok(()),
            Covariance::Multiplication(b) => b.validate(),
        }
    }
}

/// Real, positive, band-limited function `b` on the torus, given by its
/// Fourier coefficients `b_0, ..., b_K` (`b_{-n} = conj(b_n)`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    /// `[re, im]` pairs for `n = 0, ..., K`.
    pub coefficients: Vec<[f64; 2]>,
    /// Declared smoothness order `m >= 2`.
    #[serde(default = "default_decay_order")]
    pub decay_order: f64,
}

fn default_decay_order() -> f64 {
    8.0
}

impl Multiplier {
    /// `b(x) = 2 + cos(2 pi x)`: `b_0 = 2`, `b_{+-1} = 1/2`.
    pub fn default_cosine() -> Self {
        Self {
            coefficients: vec![[2.0, 0.0], [0.5, 0.0]],
            decay_order: default_decay_order(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            coefficients: vec![[c, 0.0]],
            decay_order: default_decay_order(),
        }
    }

    /// `b_n` for any integer `n`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let m = n.unsigned_abs() as usize;
        match self.coefficients.get(m) {
            None => Complex64::new(0.0, 0.0),
            Some(&[re, im]) => {
                let c = Complex64::new(re, im);
                if n < 0 {
                    c.conj()
                } else {
                    c
                }
            }
        }
    }

    /// Largest `|n|` with a stored coefficient.
    pub fn support_radius(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|&[re, im]| re != 0.0 || im != 0.0)
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.support_radius() == 0
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let mut v = self.coeff(0).re;
        for n in 1..self.coefficients.len() {
            let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 * x);
            v += 2.0 * (self.coeff(n as i64) * e).re;
        }
        v
    }

    /// `C_m = max_n |b_n| |n|^m` over the stored nonzero frequencies.
    pub fn decay_constant(&self) -> f64 {
        (1..self.coefficients.len())
            .map(|n| self.coeff(n as i64).norm() * (n as f64).powf(self.decay_order))
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |rule: &str| {
            Err(ModelError::Inadmissible {
                rule: rule.to_string(),
            })
        };
        if self.coefficients.is_empty() {
            return bad("multiplier needs at least b_0");
        }
        if self.coefficients[0][1] != 0.0 {
            return bad("b_0 must be real");
        }
        if self.decay_order < 2.0 {
            return bad("multiplier decay order m >= 2");
        }
        // positivity on a grid well beyond the band limit
        let grid = 64 * (self.coefficients.len() + 1);
        if (0..grid).any(|j| self.value_at(j as f64 / grid as f64) <= 0.0) {
            return bad("b > 0 everywhere");
        }
        Ok(())
    }
}
