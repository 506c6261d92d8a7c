use super::{ou_variance, NoiseError};
use crate::models::{Covariance, Multiplier};
use crate::spectral::Basis;

/// Closed-form second moment with an explicit bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedSum {
    pub value: f64,
    /// Upper bound on the omitted tail (0 when the sum is exact).
    pub tail_bound: f64,
}

fn torus_lambda(n: i64) -> f64 {
    Basis::FourierTorus.eigenvalue_of_wavenumber(n.unsigned_abs() as usize)
}

/// `E|rho_N(t)|_s^2 = sum over mixed (k, l) of |b_{l-k}|^2 lambda_l^s
/// (1 - e^{-2 lambda_l t}) / (2 lambda_l)`, where a pair is mixed when
/// exactly one of `|k| <= N`, `|l| <= N` holds.
///
/// The sum runs over `|k|, |l| <= max(4N, N + R)` with `R` the support radius
/// of `b`, which is exact for band-limited `b`: a mixed pair with a nonzero
/// coefficient has `|l - k| <= R`, so both indices lie within `N + R`.
pub fn rho_moment_oracle(b: &Multiplier, n: usize, t: f64, s: f64) -> f64 {
    let radius = b.support_radius() as i64;
    let big = (4 * n as i64).max(n as i64 + radius);
    let inside = |m: i64| m.unsigned_abs() as usize <= n;
    let mut total = 0.0;
    for l in -big..=big {
        let lambda = torus_lambda(l);
        let weight = lambda.powf(s) * ou_variance(lambda, 1.0, t);
        let mut row = 0.0;
        for j in -radius..=radius {
            let k = l - j;
            if k.abs() > big || inside(k) == inside(l) {
                continue;
            }
            row += b.coeff(j).norm_sqr();
        }
        total += row * weight;
    }
    total
}

/// `E|P_N W^{A,BB*}(t)|_s^2` on the torus for the full (untruncated)
/// noise: `sum_{|n| <= N} sum_k |b_{n-k}|^2 lambda_n^s (1 - e^{-2 lambda_n t}) / (2 lambda_n)`.
pub fn multiplicative_moment_oracle(b: &Multiplier, n: usize, t: f64, s: f64) -> f64 {
    let energy: f64 = (-(b.support_radius() as i64)..=b.support_radius() as i64)
        .map(|j| b.coeff(j).norm_sqr())
        .sum();
    (-(n as i64)..=n as i64)
        .map(|m| {
            let lambda = torus_lambda(m);
            energy * lambda.powf(s) * ou_variance(lambda, 1.0, t)
        })
        .sum()
}

/// `E|P_N^perp W^{A,Q}(t)|_s^2 = sum_{k > N} q_k lambda_k^s (1 - e^{-2 lambda_k t}) / (2 lambda_k)`
/// for a diagonal covariance, summed up to level `k_max`.
///
/// The tail bound uses `q_k lambda_k^{s-1} / 2 <= (c k^2)^{s-1-r} / 2` with
/// `c = pi^2` (sine) or `4 pi^2` (torus, two directions per level) and an
/// integral comparison; it is infinite when the series diverges.
pub fn tail_moment_oracle(
    covariance: &Covariance,
    basis: Basis,
    n: usize,
    t: f64,
    s: f64,
    k_max: usize,
) -> Result<TruncatedSum, NoiseError> {
    let r = match covariance {
        Covariance::Diagonal { exponent } => *exponent,
        Covariance::Multiplication(_) => return Err(crate::models::ModelError::NotDiagonal.into()),
    };
    let basis = basis.scalar();
    if n >= k_max {
        return Ok(TruncatedSum {
            value: 0.0,
            tail_bound: tail_bound(basis, k_max, s, r),
        });
    }
    let mut value = 0.0;
    for i in basis.len_for(n)..basis.len_for(k_max) {
        let lambda: f64 = basis.eigenvalue(i);
        value += lambda.powf(s - r) * ou_variance(lambda, 1.0, t);
    }
    Ok(TruncatedSum {
        value,
        tail_bound: tail_bound(basis, k_max, s, r),
    })
}

fn tail_bound(basis: Basis, k_max: usize, s: f64, r: f64) -> f64 {
    let p = 2.0 * (1.0 + r - s);
    if p <= 1.0 {
        return f64::INFINITY;
    }
    let (c, multiplicity) = match basis {
        Basis::FourierTorus => (4.0 * std::f64::consts::PI.powi(2), 2.0),
        _ => (std::f64::consts::PI.powi(2), 1.0),
    };
    // sum_{k > K} k^{-p} <= int_K^inf x^{-p} dx = K^{1-p} / (p - 1)
    let k = k_max.max(1) as f64;
    multiplicity * 0.5 * c.powf(s - 1.0 - r) * k.powf(1.0 - p) / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_rho(b: &Multiplier, n: usize, t: f64, s: f64) -> f64 {
        let big = 4 * n as i64 + 4;
        let mut total = 0.0;
        for k in -big..=big {
            for l in -big..=big {
                let mixed = (k.unsigned_abs() as usize <= n) != (l.unsigned_abs() as usize <= n);
                if !mixed {
                    continue;
                }
                let lambda = torus_lambda(l);
                total += b.coeff(l - k).norm_sqr() * lambda.powf(s) * (1.0 - (-2.0 * lambda * t).exp()) / (2.0 * lambda);
            }
        }
        total
    }

    #[test]
    fn rho_oracle_matches_double_loop() {
        let b = Multiplier::default_cosine();
        for n in [1, 4, 9] {
            for s in [0.0, 0.25] {
                let fast = rho_moment_oracle(&b, n, 0.5, s);
                let slow = brute_rho(&b, n, 0.5, s);
                assert!((fast - slow).abs() <= 1e-14 * slow, "{n} {s}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn rho_oracle_band_edge_closed_form() {
        // b = 2 + cos: mixed pairs are (+-N, +-(N+1)) and (+-(N+1), +-N).
        let n = 6;
        let t = 0.5;
        let lo = torus_lambda(n);
        let hi = torus_lambda(n + 1);
        let exact = 2.0 * 0.25 * (ou_variance(lo, 1.0, t) + ou_variance(hi, 1.0, t));
        let v = rho_moment_oracle(&Multiplier::default_cosine(), n as usize, t, 0.0);
        assert!((v - exact).abs() < 1e-15);
    }

    #[test]
    fn rho_oracle_trivial_cases() {
        assert_eq!(rho_moment_oracle(&Multiplier::constant(2.0), 8, 0.5, 0.0), 0.0);
        assert_eq!(rho_moment_oracle(&Multiplier::default_cosine(), 8, 0.0, 0.0), 0.0);
    }

    #[test]
    fn tail_oracle_white_noise_integral_bracket() {
        for n in [8usize, 32, 100] {
            let tail = tail_moment_oracle(&Covariance::white(), Basis::DirichletSine, n, 5.0, 0.0, 1 << 20).unwrap();
            let v = tail.value + tail.tail_bound;
            let pi2 = std::f64::consts::PI.powi(2);
            let centre = 1.0 / (2.0 * pi2 * (n as f64 + 1.0));
            let term = 1.0 / (2.0 * pi2 * (n as f64 + 1.0).powi(2));
            assert!((v - centre).abs() <= term, "{n}: {v} vs {centre}");
        }
    }

    #[test]
    fn tail_oracle_above_cutoff_is_zero() {
        let tail = tail_moment_oracle(&Covariance::white(), Basis::DirichletSine, 64, 0.5, 0.0, 64).unwrap();
        assert_eq!(tail.value, 0.0);
        assert!(tail.tail_bound < 1.0 / (2.0 * std::f64::consts::PI.powi(2) * 63.0));
    }

    #[test]
    fn white_noise_tail_is_infinite_at_s_half() {
        let tail = tail_moment_oracle(&Covariance::white(), Basis::DirichletSine, 4, 0.5, 0.5, 100).unwrap();
        assert!(tail.tail_bound.is_infinite());
    }
}
