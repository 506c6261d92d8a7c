use super::functional::{default_probe, InnerMap, TestFunctional};
use super::EstimatorError;
use crate::models::{Family, ModelSpec};
use crate::noise::ou_variance;

/// Independent Gaussian coefficients `N(m_k, v_k)` of a linear solution at a
/// fixed time.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianModes {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Laws of the modes of `u_N(t)` for `F = 0` and a diagonal covariance:
/// `m_k = e^{-lambda_k t} <u_0, e_k>`, `v_k = q_k (1 - e^{-2 lambda_k t}) / (2 lambda_k)`.
pub fn linear_gaussian_modes(model: &ModelSpec, n: usize, t: f64) -> Result<GaussianModes, EstimatorError> {
    require_linear(model)?;
    let basis = model.basis();
    let q = model.covariance.diagonal_variances(basis, n)?;
    let u0 = model.initial_field::<f64>(n);
    let (means, variances) = u0
        .coeffs()
        .iter()
        .zip(&q)
        .enumerate()
        .map(|(i, (&c, &q))| {
            let l: f64 = basis.eigenvalue(i);
            ((-l * t).exp() * c, ou_variance(l, q, t))
        })
        .unzip();
    Ok(GaussianModes { means, variances })
}

fn require_linear(model: &ModelSpec) -> Result<(), EstimatorError> {
    if !model.nonlinearity.is_zero() {
        return Err(EstimatorError::NoOracle("a model with nonzero F".into()));
    }
    if model.family == Family::Wave {
        return Err(EstimatorError::NoOracle("the wave family".into()));
    }
    if !model.covariance.is_diagonal() {
        return Err(EstimatorError::NoOracle("a non-diagonal covariance".into()));
    }
    Ok(())
}

/// `E exp(-|X|_0^2) = prod_k (1 + 2 v_k)^{-1/2} exp(-m_k^2 / (1 + 2 v_k))`.
pub fn gaussian_bump_expectation(modes: &GaussianModes) -> f64 {
    let mut log = 0.0;
    for (&m, &v) in modes.means.iter().zip(&modes.variances) {
        let a = 1.0 + 2.0 * v;
        log += -0.5 * a.ln() - m * m / a;
    }
    log.exp()
}

/// `E cos(<X, g>) = cos(m_g) exp(-v_g / 2)` with `m_g = sum g_k m_k` and
/// `v_g = sum g_k^2 v_k`.
pub fn cosine_expectation(modes: &GaussianModes, probe: &[f64]) -> f64 {
    let (mut m, mut v) = (0.0, 0.0);
    for ((&g, &mk), &vk) in probe.iter().zip(&modes.means).zip(&modes.variances) {
        m += g * mk;
        v += g * g * vk;
    }
    m.cos() * (-0.5 * v).exp()
}

/// `E phi(u_N(t))` in closed form.
pub fn linear_phi_expectation(model: &ModelSpec, phi: &InnerMap, n: usize, t: f64) -> Result<f64, EstimatorError> {
    let modes = linear_gaussian_modes(model, n, t)?;
    Ok(match phi {
        InnerMap::GaussianBump => gaussian_bump_expectation(&modes),
        InnerMap::CosineFunctional { probe } => {
            let g = probe.clone().unwrap_or_else(default_probe);
            cosine_expectation(&modes, &g)
        }
    })
}

/// `E Phi(u_N)` for fixed-time and time-integral functionals, with the same
/// node snapping and trapezoid weights as the Monte Carlo evaluation.
pub fn linear_functional_expectation(
    model: &ModelSpec,
    functional: &TestFunctional,
    n: usize,
    steps: usize,
) -> Result<f64, EstimatorError> {
    if let TestFunctional::Composed { .. } = functional {
        return Err(EstimatorError::NoOracle("a composed functional".into()));
    }
    let weights = functional.weights(model.horizon, steps)?;
    let dt = model.horizon / steps as f64;
    let mut acc = 0.0;
    for (m, &w) in weights.iter().enumerate() {
        if w != 0.0 {
            acc += w * linear_phi_expectation(model, functional.inner(), n, m as f64 * dt)?;
        }
    }
    Ok(acc)
}

/// Closed-form weak error `E Phi(u_{N_ref}) - E Phi(u_N)` of the linear model.
pub fn linear_weak_error_oracle(
    model: &ModelSpec,
    functional: &TestFunctional,
    n: usize,
    n_ref: usize,
    steps: usize,
) -> Result<f64, EstimatorError> {
    Ok(linear_functional_expectation(model, functional, n_ref, steps)?
        - linear_functional_expectation(model, functional, n, steps)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Nonlinearity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn linear_heat() -> ModelSpec {
        let mut m = ModelSpec::heat_white_noise();
        m.nonlinearity = Nonlinearity::Zero;
        m
    }

    #[test]
    fn bump_expectation_by_direct_sampling() {
        let modes = GaussianModes {
            means: vec![0.4, -0.2, 0.1],
            variances: vec![0.3, 0.05, 0.01],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let paths = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..paths {
            let e: f64 = modes
                .means
                .iter()
                .zip(&modes.variances)
                .map(|(m, v)| {
                    let z: f64 = rng.sample(StandardNormal);
                    (m + v.sqrt() * z).powi(2)
                })
                .sum();
            let x = (-e).exp();
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / paths as f64;
        let se = ((s2 / paths as f64 - mean * mean) / paths as f64).sqrt();
        assert!((mean - gaussian_bump_expectation(&modes)).abs() < 5.0 * se);
    }

    #[test]
    fn cosine_on_single_mode() {
        let modes = GaussianModes {
            means: vec![0.3],
            variances: vec![0.5],
        };
        assert!((cosine_expectation(&modes, &[1.0]) - 0.3f64.cos() * (-0.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn first_mode_probe_sees_no_truncation() {
        let model = linear_heat();
        let f = TestFunctional::TimeIntegral {
            phi: InnerMap::CosineFunctional { probe: Some(vec![1.0]) },
            t1: 0.0,
            t2: model.horizon,
        };
        for n in [1, 4, 16] {
            assert!(linear_weak_error_oracle(&model, &f, n, 64, 64).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn bump_weak_error_decreases_with_n() {
        let model = linear_heat();
        let f = TestFunctional::FixedTime {
            phi: InnerMap::GaussianBump,
            t: model.horizon,
        };
        let e: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&n| linear_weak_error_oracle(&model, &f, n, 64, 64).unwrap())
            .collect();
        // more modes add variance and lower E exp(-|u|^2)
        assert!(e.iter().all(|&x| x < 0.0));
        assert!(e[0].abs() > e[1].abs() && e[1].abs() > e[2].abs());
    }

    #[test]
    fn nonlinear_model_has_no_oracle() {
        let model = ModelSpec::heat_white_noise();
        assert!(linear_gaussian_modes(&model, 4, 0.1).is_err());
    }
}
