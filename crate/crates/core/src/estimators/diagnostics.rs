use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functional::{eval_test_functional, TestFunctional};
use super::report::mean_and_stderr;
use super::EstimatorError;
use crate::models::{Covariance, Family, ModelSpec};
use crate::noise::{path_seed, stochastic_convolution, wave_convolution, NoisePath};
use crate::solvers::{GalerkinIntegrator, ItoMap, ModelState, SolverConfig};
use crate::spectral::{GridState, Trajectory};
use crate::Scalar;

/// Noise levels needed to drive a resolution-`n` system.
pub fn noise_levels(model: &ModelSpec, n: usize) -> usize {
    match &model.covariance {
        Covariance::Multiplication(b) if model.family != Family::Wave => n + b.support_radius(),
        _ => n,
    }
}

/// Grid sample of the stochastic convolution of `model` at resolution `n`.
pub fn model_convolution<T: Scalar>(
    model: &ModelSpec,
    n: usize,
    path: &NoisePath<T>,
) -> Result<Trajectory<ModelState<T>>, EstimatorError> {
    Ok(match model.family {
        Family::Wave => wave_convolution(&model.covariance, n, path)?.map(|x| ModelState::Phase(x.clone())),
        _ => stochastic_convolution(&model.covariance, model.basis(), n, path)?.map(|u| ModelState::Field(u.clone())),
    })
}

/// Monte Carlo estimate of `E[D(Phi o Theta)(P_N W) . P_N^perp W]`, with the
/// complement truncated at resolution `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub functional: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub paths: usize,
}

impl IndependenceReport {
    /// `|estimate| <= k stderr`.
    pub fn is_null(&self, k: f64) -> bool {
        self.estimate.abs() <= k * self.stderr
    }
}

/// Central difference step of the directional derivative; `Phi o Theta` is
/// smooth, so the `O(h^2)` bias is far below Monte Carlo noise.
const DIRECTIONAL_STEP: f64 = 1e-3;

#[allow(clippy::too_many_arguments)]
pub fn independence_diagnostic<T: Scalar>(
    model: &ModelSpec,
    functional: &TestFunctional,
    n: usize,
    d: usize,
    paths: usize,
    seed: u64,
    config: &SolverConfig,
) -> Result<IndependenceReport, EstimatorError> {
    if n == 0 || d <= n {
        return Err(EstimatorError::Resolutions(format!("need 0 < N < D (N = {n}, D = {d})")));
    }
    let steps = config.m_steps;
    let proto = ItoMap::<T>::new(model, d, steps, config)?;
    let levels = noise_levels(model, d);
    let h = T::lit(DIRECTIONAL_STEP);
    let samples = (0..paths as u64)
        .into_par_iter()
        .map_init(
            || proto.clone(),
            |theta, p| -> Result<f64, EstimatorError> {
                let path = NoisePath::sample(path_seed(seed, p), levels, steps, T::lit(model.horizon), model.basis())?;
                let w = model_convolution(model, d, &path)?;
                let mut low = Vec::with_capacity(steps + 1);
                let mut high = Vec::with_capacity(steps + 1);
                for s in w.states() {
                    low.push(s.project(n)?.resized(d));
                    high.push(s.project_complement(n)?);
                }
                let shifted = |sign: T| -> Result<Trajectory<ModelState<T>>, EstimatorError> {
                    let mut states = low.clone();
                    for (a, b) in states.iter_mut().zip(&high) {
                        a.axpy(sign * h, b)?;
                    }
                    Ok(Trajectory::new(w.horizon(), states)?)
                };
                let plus = eval_test_functional(functional, &theta.apply(&shifted(T::one())?)?)?;
                let minus = eval_test_functional(functional, &theta.apply(&shifted(-T::one())?)?)?;
                Ok((plus - minus) / (2.0 * DIRECTIONAL_STEP))
            },
        )
        .collect::<Result<Vec<_>, _>>()?;
    let (estimate, stderr) = mean_and_stderr(&samples);
    Ok(IndependenceReport {
        functional: functional.label(),
        n,
        d,
        estimate,
        stderr,
        paths,
    })
}

/// Outcome of repeated step doubling on one coupled Brownian path family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepHalvingReport {
    pub steps: Vec<usize>,
    /// Monitored statistic per step count: `E sup_t |u_{4N} - u_N|_s`.
    pub values: Vec<f64>,
    /// Relative change from each step count to the next.
    pub changes: Vec<f64>,
    /// First step count whose doubling moved the statistic by less than the
    /// tolerance.
    pub accepted: Option<usize>,
}

impl StepHalvingReport {
    pub fn max_change(&self) -> f64 {
        self.changes.iter().copied().fold(0.0, f64::max)
    }
}

/// Doubles `config.m_steps` up to `max_halvings` times. Every level is driven
/// by the same Brownian paths (coarse levels sum pairs of fine increments),
/// so the changes measure time discretization only.
pub fn step_halving_check<T: Scalar>(
    model: &ModelSpec,
    n: usize,
    paths: usize,
    seed: u64,
    tolerance: f64,
    max_halvings: usize,
    config: &SolverConfig,
) -> Result<StepHalvingReport, EstimatorError> {
    let levels_count = max_halvings + 1;
    let steps: Vec<usize> = (0..levels_count).map(|k| config.m_steps << k).collect();
    let finest = *steps.last().expect("at least one level");
    let hi = 4 * n;
    let mut protos = Vec::with_capacity(levels_count);
    for &m in &steps {
        let cfg = SolverConfig {
            m_steps: m,
            ..config.clone()
        };
        protos.push((GalerkinIntegrator::<T>::new(model, n, &cfg)?, GalerkinIntegrator::<T>::new(model, hi, &cfg)?));
    }
    let noise = noise_levels(model, hi);
    let s = model.s;
    let rows = (0..paths as u64)
        .into_par_iter()
        .map_init(
            || protos.clone(),
            |ints, p| -> Result<Vec<f64>, EstimatorError> {
                let mut path = NoisePath::sample(path_seed(seed, p), noise, finest, T::lit(model.horizon), model.basis())?;
                let mut out = vec![0.0; levels_count];
                for k in (0..levels_count).rev() {
                    let (lo, hi) = &mut ints[k];
                    let a = lo.run(&path)?;
                    let b = hi.run(&path)?;
                    out[k] = a
                        .states()
                        .iter()
                        .zip(b.states())
                        .map(|(x, y)| x.distance_sq_raw(y, s).as_f64())
                        .fold(0.0, f64::max)
                        .sqrt();
                    if k > 0 {
                        path = path.coarsened()?;
                    }
                }
                Ok(out)
            },
        )
        .collect::<Result<Vec<_>, _>>()?;
    let values: Vec<f64> = (0..levels_count)
        .map(|k| mean_and_stderr(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()).0)
        .collect();
    let changes: Vec<f64> = values.windows(2).map(|w| ((w[1] - w[0]) / w[1]).abs()).collect();
    let accepted = changes.iter().position(|&c| c < tolerance).map(|k| steps[k]);
    Ok(StepHalvingReport {
        steps,
        values,
        changes,
        accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::functional::InnerMap;
    use crate::models::Multiplier;

    #[test]
    fn independence_null_for_commuting_noise() {
        let model = ModelSpec::heat_white_noise();
        let cfg = SolverConfig::with_steps(64);
        let f = TestFunctional::TimeIntegral {
            phi: InnerMap::cosine(),
            t1: 0.0,
            t2: model.horizon,
        };
        let r = independence_diagnostic::<f64>(&model, &f, 4, 16, 400, 3, &cfg).unwrap();
        assert!(r.stderr > 0.0);
        assert!(r.is_null(3.0), "{r:?}");
    }

    #[test]
    fn constant_multiplier_reduces_to_commuting() {
        let mut model = ModelSpec::torus_multiplicative();
        model.covariance = Covariance::Multiplication(Multiplier::constant(1.5));
        model.initial.position = vec![0.2, 0.4];
        let cfg = SolverConfig::with_steps(64);
        let f = TestFunctional::gaussian_bump_integral(model.horizon);
        let r = independence_diagnostic::<f64>(&model, &f, 3, 12, 300, 5, &cfg).unwrap();
        assert!(r.is_null(3.0), "{r:?}");
    }

    #[test]
    fn step_halving_statistic_stabilizes() {
        let model = ModelSpec::heat_white_noise();
        let cfg = SolverConfig::with_steps(128);
        let r = step_halving_check::<f64>(&model, 8, 64, 1, 0.1, 2, &cfg).unwrap();
        assert_eq!(r.steps, vec![128, 256, 512]);
        assert!(r.max_change() < 0.1, "{r:?}");
        assert_eq!(r.accepted, Some(128));
    }
}
