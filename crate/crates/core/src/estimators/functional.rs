use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::solvers::ModelState;
use crate::spectral::Trajectory;
use crate::Scalar;

/// Inner map `phi` applied to a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InnerMap {
    /// `phi(x) = cos(<x, g>_0)` for a probe `g` given by leading coefficients
    /// in storage order; `None` selects the default probe.
    CosineFunctional {
        #[serde(default)]
        probe: Option<Vec<f64>>,
    },
    /// `phi(x) = exp(-|x|_0^2)`.
    GaussianBump,
}

/// Outer map `Psi` of a composed functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OuterMap {
    Tanh,
    ScaledSine { amplitude: f64 },
}

impl OuterMap {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            OuterMap::Tanh => x.tanh(),
            OuterMap::ScaledSine { amplitude } => amplitude * x.sin(),
        }
    }
}

/// Bounded `C^2` functional of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunctional {
    /// `phi(Y(t))`, evaluated at the grid node nearest to `t`.
    FixedTime { phi: InnerMap, t: f64 },
    /// `int_{t1}^{t2} phi(Y(t)) dt` by the trapezoid rule on the grid.
    TimeIntegral { phi: InnerMap, t1: f64, t2: f64 },
    /// `Psi(int_{t1}^{t2} phi(Y(t)) dt)`.
    Composed {
        outer: OuterMap,
        phi: InnerMap,
        t1: f64,
        t2: f64,
    },
}

/// `g = sum_{k <= 8} k^{-1} e_k`, normalized to `|g|_0 = 1`.
pub fn default_probe() -> Vec<f64> {
    let raw: Vec<f64> = (1..=8).map(|k| 1.0 / k as f64).collect();
    let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
    raw.into_iter().map(|c| c / norm).collect()
}

impl InnerMap {
    pub fn cosine() -> Self {
        InnerMap::CosineFunctional { probe: None }
    }

    pub fn probe(&self) -> Option<Vec<f64>> {
        match self {
            InnerMap::CosineFunctional { probe } => Some(probe.clone().unwrap_or_else(default_probe)),
            InnerMap::GaussianBump => None,
        }
    }
}

impl TestFunctional {
    /// `int_0^T exp(-|Y(t)|_0^2) dt`.
    pub fn gaussian_bump_integral(horizon: f64) -> Self {
        TestFunctional::TimeIntegral {
            phi: InnerMap::GaussianBump,
            t1: 0.0,
            t2: horizon,
        }
    }

    pub fn inner(&self) -> &InnerMap {
        match self {
            TestFunctional::FixedTime { phi, .. }
            | TestFunctional::TimeIntegral { phi, .. }
            | TestFunctional::Composed { phi, .. } => phi,
        }
    }

    pub fn label(&self) -> String {
        let inner = match self.inner() {
            InnerMap::CosineFunctional { .. } => "cosine-functional",
            InnerMap::GaussianBump => "gaussian-bump",
        };
        match self {
            TestFunctional::FixedTime { t, .. } => format!("{inner}@t={t}"),
            TestFunctional::TimeIntegral { t1, t2, .. } => format!("int[{t1},{t2}] {inner}"),
            TestFunctional::Composed { outer, t1, t2, .. } => {
                let o = match outer {
                    OuterMap::Tanh => "tanh",
                    OuterMap::ScaledSine { .. } => "scaled-sine",
                };
                format!("{o}(int[{t1},{t2}] {inner})")
            }
        }
    }

    /// Quadrature weights on the uniform grid of `steps` steps over
    /// `[0, horizon]`.
    pub fn weights(&self, horizon: f64, steps: usize) -> Result<Vec<f64>, EstimatorError> {
        let dt = horizon / steps as f64;
        let node = |t: f64| -> Result<usize, EstimatorError> {
            if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
                return Err(EstimatorError::Window(format!("time {t} outside [0, {horizon}]")));
            }
            Ok(((t / dt).round() as usize).min(steps))
        };
        let mut w = vec![0.0; steps + 1];
        match self {
            TestFunctional::FixedTime { t, .. } => w[node(*t)?] = 1.0,
            TestFunctional::TimeIntegral { t1, t2, .. } | TestFunctional::Composed { t1, t2, .. } => {
                let (a, b) = (node(*t1)?, node(*t2)?);
                if a >= b {
                    return Err(EstimatorError::Window(format!("empty window [{t1}, {t2}]")));
                }
                for m in a..=b {
                    w[m] = if m == a || m == b { 0.5 * dt } else { dt };
                }
            }
        }
        Ok(w)
    }

    pub fn finish(&self, integral: f64) -> f64 {
        match self {
            TestFunctional::Composed { outer, .. } => outer.eval(integral),
            _ => integral,
        }
    }
}

/// Streaming evaluation of one functional along a trajectory.
#[derive(Clone, Debug)]
pub struct FunctionalAccumulator<T> {
    functional: TestFunctional,
    weights: Vec<f64>,
    probe: Option<Vec<T>>,
    acc: f64,
}

impl<T: Scalar> FunctionalAccumulator<T> {
    pub fn new(functional: &TestFunctional, horizon: f64, steps: usize) -> Result<Self, EstimatorError> {
        Ok(Self {
            weights: functional.weights(horizon, steps)?,
            probe: functional.inner().probe().map(|g| g.into_iter().map(T::lit).collect()),
            functional: functional.clone(),
            acc: 0.0,
        })
    }

    pub fn reset(&mut self) {
        self.acc = 0.0;
    }

    /// Adds the contribution of grid node `m`.
    #[inline]
    pub fn update(&mut self, m: usize, state: &ModelState<T>) {
        let w = self.weights[m];
        if w != 0.0 {
            self.acc += w * inner_value(self.probe.as_deref(), state);
        }
    }

    pub fn value(&self) -> f64 {
        self.functional.finish(self.acc)
    }
}

/// `phi(x)`: cosine of the probe pairing (against the displacement for
/// phase states) or `exp(-|x|_0^2)` in the state-space norm.
pub fn inner_value<T: Scalar>(probe: Option<&[T]>, state: &ModelState<T>) -> f64 {
    match probe {
        Some(g) => {
            let u = state.position().coeffs();
            let pairing: T = u.iter().zip(g).map(|(&a, &b)| a * b).sum();
            pairing.as_f64().cos()
        }
        None => {
            let energy = match state {
                ModelState::Field(u) => u.hs_norm_sq_raw(0.0),
                ModelState::Phase(x) => x.hs_norm_sq_raw(0.0),
            };
            (-energy.as_f64()).exp()
        }
    }
}

/// `Phi(Y)` for a whole trajectory.
pub fn eval_test_functional<T: Scalar>(
    functional: &TestFunctional,
    y: &Trajectory<ModelState<T>>,
) -> Result<f64, EstimatorError> {
    let mut acc = FunctionalAccumulator::new(functional, y.horizon().as_f64(), y.steps())?;
    for (m, state) in y.states().iter().enumerate() {
        acc.update(m, state);
    }
    Ok(acc.value())
}
