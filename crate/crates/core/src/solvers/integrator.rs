use super::{ModelState, SolverConfig, SolverError};
use crate::models::{Covariance, Family, ModelSpec, NemytskiiEvaluator};
use crate::noise::{MultiplicationOperator, NoisePath, OuPropagator};
use crate::spectral::{Basis, Collocation, GridState, SpectralField, Trajectory, WaveRotation};
use crate::Scalar;

#[derive(Clone, Debug)]
enum Forcing<T> {
    /// Exact OU increments `sigma_k xi_k`.
    Diagonal { sigma: Vec<T> },
    /// `gain_k sqrt(dt) (B xi)_k`, with `B xi` computed on the widened band.
    Multiplicative {
        op: MultiplicationOperator<T>,
        scaled_gain: Vec<T>,
        wide_len: usize,
        scratch: Vec<T>,
    },
    /// Velocity increments `sqrt(q_k) dW_k`.
    Wave { scale: Vec<T> },
}

/// Exponential-Euler integrator of the Galerkin system at one resolution.
///
/// Heat and torus:
/// `u <- e^{dt A} u + A^{-1}(e^{dt A} - I) P_N F(u) + (stochastic convolution increment)`.
///
/// Wave: `X <- e^{dt A} X + dt P_N (0, F(u) - gamma v) + (0, sqrt(Q) dW)`.
///
/// The integrator is stepped explicitly so several resolutions can march
/// in lockstep on one noise path.
#[derive(Clone, Debug)]
pub struct GalerkinIntegrator<T: Scalar> {
    family: Family,
    resolution: usize,
    steps: usize,
    horizon: T,
    dt: T,
    decay: Vec<T>,
    phi: Vec<T>,
    rotation: Option<WaveRotation<T>>,
    damping: T,
    forcing: Forcing<T>,
    evaluator: Option<NemytskiiEvaluator<T>>,
    force: SpectralField<T>,
    initial: ModelState<T>,
    state: ModelState<T>,
    step: usize,
}

impl<T: Scalar> GalerkinIntegrator<T> {
    pub fn new(model: &ModelSpec, n: usize, config: &SolverConfig) -> Result<Self, SolverError> {
        model.validate()?;
        config.validate()?;
        if n == 0 {
            return Err(SolverError::Resolution {
                requested: 0,
                available: 0,
            });
        }
        let basis = model.basis().scalar();
        let steps = config.m_steps;
        let dt = model.horizon / steps as f64;
        let len = basis.len_for(n);
        let (decay, phi) = linear_coefficients(basis, n, dt);
        let sqrt_dt = dt.sqrt();
        let (forcing, rotation) = match (model.family, &model.covariance) {
            (Family::Wave, cov) => {
                let q = cov.diagonal_variances(basis, n)?;
                let scale = q.iter().map(|&q| T::lit(q.sqrt() * sqrt_dt)).collect();
                (Forcing::Wave { scale }, Some(WaveRotation::new(n, T::lit(dt))))
            }
            (_, Covariance::Diagonal { .. }) => {
                let q = model.covariance.diagonal_variances(basis, n)?;
                let prop = OuPropagator::new(basis, n, dt, Some(&q))?;
                (
                    Forcing::Diagonal {
                        sigma: prop.sigma().to_vec(),
                    },
                    None,
                )
            }
            (_, Covariance::Multiplication(b)) => {
                let op = MultiplicationOperator::new(b);
                let prop = OuPropagator::<T>::new(basis, n, dt, None)?;
                let scaled_gain = prop.gain().iter().map(|&g| g * T::lit(sqrt_dt)).collect();
                let wide_len = basis.len_for(n + op.radius());
                (
                    Forcing::Multiplicative {
                        op,
                        scaled_gain,
                        wide_len,
                        scratch: vec![T::zero(); len],
                    },
                    None,
                )
            }
        };
        let evaluator = if model.nonlinearity.is_zero() {
            None
        } else {
            let plan = Collocation::new(basis, config.nodes_for(n))?;
            if plan.max_resolution() < n {
                return Err(crate::spectral::SpectralError::TooFewNodes {
                    nodes: plan.nodes(),
                    required: crate::spectral::min_nodes(n),
                }
                .into());
            }
            Some(NemytskiiEvaluator::new(model.nonlinearity, plan))
        };
        let initial = match model.family {
            Family::Wave => ModelState::Phase(model.initial_phase(n)),
            _ => ModelState::Field(model.initial_field(n)),
        };
        Ok(Self {
            family: model.family,
            resolution: n,
            steps,
            horizon: T::lit(model.horizon),
            dt: T::lit(dt),
            decay,
            phi,
            rotation,
            damping: T::lit(model.damping),
            forcing,
            evaluator,
            force: SpectralField::zeros(basis, n),
            state: initial.clone(),
            initial,
            step: 0,
        })
    }

    /// Switches the noise off (`Q = 0`); the path then only fixes the grid.
    pub fn deterministic(mut self) -> Self {
        match &mut self.forcing {
            Forcing::Diagonal { sigma } => sigma.iter_mut().for_each(|s| *s = T::zero()),
            Forcing::Multiplicative { scaled_gain, .. } => scaled_gain.iter_mut().for_each(|s| *s = T::zero()),
            Forcing::Wave { scale } => scale.iter_mut().for_each(|s| *s = T::zero()),
        }
        self
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Noise levels the integrator reads from a path.
    pub fn noise_resolution(&self) -> usize {
        match &self.forcing {
            Forcing::Multiplicative { op, .. } => self.resolution + op.radius(),
            _ => self.resolution,
        }
    }

    pub fn state(&self) -> &ModelState<T> {
        &self.state
    }

    /// Index of the grid time of [`GalerkinIntegrator::state`].
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn reset(&mut self) {
        self.state.clone_from(&self.initial);
        self.step = 0;
    }

    /// Checks that `path` can drive this integrator.
    pub fn check_path(&self, path: &NoisePath<T>) -> Result<(), SolverError> {
        if path.basis() != self.family.basis().scalar() {
            return Err(crate::noise::NoiseError::WrongBasis(path.basis()).into());
        }
        path.require(self.noise_resolution(), self.steps)?;
        Ok(())
    }

    /// Advances one step with the increments of the current step index.
    pub fn advance(&mut self, path: &NoisePath<T>) -> Result<(), SolverError> {
        let m = self.step;
        if m >= self.steps {
            return Err(SolverError::Config("integrator already reached the horizon".into()));
        }
        let xi = path.normals_at(m);
        let dt = self.dt;
        match &mut self.state {
            ModelState::Field(u) => {
                let has_f = match self.evaluator.as_mut() {
                    Some(ev) => {
                        ev.apply_into(u, &mut self.force)?;
                        true
                    }
                    None => false,
                };
                let u = u.coeffs_mut();
                if has_f {
                    let f = self.force.coeffs();
                    for i in 0..u.len() {
                        u[i] = self.decay[i] * u[i] + self.phi[i] * f[i];
                    }
                } else {
                    for i in 0..u.len() {
                        u[i] = self.decay[i] * u[i];
                    }
                }
                match &mut self.forcing {
                    Forcing::Diagonal { sigma } => {
                        for i in 0..u.len() {
                            u[i] = u[i] + sigma[i] * xi[i];
                        }
                    }
                    Forcing::Multiplicative {
                        op,
                        scaled_gain,
                        wide_len,
                        scratch,
                    } => {
                        op.apply_raw(&xi[..*wide_len], scratch);
                        for i in 0..u.len() {
                            u[i] = u[i] + scaled_gain[i] * scratch[i];
                        }
                    }
                    Forcing::Wave { .. } => return Err(SolverError::StateKind),
                }
            }
            ModelState::Phase(x) => {
                match self.evaluator.as_mut() {
                    Some(ev) => ev.apply_into(&x.position, &mut self.force)?,
                    None => self.force.coeffs_mut().iter_mut().for_each(|c| *c = T::zero()),
                }
                let gamma = self.damping;
                for (f, &v) in self.force.coeffs_mut().iter_mut().zip(x.velocity.coeffs()) {
                    *f = *f - gamma * v;
                }
                self.rotation.as_ref().ok_or(SolverError::StateKind)?.apply(x);
                let Forcing::Wave { scale } = &self.forcing else {
                    return Err(SolverError::StateKind);
                };
                let v = x.velocity.coeffs_mut();
                let f = self.force.coeffs();
                for i in 0..v.len() {
                    v[i] = v[i] + dt * f[i] + scale[i] * xi[i];
                }
            }
        }
        self.step += 1;
        if !self.state.is_finite() {
            return Err(SolverError::Diverged {
                seed: Some(path.seed()),
                step: self.step,
            });
        }
        Ok(())
    }

    /// Runs from the initial state to the horizon, keeping every grid state.
    pub fn run(&mut self, path: &NoisePath<T>) -> Result<Trajectory<ModelState<T>>, SolverError> {
        self.check_path(path)?;
        self.reset();
        let mut states = Vec::with_capacity(self.steps + 1);
        states.push(self.state.clone());
        for _ in 0..self.steps {
            self.advance(path)?;
            states.push(self.state.clone());
        }
        Ok(Trajectory::new(self.horizon, states)?)
    }
}

/// Galerkin trajectory `u_N` (or `X_N`) at resolution `n` driven by `path`.
pub fn integrate_galerkin<T: Scalar>(
    model: &ModelSpec,
    n: usize,
    path: &NoisePath<T>,
    config: &SolverConfig,
) -> Result<Trajectory<ModelState<T>>, SolverError> {
    GalerkinIntegrator::new(model, n, config)?.run(path)
}

/// Exponential-Euler coefficients `(e^{-lambda dt}, (1 - e^{-lambda dt}) / lambda)`.
pub(crate) fn linear_coefficients<T: Scalar>(basis: Basis, n: usize, dt: f64) -> (Vec<T>, Vec<T>) {
    basis
        .scalar()
        .eigenvalues::<f64>(n)
        .into_iter()
        .map(|l| (T::lit((-l * dt).exp()), T::lit(-(-l * dt).exp_m1() / l)))
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Nonlinearity;
    use crate::spectral::Exponent;

    fn linear_heat() -> ModelSpec {
        ModelSpec {
            nonlinearity: Nonlinearity::Zero,
            covariance: Covariance::Diagonal { exponent: 0.0 },
            ..ModelSpec::heat_white_noise()
        }
    }

    #[test]
    fn deterministic_linear_heat_is_exact() {
        let model = linear_heat();
        let config = SolverConfig::with_steps(64);
        let mut integ = GalerkinIntegrator::<f64>::new(&model, 4, &config).unwrap().deterministic();
        let path = NoisePath::sample(1, 4, 64, 0.5, Basis::DirichletSine).unwrap();
        let traj = integ.run(&path).unwrap();
        for (m, state) in traj.states().iter().enumerate() {
            let t = traj.time(m);
            let exact = (-std::f64::consts::PI.powi(2) * t).exp();
            let u = state.as_field().unwrap();
            assert!((u.coeffs()[0] - exact).abs() < 1e-14 * exact.max(1e-300));
            assert!(u.coeffs()[1..].iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn undamped_linear_wave_conserves_energy() {
        let mut model = ModelSpec::wave_white_noise();
        model.nonlinearity = Nonlinearity::Zero;
        model.damping = 0.0;
        model.horizon = 1.0;
        let config = SolverConfig::with_steps(200);
        let mut integ = GalerkinIntegrator::<f64>::new(&model, 8, &config).unwrap().deterministic();
        let path = NoisePath::sample(1, 8, 200, 1.0, Basis::DirichletSine).unwrap();
        let traj = integ.run(&path).unwrap();
        let e0 = traj.state(0).norm_sq_raw(0.0).sqrt();
        for state in traj.states() {
            assert!((state.norm_sq_raw(0.0).sqrt() - e0).abs() < 1e-10);
        }
        assert!((traj.sup_norm(Exponent::ZERO) - e0).abs() < 1e-10);
    }

    #[test]
    fn divergence_reports_seed_and_step() {
        let model = linear_heat();
        let config = SolverConfig::with_steps(8);
        let mut integ = GalerkinIntegrator::<f64>::new(&model, 2, &config).unwrap();
        integ.decay[0] = f64::INFINITY;
        let path = NoisePath::sample(77, 2, 8, 0.5, Basis::DirichletSine).unwrap();
        let err = integ.run(&path).unwrap_err();
        assert_eq!(
            err,
            SolverError::Diverged {
                seed: Some(77),
                step: 1
            }
        );
    }

    #[test]
    fn path_with_too_few_modes_rejected() {
        let model = ModelSpec::heat_white_noise();
        let path = NoisePath::<f64>::sample(1, 4, 16, 0.5, Basis::DirichletSine).unwrap();
        assert!(integrate_galerkin(&model, 8, &path, &SolverConfig::with_steps(16)).is_err());
        let torus = ModelSpec::torus_multiplicative();
        let tpath = NoisePath::<f64>::sample(1, 8, 16, 0.5, Basis::FourierTorus).unwrap();
        assert!(integrate_galerkin(&torus, 8, &tpath, &SolverConfig::with_steps(16)).is_err());
        assert!(integrate_galerkin(&torus, 7, &tpath, &SolverConfig::with_steps(16)).is_ok());
    }
}
