use super::integrator::linear_coefficients;
use super::{ModelState, SolverConfig, SolverError};
use crate::models::{Family, ModelSpec, NemytskiiEvaluator};
use crate::spectral::{Collocation, Exponent, GridState, SpectralField, Trajectory, WaveRotation};
use crate::Scalar;

/// Grid realization of the Itô map `Theta` at resolution `D`:
/// `Y = V + w` with `V_0 = P_D x_0` and
///
/// * heat/torus: `V_{m+1} = e^{dt A} V_m + A^{-1}(e^{dt A} - I) P_D F(Y_m)`,
/// * wave: `V_{m+1} = e^{dt A} V_m + dt P_D F(Y_m)` with `F(u, v) = (0, F(u) - gamma v)`.
///
/// Each grid value depends only on earlier values and `w`, so the map is
/// evaluated by one forward march.
#[derive(Clone, Debug)]
pub struct ItoMap<T: Scalar> {
    family: Family,
    resolution: usize,
    steps: usize,
    horizon: T,
    dt: T,
    damping: T,
    decay: Vec<T>,
    phi: Vec<T>,
    rotation: Option<WaveRotation<T>>,
    evaluator: Option<NemytskiiEvaluator<T>>,
    initial: ModelState<T>,
}

impl<T: Scalar> ItoMap<T> {
    pub fn new(model: &ModelSpec, resolution: usize, steps: usize, config: &SolverConfig) -> Result<Self, SolverError> {
        model.validate()?;
        let basis = model.basis().scalar();
        let dt = model.horizon / steps as f64;
        let (decay, phi) = linear_coefficients(basis, resolution, dt);
        let evaluator = if model.nonlinearity.is_zero() {
            None
        } else {
            let plan = Collocation::new(basis, config.nodes_for(resolution))?;
            if plan.max_resolution() < resolution {
                return Err(crate::spectral::SpectralError::TooFewNodes {
                    nodes: plan.nodes(),
                    required: crate::spectral::min_nodes(resolution),
                }
                .into());
            }
            Some(NemytskiiEvaluator::new(model.nonlinearity, plan))
        };
        let (initial, rotation) = match model.family {
            Family::Wave => (
                ModelState::Phase(model.initial_phase(resolution)),
                Some(WaveRotation::new(resolution, T::lit(dt))),
            ),
            _ => (ModelState::Field(model.initial_field(resolution)), None),
        };
        Ok(Self {
            family: model.family,
            resolution,
            steps,
            horizon: T::lit(model.horizon),
            dt: T::lit(dt),
            damping: T::lit(model.damping),
            decay,
            phi,
            rotation,
            evaluator,
            initial,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    fn check(&self, w: &Trajectory<ModelState<T>>) -> Result<(), SolverError> {
        if w.resolution() != self.resolution {
            return Err(SolverError::Resolution {
                requested: w.resolution(),
                available: self.resolution,
            });
        }
        if w.steps() != self.steps {
            return Err(crate::noise::NoiseError::StepMismatch {
                expected: self.steps,
                found: w.steps(),
            }
            .into());
        }
        let kind_ok = matches!(
            (self.family, w.state(0)),
            (Family::Wave, ModelState::Phase(_)) | (Family::Heat | Family::Torus, ModelState::Field(_))
        );
        if !kind_ok {
            return Err(SolverError::StateKind);
        }
        Ok(())
    }

    /// `P_D F(Y)` for heat/torus, `P_D (F(u) - gamma v)` (velocity part) for
    /// wave, written into `out`.
    fn drift(&mut self, y: &ModelState<T>, out: &mut SpectralField<T>) -> Result<(), SolverError> {
        match self.evaluator.as_mut() {
            Some(ev) => ev.apply_into(y.position(), out)?,
            None => out.coeffs_mut().iter_mut().for_each(|c| *c = T::zero()),
        }
        if let ModelState::Phase(x) = y {
            let gamma = self.damping;
            for (f, &v) in out.coeffs_mut().iter_mut().zip(x.velocity.coeffs()) {
                *f = *f - gamma * v;
            }
        }
        Ok(())
    }

    /// `V <- e^{dt A} V + (quadrature weight) f`.
    fn march(&self, v: &mut ModelState<T>, f: &SpectralField<T>) {
        match v {
            ModelState::Field(v) => {
                for ((c, &f), (&e, &p)) in v.coeffs_mut().iter_mut().zip(f.coeffs()).zip(self.decay.iter().zip(&self.phi)) {
                    *c = e * *c + p * f;
                }
            }
            ModelState::Phase(x) => {
                self.rotation.as_ref().expect("wave maps carry a rotation").apply(x);
                x.velocity.axpy(self.dt, f);
            }
        }
    }

    fn force_buffer(&self) -> SpectralField<T> {
        SpectralField::zeros(self.family.basis().scalar(), self.resolution)
    }

    /// `Theta(w)` on the grid of `w`.
    pub fn apply(&mut self, w: &Trajectory<ModelState<T>>) -> Result<Trajectory<ModelState<T>>, SolverError> {
        self.check(w)?;
        let mut f = self.force_buffer();
        let mut v = self.initial.clone();
        let mut states = Vec::with_capacity(self.steps + 1);
        let mut y = v.clone();
        y.axpy(T::one(), w.state(0))?;
        states.push(y);
        for m in 0..self.steps {
            let y_m = &states[m];
            self.drift(y_m, &mut f)?;
            self.march(&mut v, &f);
            let mut y = v.clone();
            y.axpy(T::one(), w.state(m + 1))?;
            if !y.is_finite() {
                return Err(SolverError::Diverged { seed: None, step: m + 1 });
            }
            states.push(y);
        }
        Ok(Trajectory::new(self.horizon, states)?)
    }

    /// One sweep of the integral map with the drift frozen at `prev`.
    fn picard_sweep(
        &mut self,
        w: &Trajectory<ModelState<T>>,
        prev: &Trajectory<ModelState<T>>,
    ) -> Result<Trajectory<ModelState<T>>, SolverError> {
        let mut f = self.force_buffer();
        let mut v = self.initial.clone();
        let mut states = Vec::with_capacity(self.steps + 1);
        let mut y = v.clone();
        y.axpy(T::one(), w.state(0))?;
        states.push(y);
        for m in 0..self.steps {
            self.drift(prev.state(m), &mut f)?;
            self.march(&mut v, &f);
            let mut y = v.clone();
            y.axpy(T::one(), w.state(m + 1))?;
            states.push(y);
        }
        Ok(Trajectory::new(self.horizon, states)?)
    }
}

/// `Theta(w)` for a forcing trajectory `w`; the resolution and grid are taken
/// from `w`.
pub fn ito_map<T: Scalar>(
    model: &ModelSpec,
    w: &Trajectory<ModelState<T>>,
    config: &SolverConfig,
) -> Result<Trajectory<ModelState<T>>, SolverError> {
    ItoMap::new(model, w.resolution(), w.steps(), config)?.apply(w)
}

#[derive(Clone, Debug)]
pub struct PicardOutcome<T: Scalar> {
    pub trajectory: Trajectory<ModelState<T>>,
    pub iterations: usize,
    /// `sup_m |Y^{j+1}(t_m) - Y^j(t_m)|_0` at the last iteration.
    pub last_change: f64,
}

/// Verification mode of the Itô map: iterates the discrete integral equation
/// `Y = e^{tA} x_0 + (quadrature of F(Y)) + w` to a fixed point, starting
/// from `Y^0 = e^{tA} x_0 + w`, until successive iterates differ by less than
/// the configured Picard tolerance.
pub fn ito_map_picard<T: Scalar>(
    model: &ModelSpec,
    w: &Trajectory<ModelState<T>>,
    config: &SolverConfig,
) -> Result<PicardOutcome<T>, SolverError> {
    config.validate()?;
    let mut map = ItoMap::new(model, w.resolution(), w.steps(), config)?;
    map.check(w)?;
    let mut linear = map.clone();
    linear.evaluator = None;
    linear.damping = T::zero();
    let mut current = linear.apply(w)?;
    let mut change = f64::INFINITY;
    for it in 1..=config.max_picard_iterations {
        let next = map.picard_sweep(w, &current)?;
        change = next.sup_distance(&current, Exponent::ZERO)?.as_f64();
        current = next;
        if change < config.picard_tolerance {
            return Ok(PicardOutcome {
                trajectory: current,
                iterations: it,
                last_change: change,
            });
        }
        if !change.is_finite() {
            break;
        }
    }
    Err(SolverError::NoConvergence {
        tolerance: config.picard_tolerance,
        iterations: config.max_picard_iterations,
        change,
    })
}

/// Residual `R_N` on the grid of `u_n`, at resolution `d >= N`:
///
/// * heat/torus: `R_0 = (P_N - I) P_D u_0`,
///   `R_{m+1} = e^{dt A} R_m + A^{-1}(e^{dt A} - I)(P_N - I) P_D F(u_N(t_m))`;
/// * wave: `R_0 = (P_N - I) P_D x_0`,
///   `R_{m+1} = e^{dt A} R_m + dt (P_N - I) P_D F(X_N(t_m))`.
///
/// `R_N` is supported on the modes above `N`, and with the same grid and
/// collocation nodes `Theta(P_N W + R_N)` reproduces `u_N` exactly.
pub fn residual_r_n<T: Scalar>(
    model: &ModelSpec,
    u_n: &Trajectory<ModelState<T>>,
    n: usize,
    d: usize,
    config: &SolverConfig,
) -> Result<Trajectory<ModelState<T>>, SolverError> {
    if u_n.resolution() != n {
        return Err(SolverError::Resolution {
            requested: n,
            available: u_n.resolution(),
        });
    }
    if d < n {
        return Err(SolverError::Resolution {
            requested: n,
            available: d,
        });
    }
    let mut map = ItoMap::new(model, d, u_n.steps(), config)?;
    map.check(&u_n.map(|s| s.resized(d)))?;
    let mut f = map.force_buffer();
    let mut r = map.initial.project_complement(n)?.scaled(-T::one());
    let mut states = Vec::with_capacity(u_n.steps() + 1);
    states.push(r.clone());
    for m in 0..u_n.steps() {
        let padded = u_n.state(m).resized(d);
        map.drift(&padded, &mut f)?;
        // only F(u_N) reaches the complement: -gamma v_N stays in band
        let g = f.project_complement(n)?.scaled(-T::one());
        map.march(&mut r, &g);
        states.push(r.clone());
    }
    Ok(Trajectory::new(u_n.horizon(), states)?)
}

/// Finite-difference probes of the Fréchet derivatives of `Theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrechetReport {
    pub scales: Vec<f64>,
    /// `||Theta(w + eps h) - Theta(w)|| / eps`
    pub first: Vec<f64>,
    /// `||Theta(w + eps h) - 2 Theta(w) + Theta(w - eps h)|| / eps^2`
    pub second: Vec<f64>,
}

impl FrechetReport {
    /// Relative change of the first quotient between the two smallest scales.
    pub fn first_spread(&self) -> f64 {
        let (mut a, mut b) = (f64::NAN, f64::NAN);
        let mut idx: Vec<usize> = (0..self.scales.len()).collect();
        idx.sort_by(|&i, &j| self.scales[i].total_cmp(&self.scales[j]));
        if idx.len() >= 2 {
            a = self.first[idx[0]];
            b = self.first[idx[1]];
        }
        (a - b).abs() / a.abs().max(b.abs())
    }

    pub fn max_second(&self) -> f64 {
        self.second.iter().copied().fold(0.0, f64::max)
    }
}

fn shifted<T: Scalar>(
    w: &Trajectory<ModelState<T>>,
    h: &Trajectory<ModelState<T>>,
    eps: T,
) -> Result<Trajectory<ModelState<T>>, SolverError> {
    let mut states = Vec::with_capacity(w.states().len());
    for (a, b) in w.states().iter().zip(h.states()) {
        let mut s = a.clone();
        s.axpy(eps, b)?;
        states.push(s);
    }
    Ok(Trajectory::new(w.horizon(), states)?)
}

/// Difference quotients of `Theta` at `w` in direction `h`, measured in
/// `||.||_{infty, s, T}`.
pub fn frechet_check_ito_map<T: Scalar>(
    model: &ModelSpec,
    w: &Trajectory<ModelState<T>>,
    h: &Trajectory<ModelState<T>>,
    scales: &[f64],
    s: Exponent,
    config: &SolverConfig,
) -> Result<FrechetReport, SolverError> {
    if h.steps() != w.steps() || h.resolution() != w.resolution() {
        return Err(crate::spectral::SpectralError::GridMismatch.into());
    }
    let mut map = ItoMap::new(model, w.resolution(), w.steps(), config)?;
    let base = map.apply(w)?;
    let mut first = Vec::with_capacity(scales.len());
    let mut second = Vec::with_capacity(scales.len());
    for &eps in scales {
        let e = T::lit(eps);
        let plus = map.apply(&shifted(w, h, e)?)?;
        let minus = map.apply(&shifted(w, h, -e)?)?;
        first.push(plus.sup_distance(&base, s)?.as_f64() / eps);
        let mut worst = T::zero();
        for ((p, b), q) in plus.states().iter().zip(base.states()).zip(minus.states()) {
            let mut d = p.clone();
            d.axpy(-T::one() - T::one(), b)?;
            d.axpy(T::one(), q)?;
            worst = worst.max(d.norm_sq_raw(s.get()));
        }
        second.push(worst.sqrt().as_f64() / (eps * eps));
    }
    Ok(FrechetReport {
        scales: scales.to_vec(),
        first,
        second,
    })
}
