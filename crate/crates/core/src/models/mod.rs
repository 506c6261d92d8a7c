//! Model families (heat, wave, torus), their coefficients and the regularity
//! exponents that govern convergence rates.

mod covariance;
mod nonlinearity;

pub use covariance::{Covariance, Multiplier};
pub use nonlinearity::{NemytskiiEvaluator, Nonlinearity};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{Basis, Collocation, Exponent, PhaseField, SpectralError, SpectralField};
use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    /// Names the violated rule, e.g. `"s >= s_Q"`.
    #[error("inadmissible model: {rule}")]
    Inadmissible { rule: String },
    #[error("covariance is not diagonal in the eigenbasis")]
    NotDiagonal,
    #[error("{covariance} covariance is not supported on the {basis} basis")]
    UnsupportedCovariance { covariance: &'static str, basis: Basis },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Heat,
    Wave,
    Torus,
}

impl Family {
    pub fn basis(self) -> Basis {
        match self {
            Family::Heat => Basis::DirichletSine,
            Family::Wave => Basis::WavePhase,
            Family::Torus => Basis::FourierTorus,
        }
    }
}

/// Leading coefficients (storage order) of the initial condition; omitted
/// coefficients are zero. `velocity` is only read by the wave family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    #[serde(default)]
    pub position: Vec<f64>,
    #[serde(default)]
    pub velocity: Vec<f64>,
}

impl InitialCondition {
    pub fn first_mode() -> Self {
        Self {
            position: vec![1.0],
            velocity: vec![],
        }
    }

    /// Number of leading modes needed to represent it exactly.
    pub fn support(&self, basis: Basis) -> usize {
        let last = |v: &[f64]| v.iter().rposition(|&c| c != 0.0).map(|i| i + 1).unwrap_or(0);
        let len = last(&self.position).max(last(&self.velocity));
        match basis {
            Basis::FourierTorus => len / 2,
            _ => len,
        }
    }

    fn to_field<T: Scalar>(coeffs: &[f64], basis: Basis, resolution: usize) -> SpectralField<T> {
        let mut field = SpectralField::zeros(basis, resolution);
        for (dst, &src) in field.coeffs_mut().iter_mut().zip(coeffs) {
            *dst = T::lit(src);
        }
        field
    }
}

/// Complete description of one SPDE instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub nonlinearity: Nonlinearity,
    pub covariance: Covariance,
    #[serde(default)]
    pub initial: InitialCondition,
    /// Declared regularity of the initial condition; `None` means smooth
    /// (finitely many modes).
    #[serde(default)]
    pub s0: Option<f64>,
    /// Damping `gamma >= 0`, wave family only.
    #[serde(default)]
    pub damping: f64,
    pub horizon: f64,
    /// Working regularity exponent `s` of the error norms.
    pub s: f64,
}

/// Convergence exponents in `N`: errors behave like `N^{-exponent}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedRates {
    pub strong_n_exponent: f64,
    pub weak_n_exponent: f64,
}

impl ModelSpec {
    /// Heat equation on `(0, 1)` with white noise, `sin` drift, `u_0 = e_1`.
    pub fn heat_white_noise() -> Self {
        Self {
            family: Family::Heat,
            nonlinearity: Nonlinearity::ScaledSine { amplitude: 1.0 },
            covariance: Covariance::white(),
            initial: InitialCondition::first_mode(),
            s0: None,
            damping: 0.0,
            horizon: 0.5,
            s: 0.0,
        }
    }

    /// Damped wave equation with white noise and a smooth three-mode profile
    /// at rest.
    pub fn wave_white_noise() -> Self {
        Self {
            family: Family::Wave,
            nonlinearity: Nonlinearity::ScaledSine { amplitude: 1.0 },
            covariance: Covariance::white(),
            initial: InitialCondition {
                position: vec![1.0, 0.5, 0.25],
                velocity: vec![],
            },
            s0: None,
            damping: 1.0,
            horizon: 0.5,
            s: 0.0,
        }
    }

    /// Periodic heat equation driven by multiplication noise with
    /// `b = 2 + cos(2 pi x)`, started from zero.
    pub fn torus_multiplicative() -> Self {
        Self {
            family: Family::Torus,
            nonlinearity: Nonlinearity::ScaledSine { amplitude: 1.0 },
            covariance: Covariance::Multiplication(Multiplier::default_cosine()),
            initial: InitialCondition::default(),
            s0: None,
            damping: 0.0,
            horizon: 0.5,
            s: 0.0,
        }
    }

    pub fn basis(&self) -> Basis {
        self.family.basis()
    }

    pub fn s_f(&self) -> f64 {
        self.nonlinearity.s_f()
    }

    pub fn s_q(&self) -> Result<f64, ModelError> {
        compute_s_q(&self.covariance, self.basis())
    }

    pub fn exponent(&self) -> Result<Exponent, ModelError> {
        Ok(Exponent::new(self.s)?)
    }

    /// Effective initial regularity (`inf` for smooth data).
    pub fn s0_effective(&self) -> f64 {
        self.s0.unwrap_or(f64::INFINITY)
    }

    /// Checks the admissibility conditions of the family and the basic
    /// parameter ranges. The error names the first violated rule.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |rule: &str| {
            Err(ModelError::Inadmissible {
                rule: rule.to_string(),
            })
        };
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail("T > 0");
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return fail("gamma >= 0");
        }
        if self.family != Family::Wave && self.damping != 0.0 {
            return fail("damping only applies to the wave family");
        }
        if !self.s.is_finite() {
            return fail("s finite");
        }
        self.covariance.validate()?;
        let s_q = self.s_q()?;
        let s_f = self.s_f();
        if self.s < s_f {
            return fail("s >= s_F");
        }
        match self.family {
            Family::Heat | Family::Torus => {
                if self.s >= 1.0 {
                    return fail("s < 1");
                }
            }
            Family::Wave => {
                if self.s > 0.5 {
                    return fail("s <= 1/2");
                }
            }
        }
        if self.s >= s_q {
            return fail("s < s_Q");
        }
        if self.s0_effective() < self.s {
            return fail("s_0 >= s");
        }
        if let Some(s0) = self.s0 {
            if s0.is_nan() {
                return fail("s_0 is a number");
            }
        }
        Ok(())
    }

    /// `P_N u_0` at resolution `n` (heat, torus).
    pub fn initial_field<T: Scalar>(&self, n: usize) -> SpectralField<T> {
        InitialCondition::to_field(&self.initial.position, self.basis().scalar(), n)
    }

    /// `P_N x_0` at resolution `n` (wave).
    pub fn initial_phase<T: Scalar>(&self, n: usize) -> PhaseField<T> {
        PhaseField {
            position: InitialCondition::to_field(&self.initial.position, Basis::DirichletSine, n),
            velocity: InitialCondition::to_field(&self.initial.velocity, Basis::DirichletSine, n),
        }
    }
}

/// `s_Q = min(sup{s : Tr((-A)^{s-1} Q) < inf}, 1)`, in closed form.
///
/// Both bases have `lambda_k ~ k^2`, so for `q_k = lambda_k^{-r}` the trace
/// `sum_k lambda_k^{s-1-r}` converges iff `s < r + 1/2`. A multiplication
/// operator with positive `b` is invertible and leaves the white-noise value
/// `1/2` unchanged.
pub fn compute_s_q(covariance: &Covariance, basis: Basis) -> Result<f64, ModelError> {
    match covariance {
        Covariance::Diagonal { exponent } => Ok((exponent + 0.5).min(1.0)),
        Covariance::Multiplication(_) => match basis {
            Basis::FourierTorus => Ok(0.5),
            other => Err(ModelError::UnsupportedCovariance {
                covariance: "multiplication",
                basis: other,
            }),
        },
    }
}

/// Strong and weak exponents in `N`, obtained from the `lambda_{N+1}`
/// exponents of the error bounds through `lambda_N ~ N^2`.
///
/// Parabolic families: strong `min(s_0 - s, 2 - s_F - s, s_Q - s)`, weak
/// `min(s_0 - s, 2 - s_F - s, 2(s_Q - s))`.
///
/// Wave: with `s_bar = min(1/2, s_0, s_Q)` (or `min(1 - s_F, s_0, s_Q)` when
/// undamped), strong `min(s_0 - s, s_bar - s, s_Q - s)` and weak
/// `min(s_0 - s, s_bar - s, 2(s_Q - s))`. The `s_bar` term is not doubled in
/// the weak bound, so for white noise the proven wave weak exponent is only
/// 1/2; observed weak slopes are steeper.
pub fn predicted_rates(model: &ModelSpec) -> Result<PredictedRates, ModelError> {
    model.validate()?;
    let s = model.s;
    let s0 = model.s0_effective();
    let s_q = model.s_q()?;
    let s_f = model.s_f();
    let rates = match model.family {
        Family::Heat | Family::Torus => {
            let deterministic = (s0 - s).min(2.0 - s_f - s);
            PredictedRates {
                strong_n_exponent: deterministic.min(s_q - s),
                weak_n_exponent: deterministic.min(2.0 * (s_q - s)),
            }
        }
        Family::Wave => {
            let cap = if model.damping > 0.0 { 0.5 } else { 1.0 - s_f };
            let s_bar = cap.min(s0).min(s_q);
            PredictedRates {
                strong_n_exponent: (s0 - s).min(s_bar - s).min(s_q - s),
                weak_n_exponent: (s0 - s).min(s_bar - s).min(2.0 * (s_q - s)),
            }
        }
    };
    Ok(rates)
}

/// `P_N F(u)` by collocation on `4 N` nodes.
pub fn eval_nonlinearity<T: Scalar>(
    model: &ModelSpec,
    u: &SpectralField<T>,
) -> Result<SpectralField<T>, ModelError> {
    if u.basis() != model.basis().scalar() {
        return Err(SpectralError::BasisMismatch {
            expected: "the model basis",
            found: u.basis(),
        }
        .into());
    }
    let plan = Collocation::new(u.basis(), 4 * u.resolution().max(1))?;
    Ok(NemytskiiEvaluator::new(model.nonlinearity, plan).apply(u)?)
}

/// Phase-space drift `(0, P_N F(u) - gamma v)` of the wave family.
pub fn eval_wave_drift<T: Scalar>(model: &ModelSpec, x: &PhaseField<T>) -> Result<PhaseField<T>, ModelError> {
    let mut force = eval_nonlinearity(model, &x.position)?;
    force.axpy(-T::lit(model.damping), &x.velocity);
    Ok(PhaseField {
        position: SpectralField::zeros(Basis::DirichletSine, x.resolution()),
        velocity: force,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat(r: f64, s: f64) -> ModelSpec {
        ModelSpec {
            covariance: Covariance::Diagonal { exponent: r },
            s,
            ..ModelSpec::heat_white_noise()
        }
    }

    #[test]
    fn s_q_closed_forms() {
        let sine = Basis::DirichletSine;
        assert_eq!(compute_s_q(&Covariance::white(), sine).unwrap(), 0.5);
        assert_eq!(compute_s_q(&Covariance::Diagonal { exponent: 1.0 }, sine).unwrap(), 1.0);
        assert_eq!(compute_s_q(&Covariance::Diagonal { exponent: 0.25 }, sine).unwrap(), 0.75);
        let mult = Covariance::Multiplication(Multiplier::default_cosine());
        assert_eq!(compute_s_q(&mult, Basis::FourierTorus).unwrap(), 0.5);
        assert!(compute_s_q(&mult, sine).is_err());
    }

    #[test]
    fn s_q_is_monotone_and_capped() {
        let mut last = 0.0;
        for i in 0..40 {
            let r = i as f64 * 0.05;
            let v = compute_s_q(&Covariance::Diagonal { exponent: r }, Basis::DirichletSine).unwrap();
            assert!(v >= last && v <= 1.0);
            last = v;
        }
        assert_eq!(last, 1.0);
    }

    #[test]
    fn s_q_matches_partial_sum_divergence() {
        // Tr((-A)^{s-1} Q) = sum_k (pi^2 k^2)^{s-1-r}: converges iff 2(s-1-r) < -1.
        // Compare partial sums at K and 4K: a convergent series stabilizes.
        for &r in &[0.0, 0.25] {
            let s_q = compute_s_q(&Covariance::Diagonal { exponent: r }, Basis::DirichletSine).unwrap();
            let partial = |s: f64, k: usize| -> f64 {
                (1..=k)
                    .map(|k| (std::f64::consts::PI.powi(2) * (k * k) as f64).powf(s - 1.0 - r))
                    .sum()
            };
            let below = s_q - 0.2;
            let above = s_q + 0.1;
            let growth_below = partial(below, 40_000) - partial(below, 10_000);
            let growth_above = partial(above, 40_000) - partial(above, 10_000);
            assert!(growth_below < 1e-2, "{growth_below}");
            assert!(growth_above > 1e-1, "{growth_above}");
        }
    }

    #[test]
    fn admissibility_boundaries() {
        assert!(heat(0.0, 0.0).validate().is_ok());
        let err = heat(0.0, 0.5).validate().unwrap_err();
        assert_eq!(err, ModelError::Inadmissible { rule: "s < s_Q".into() });
        assert!(heat(0.0, 0.49).validate().is_ok());
        assert!(heat(1.0, 0.99).validate().is_ok());
        assert_eq!(
            heat(1.0, 1.0).validate().unwrap_err(),
            ModelError::Inadmissible { rule: "s < 1".into() }
        );
        assert_eq!(
            heat(0.0, -0.1).validate().unwrap_err(),
            ModelError::Inadmissible { rule: "s >= s_F".into() }
        );
        let mut wave = ModelSpec::wave_white_noise();
        wave.covariance = Covariance::Diagonal { exponent: 1.0 };
        wave.s = 0.5;
        assert!(wave.validate().is_ok());
        wave.s = 0.51;
        assert_eq!(
            wave.validate().unwrap_err(),
            ModelError::Inadmissible { rule: "s <= 1/2".into() }
        );
    }

    #[test]
    fn predicted_rate_examples() {
        let r = predicted_rates(&heat(0.0, 0.0)).unwrap();
        assert_eq!((r.strong_n_exponent, r.weak_n_exponent), (0.5, 1.0));
        let r = predicted_rates(&heat(0.25, 0.0)).unwrap();
        assert_eq!((r.strong_n_exponent, r.weak_n_exponent), (0.75, 1.5));
        let mut m = heat(0.0, 0.0);
        m.s0 = Some(1.0);
        let r = predicted_rates(&m).unwrap();
        assert_eq!((r.strong_n_exponent, r.weak_n_exponent), (0.5, 1.0));
        let mut w = ModelSpec::wave_white_noise();
        w.s0 = Some(1.0);
        let r = predicted_rates(&w).unwrap();
        assert_eq!((r.strong_n_exponent, r.weak_n_exponent), (0.5, 0.5));
        // undamped and F = 0: s_bar = min(1, s_0, s_Q)
        w.damping = 0.0;
        w.nonlinearity = Nonlinearity::Zero;
        w.covariance = Covariance::Diagonal { exponent: 0.25 };
        w.s0 = None;
        let r = predicted_rates(&w).unwrap();
        assert_eq!((r.strong_n_exponent, r.weak_n_exponent), (0.75, 0.75));
        let r = predicted_rates(&ModelSpec::torus_multiplicative()).unwrap();
        assert_eq!((r.strong_n_exponent, r.weak_n_exponent), (0.5, 1.0));
        assert!(predicted_rates(&heat(0.0, 0.6)).is_err());
    }

    #[test]
    fn zero_nonlinearity_gives_zero_field() {
        let mut m = ModelSpec::heat_white_noise();
        m.nonlinearity = Nonlinearity::Zero;
        let u = SpectralField::new(Basis::DirichletSine, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let f = eval_nonlinearity(&m, &u).unwrap();
        assert!(f.coeffs().iter().all(|&c| c == 0.0));
        let zero = SpectralField::<f64>::zeros(Basis::DirichletSine, 8);
        let f = eval_nonlinearity(&ModelSpec::heat_white_noise(), &zero).unwrap();
        assert!(f.coeffs().iter().all(|&c| c == 0.0));
    }
}
