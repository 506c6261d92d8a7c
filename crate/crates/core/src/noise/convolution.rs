use super::{MultiplicationOperator, NoiseError, NoisePath};
use crate::models::Covariance;
use crate::spectral::{Basis, PhaseField, SpectralField, Trajectory, WaveRotation};
use crate::Scalar;

/// `q (1 - e^{-2 lambda t}) / (2 lambda)`: variance of one Ornstein-Uhlenbeck
/// mode started at zero.
pub fn ou_variance(lambda: f64, q: f64, t: f64) -> f64 {
    q * -(-2.0 * lambda * t).exp_m1() / (2.0 * lambda)
}

/// Per-mode coefficients of the exact transition of `dZ = AZ dt + dW^Q` over
/// one step `dt`:
///
/// * `decay = e^{-lambda dt}`
/// * `gain = sqrt((1 - e^{-2 lambda dt}) / (2 lambda dt))`, so that
///   `gain * dW` has the variance of `int_0^dt e^{-lambda (dt - r)} dW(r)`
/// * `sigma = sqrt(q) gain sqrt(dt)`, the standard deviation of the
///   transition for a diagonal covariance.
#[derive(Clone, Debug)]
pub struct OuPropagator<T> {
    basis: Basis,
    decay: Vec<T>,
    gain: Vec<T>,
    sigma: Vec<T>,
}

impl<T: Scalar> OuPropagator<T> {
    /// `q` holds per-storage-index variances; pass `None` for unit variances.
    pub fn new(basis: Basis, resolution: usize, dt: f64, q: Option<&[f64]>) -> Result<Self, NoiseError> {
        let basis = basis.scalar();
        let len = basis.len_for(resolution);
        if let Some(q) = q {
            if q.len() < len {
                return Err(NoiseError::TooFewModes {
                    required: len,
                    available: q.len(),
                });
            }
        }
        let mut decay = Vec::with_capacity(len);
        let mut gain = Vec::with_capacity(len);
        let mut sigma = Vec::with_capacity(len);
        for i in 0..len {
            let lambda: f64 = basis.eigenvalue(i);
            let qi = q.map_or(1.0, |q| q[i]);
            decay.push(T::lit((-lambda * dt).exp()));
            gain.push(T::lit((ou_variance(lambda, 1.0, dt) / dt).sqrt()));
            sigma.push(T::lit(ou_variance(lambda, qi, dt).sqrt()));
        }
        Ok(Self {
            basis,
            decay,
            gain,
            sigma,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn decay(&self) -> &[T] {
        &self.decay
    }

    pub fn gain(&self) -> &[T] {
        &self.gain
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    /// `z_k <- decay_k z_k + sigma_k xi_k` with unit-variance `xi`.
    #[inline]
    pub fn step_diagonal(&self, z: &mut [T], xi: &[T]) {
        for (((z, &e), &s), &x) in z.iter_mut().zip(&self.decay).zip(&self.sigma).zip(xi) {
            *z = e * *z + s * x;
        }
    }

    /// `z_k <- decay_k z_k + gain_k inc_k` for a raw increment field.
    #[inline]
    pub fn step_gain(&self, z: &mut [T], inc: &[T]) {
        for (((z, &e), &g), &x) in z.iter_mut().zip(&self.decay).zip(&self.gain).zip(inc) {
            *z = e * *z + g * x;
        }
    }
}

/// One exact step of the stochastic convolution for a diagonal covariance:
/// `z_k <- e^{-lambda_k dt} z_k + sigma_k(dt) xi_k`, where `q` holds the
/// per-mode variances and `xi` the step's standard normals
/// (`dW[k][m] / sqrt(dt)`).
pub fn convolution_step_exact<T: Scalar>(
    z: &SpectralField<T>,
    dt: f64,
    q: &[f64],
    xi: &[T],
) -> Result<SpectralField<T>, NoiseError> {
    let len = z.coeffs().len();
    if xi.len() < len {
        return Err(NoiseError::TooFewModes {
            required: len,
            available: xi.len(),
        });
    }
    let prop = OuPropagator::new(z.basis(), z.resolution(), dt, Some(q))?;
    let mut out = z.clone();
    prop.step_diagonal(out.coeffs_mut(), xi);
    Ok(out)
}

/// One step of the multiplicative-noise convolution on the torus:
/// `z_n <- e^{-lambda_n dt} z_n + g_n(dt) (B dW)_n` with `g_n` the variance
/// matching gain of [`OuPropagator`]. `dw` must resolve the band of `z`
/// widened by the support radius of `b`.
pub fn convolution_step_multiplicative<T: Scalar>(
    z: &SpectralField<T>,
    dt: f64,
    b: &MultiplicationOperator<T>,
    dw: &SpectralField<T>,
) -> Result<SpectralField<T>, NoiseError> {
    if z.basis() != Basis::FourierTorus {
        return Err(NoiseError::WrongBasis(z.basis()));
    }
    let bw = b.apply(dw, z.resolution())?;
    let prop = OuPropagator::new(Basis::FourierTorus, z.resolution(), dt, None)?;
    let mut out = z.clone();
    prop.step_gain(out.coeffs_mut(), bw.coeffs());
    Ok(out)
}

/// Grid sample of the stochastic convolution `P_N W^{A,Q}` at resolution `n`
/// driven by `path` (diagonal covariances on either scalar basis,
/// multiplication covariances on the torus). `Z(t_0) = 0`.
pub fn stochastic_convolution<T: Scalar>(
    covariance: &Covariance,
    basis: Basis,
    n: usize,
    path: &NoisePath<T>,
) -> Result<Trajectory<SpectralField<T>>, NoiseError> {
    let basis = basis.scalar();
    if path.basis() != basis {
        return Err(NoiseError::WrongBasis(path.basis()));
    }
    let dt = path.horizon().as_f64() / path.steps() as f64;
    let mut z = SpectralField::zeros(basis, n);
    let mut states = Vec::with_capacity(path.steps() + 1);
    states.push(z.clone());
    match covariance {
        Covariance::Diagonal { .. } => {
            path.require(n, path.steps())?;
            let q = covariance.diagonal_variances(basis, n)?;
            let prop = OuPropagator::new(basis, n, dt, Some(&q))?;
            for m in 0..path.steps() {
                prop.step_diagonal(z.coeffs_mut(), path.normals_at(m));
                states.push(z.clone());
            }
        }
        Covariance::Multiplication(b) => {
            if basis != Basis::FourierTorus {
                return Err(NoiseError::WrongBasis(basis));
            }
            let op = MultiplicationOperator::new(b);
            let wide = n + op.radius();
            path.require(wide, path.steps())?;
            let prop = OuPropagator::new(basis, n, dt, None)?;
            let mut bw = SpectralField::zeros(basis, n);
            for m in 0..path.steps() {
                op.apply_into(&path.increment_field(m, wide)?, &mut bw)?;
                prop.step_gain(z.coeffs_mut(), bw.coeffs());
                states.push(z.clone());
            }
        }
    }
    Ok(Trajectory::new(path.horizon(), states)?)
}

/// Grid sample of the wave stochastic convolution with noise `(0, dW^Q)`:
/// `w_{m+1} = e^{dt A} w_m + (0, sqrt(q) dW_m)`.
pub fn wave_convolution<T: Scalar>(
    covariance: &Covariance,
    n: usize,
    path: &NoisePath<T>,
) -> Result<Trajectory<PhaseField<T>>, NoiseError> {
    if path.basis() != Basis::DirichletSine {
        return Err(NoiseError::WrongBasis(path.basis()));
    }
    path.require(n, path.steps())?;
    let q = covariance.diagonal_variances(Basis::DirichletSine, n)?;
    let scale: Vec<T> = q.iter().map(|&q| T::lit(q.sqrt()) * path.sqrt_dt()).collect();
    let rot = WaveRotation::new(n, path.dt());
    let mut w = PhaseField::zeros(n);
    let mut states = Vec::with_capacity(path.steps() + 1);
    states.push(w.clone());
    for m in 0..path.steps() {
        rot.apply(&mut w);
        for ((v, &s), &x) in w.velocity.coeffs_mut().iter_mut().zip(&scale).zip(path.normals_at(m)) {
            *v = *v + s * x;
        }
        states.push(w.clone());
    }
    Ok(Trajectory::new(path.horizon(), states)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::path_seed;

    #[test]
    fn small_step_limit_of_transition_variance() {
        let lambda = 1.0;
        let dt = 1e-4;
        let q = 2.0;
        let v = ou_variance(lambda, q, dt);
        assert!((v - q * dt).abs() / (q * dt) < 1e-4 * 1.01);
        assert!((v - q * dt).abs() / (q * dt) > 0.5e-4);
    }

    #[test]
    fn zero_covariance_gives_zero_convolution() {
        let z = SpectralField::<f64>::zeros(Basis::DirichletSine, 4);
        let xi = [1.0, -2.0, 0.3, 5.0];
        let out = convolution_step_exact(&z, 0.1, &[0.0; 4], &xi).unwrap();
        assert!(out.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn zero_increment_is_pure_decay() {
        let z = SpectralField::new(Basis::FourierTorus, 1, vec![1.0, 2.0, -1.0]).unwrap();
        let op = MultiplicationOperator::new(&crate::models::Multiplier::default_cosine());
        let dw = SpectralField::zeros(Basis::FourierTorus, 2);
        let out = convolution_step_multiplicative(&z, 0.01, &op, &dw).unwrap();
        let expect = z.apply_semigroup(0.01).unwrap();
        assert!(out.distance_sq_raw(&expect, 0.0) < 1e-28);
    }

    #[test]
    fn first_mode_variance_matches_closed_form() {
        let paths = 20_000u64;
        let t = 0.5;
        let q = Covariance::white();
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for p in 0..paths {
            let path = NoisePath::<f64>::sample(path_seed(9, p), 2, 4, t, Basis::DirichletSine).unwrap();
            let z = stochastic_convolution(&q, Basis::DirichletSine, 2, &path).unwrap();
            let x = z.last().coeffs()[1].powi(2);
            acc += x;
            acc2 += x * x;
        }
        let n = paths as f64;
        let mean = acc / n;
        let se = ((acc2 / n - mean * mean) / n).sqrt();
        let lambda = 4.0 * std::f64::consts::PI.powi(2);
        let exact = ou_variance(lambda, 1.0, t);
        assert!((mean - exact).abs() < 5.0 * se, "{mean} vs {exact} (se {se})");
    }
}
