use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::NoiseError;
use crate::spectral::{Basis, SpectralField};
use crate::Scalar;

/// Brownian increments `dW[k][m]` for the scalar basis directions of a
/// model, on a uniform grid of `steps` steps over `[0, horizon]`.
///
/// Each basis direction `k` (storage index) owns its own ChaCha8 stream keyed
/// by `(seed, k)`, and step `m` is the `m`-th standard normal drawn from that
/// stream. Increments therefore depend on `(seed, k, m)` only: a path with
/// more modes extends a path with fewer modes bit for bit.
///
/// Internally the standard normals `xi[k][m] = dW[k][m] / sqrt(dt)` are kept
/// step-major so integrators read one contiguous slice per step.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath<T> {
    seed: u64,
    basis: Basis,
    resolution: usize,
    rows: usize,
    steps: usize,
    horizon: T,
    sqrt_dt: T,
    normals: Vec<T>,
}

/// Standard normals for storage index `row`: the first `steps` draws of the
/// `(seed, row)` stream.
pub fn mode_normals(seed: u64, row: usize, steps: usize) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    (0..steps).map(move |_| rng.sample::<f64, _>(StandardNormal))
}

/// Seed of Monte Carlo path `p` derived from a base seed (SplitMix64).
pub fn path_seed(base: u64, p: u64) -> u64 {
    let mut z = base.wrapping_add(p.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples the increments of `n_modes` (resolution) basis levels. For the
/// wave family the noise acts on the velocity, so the scalar sine basis is
/// used.
pub fn sample_noise_path<T: Scalar>(
    seed: u64,
    n_modes: usize,
    steps: usize,
    horizon: T,
    basis: Basis,
) -> Result<NoisePath<T>, NoiseError> {
    NoisePath::sample(seed, n_modes, steps, horizon, basis)
}

impl<T: Scalar> NoisePath<T> {
    pub fn sample(seed: u64, n_modes: usize, steps: usize, horizon: T, basis: Basis) -> Result<Self, NoiseError> {
        if n_modes == 0 || steps == 0 {
            return Err(NoiseError::EmptyPath);
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(NoiseError::BadHorizon(horizon.as_f64()));
        }
        let basis = basis.scalar();
        let rows = basis.len_for(n_modes);
        // one generator per row, drawn step by step so writes stay contiguous
        let mut streams: Vec<ChaCha8Rng> = (0..rows)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                rng
            })
            .collect();
        let mut normals = Vec::with_capacity(rows * steps);
        for _ in 0..steps {
            normals.extend(streams.iter_mut().map(|rng| T::lit(rng.sample::<f64, _>(StandardNormal))));
        }
        let dt = horizon / T::from_usize_exact(steps);
        Ok(Self {
            seed,
            basis,
            resolution: n_modes,
            rows,
            steps,
            horizon,
            sqrt_dt: dt.sqrt(),
            normals,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Scalar basis of the driven directions.
    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Number of resolved levels (`n_modes`).
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Number of scalar Brownian motions (storage rows).
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn dt(&self) -> T {
        self.sqrt_dt * self.sqrt_dt
    }

    pub fn sqrt_dt(&self) -> T {
        self.sqrt_dt
    }

    /// `dW[k][m]`.
    #[inline]
    pub fn increment(&self, k: usize, m: usize) -> T {
        self.normals[m * self.rows + k] * self.sqrt_dt
    }

    /// `xi[.][m] = dW[.][m] / sqrt(dt)` for every row.
    #[inline]
    pub fn normals_at(&self, m: usize) -> &[T] {
        &self.normals[m * self.rows..(m + 1) * self.rows]
    }

    /// Row `k` of the increment matrix.
    pub fn mode_row(&self, k: usize) -> Vec<T> {
        (0..self.steps).map(|m| self.increment(k, m)).collect()
    }

    /// Increments of step `m` as a field of resolution `n <= resolution`.
    pub fn increment_field(&self, m: usize, n: usize) -> Result<SpectralField<T>, NoiseError> {
        if n > self.resolution {
            return Err(NoiseError::TooFewModes {
                required: n,
                available: self.resolution,
            });
        }
        let len = self.basis.len_for(n);
        let coeffs = self.normals_at(m)[..len].iter().map(|&z| z * self.sqrt_dt).collect();
        Ok(SpectralField::new(self.basis, n, coeffs)?)
    }

    /// `W(t_m)` as a field of resolution `n`.
    pub fn cumulative_field(&self, m: usize, n: usize) -> Result<SpectralField<T>, NoiseError> {
        let mut w = SpectralField::zeros(self.basis, n);
        for j in 0..m {
            w.axpy(T::one(), &self.increment_field(j, n)?);
        }
        Ok(w)
    }

    /// The same Brownian path on a grid with half the steps:
    /// `xi'[m] = (xi[2m] + xi[2m + 1]) / sqrt(2)`.
    pub fn coarsened(&self) -> Result<Self, NoiseError> {
        if !self.steps.is_multiple_of(2) || self.steps < 2 {
            return Err(NoiseError::StepMismatch {
                expected: 2 * (self.steps / 2).max(1),
                found: self.steps,
            });
        }
        let steps = self.steps / 2;
        let r = self.rows;
        let half = T::FRAC_1_SQRT_2();
        let mut normals = Vec::with_capacity(r * steps);
        for m in 0..steps {
            let (a, b) = (self.normals_at(2 * m), self.normals_at(2 * m + 1));
            normals.extend(a.iter().zip(b).map(|(&x, &y)| (x + y) * half));
        }
        Ok(Self {
            steps,
            sqrt_dt: self.sqrt_dt * T::SQRT_2(),
            normals,
            ..self.clone()
        })
    }

    pub(crate) fn require(&self, n: usize, steps: usize) -> Result<(), NoiseError> {
        if n > self.resolution {
            return Err(NoiseError::TooFewModes {
                required: n,
                available: self.resolution,
            });
        }
        if steps != self.steps {
            return Err(NoiseError::StepMismatch {
                expected: steps,
                found: self.steps,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_is_bit_exact_across_mode_counts() {
        let small = NoisePath::<f64>::sample(7, 8, 32, 0.5, Basis::DirichletSine).unwrap();
        let large = NoisePath::<f64>::sample(7, 512, 32, 0.5, Basis::DirichletSine).unwrap();
        for k in 0..8 {
            assert_eq!(small.mode_row(k), large.mode_row(k));
        }
        let t8 = NoisePath::<f64>::sample(7, 8, 16, 0.5, Basis::FourierTorus).unwrap();
        let t64 = NoisePath::<f64>::sample(7, 64, 16, 0.5, Basis::FourierTorus).unwrap();
        for k in 0..t8.rows() {
            assert_eq!(t8.mode_row(k), t64.mode_row(k));
        }
    }

    #[test]
    fn seeds_and_rows_differ() {
        let a = NoisePath::<f64>::sample(1, 4, 16, 1.0, Basis::DirichletSine).unwrap();
        let b = NoisePath::<f64>::sample(2, 4, 16, 1.0, Basis::DirichletSine).unwrap();
        assert_ne!(a.mode_row(0), b.mode_row(0));
        assert_ne!(a.mode_row(0), a.mode_row(1));
    }

    #[test]
    fn path_seeds_are_distinct() {
        let mut seeds: Vec<u64> = (0..10_000).map(|p| path_seed(42, p)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn increment_moments() {
        let paths = 100_000u64;
        let dt = 0.5 / 4.0;
        let (mut s1, mut s2) = (0.0, 0.0);
        for p in 0..paths {
            let x = mode_normals(path_seed(3, p), 0, 1).next().unwrap() * f64::sqrt(dt);
            s1 += x;
            s2 += x * x;
        }
        let n = paths as f64;
        let mean = s1 / n;
        let var = s2 / n - mean * mean;
        assert!(mean.abs() < 5.0 * (dt / n).sqrt(), "{mean}");
        // Var of the sample variance of a Gaussian: 2 dt^2 / n.
        assert!((var - dt).abs() < 5.0 * dt * (2.0 / n).sqrt(), "{var}");
    }

    #[test]
    fn coarsening_preserves_brownian_values() {
        let fine = NoisePath::<f64>::sample(9, 4, 16, 1.0, Basis::DirichletSine).unwrap();
        let coarse = fine.coarsened().unwrap();
        assert_eq!(coarse.steps(), 8);
        for m in 0..=8 {
            let a = fine.cumulative_field(2 * m, 4).unwrap();
            let b = coarse.cumulative_field(m, 4).unwrap();
            assert!(a.distance_sq_raw(&b, 0.0).sqrt() < 1e-14);
        }
        let odd = NoisePath::<f64>::sample(9, 4, 5, 1.0, Basis::DirichletSine).unwrap();
        assert!(odd.coarsened().is_err());
    }

    #[test]
    fn cumulative_field_sums_increments() {
        let p = NoisePath::<f64>::sample(5, 3, 8, 1.0, Basis::DirichletSine).unwrap();
        let w = p.cumulative_field(8, 3).unwrap();
        let direct: f64 = p.mode_row(2).iter().sum();
        assert!((w.coeffs()[2] - direct).abs() < 1e-14);
    }
}
