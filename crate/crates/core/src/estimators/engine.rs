use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functional::{FunctionalAccumulator, TestFunctional};
use super::report::{mean_and_stderr, ErrorPoint, ErrorReport};
use super::EstimatorError;
use crate::models::{predicted_rates, ModelSpec};
use crate::noise::{path_seed, NoisePath};
use crate::solvers::{GalerkinIntegrator, ModelState, SolverConfig};
use crate::Scalar;

/// Fewest paths accepted for an error curve.
pub const MIN_PATHS: usize = 100;

/// Default slack subtracted from predicted exponents.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// What a coupled Monte Carlo run should estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledPlan {
    pub resolutions: Vec<usize>,
    pub n_ref: usize,
    pub paths: usize,
    /// Strong errors use the first `strong_paths` paths of the run (all when
    /// `None`).
    #[serde(default)]
    pub strong_paths: Option<usize>,
    pub seed: u64,
    #[serde(default = "yes")]
    pub strong: bool,
    #[serde(default)]
    pub functionals: Vec<TestFunctional>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn yes() -> bool {
    true
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl CoupledPlan {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        check_resolutions(&self.resolutions, self.n_ref)?;
        if self.resolutions.len() < 3 {
            return Err(EstimatorError::TooFewPoints(self.resolutions.len()));
        }
        let max = *self.resolutions.last().unwrap_or(&0);
        if self.n_ref < 4 * max {
            return Err(EstimatorError::Resolutions(format!(
                "N_ref >= 4 max(N) (N_ref = {}, max N = {max})",
                self.n_ref
            )));
        }
        let strong = self.strong_paths.unwrap_or(self.paths).min(self.paths);
        for found in [self.paths, if self.strong { strong } else { self.paths }] {
            if found < MIN_PATHS {
                return Err(EstimatorError::TooFewPaths {
                    required: MIN_PATHS,
                    found,
                });
            }
        }
        if !(self.epsilon >= 0.0) {
            return Err(EstimatorError::Resolutions("epsilon >= 0".into()));
        }
        Ok(())
    }
}

fn check_resolutions(resolutions: &[usize], n_ref: usize) -> Result<(), EstimatorError> {
    if resolutions.is_empty() || resolutions[0] == 0 {
        return Err(EstimatorError::Resolutions("resolutions must be positive".into()));
    }
    if resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EstimatorError::Resolutions("resolutions must be strictly increasing".into()));
    }
    if resolutions[resolutions.len() - 1] > n_ref {
        return Err(EstimatorError::Resolutions("resolutions must not exceed N_ref".into()));
    }
    Ok(())
}

/// Raw per-path output of a coupled run.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledSamples {
    pub resolutions: Vec<usize>,
    pub n_ref: usize,
    pub steps: usize,
    /// `strong[i][p] = sup_m |u_ref(t_m) - u_{N_i}(t_m)|_s`.
    pub strong: Vec<Vec<f64>>,
    /// `weak[j][i][p] = Phi_j(u_ref) - Phi_j(u_{N_i})`.
    pub weak: Vec<Vec<Vec<f64>>>,
    /// `reference[j][p] = Phi_j(u_ref)`.
    pub reference: Vec<Vec<f64>>,
}

impl CoupledSamples {
    pub fn paths(&self) -> usize {
        self.strong.first().map_or(0, Vec::len)
    }

    pub fn strong_points(&self, paths: usize) -> Vec<ErrorPoint> {
        let paths = paths.min(self.paths());
        self.resolutions
            .iter()
            .zip(&self.strong)
            .map(|(&n, xs)| {
                let (estimate, stderr) = mean_and_stderr(&xs[..paths]);
                ErrorPoint {
                    n,
                    estimate,
                    stderr,
                    paths,
                    censored: false,
                }
            })
            .collect()
    }

    pub fn weak_points(&self, j: usize) -> Vec<ErrorPoint> {
        self.resolutions
            .iter()
            .zip(&self.weak[j])
            .map(|(&n, xs)| {
                let (estimate, stderr) = mean_and_stderr(xs);
                ErrorPoint {
                    n,
                    estimate,
                    stderr,
                    paths: xs.len(),
                    // an exactly zero difference carries no rate information
                    censored: !(estimate.abs() >= 2.0 * stderr) || estimate == 0.0,
                }
            })
            .collect()
    }
}

/// `|x|_s^2` weights and running prefix energies of the reference state, so
/// the distance to every coarser state costs only its own length.
#[derive(Clone, Debug)]
struct DistanceKernel<T> {
    position: Vec<T>,
    velocity: Option<Vec<T>>,
    prefix: Vec<T>,
}

impl<T: Scalar> DistanceKernel<T> {
    fn new(reference: &ModelState<T>, s: f64) -> Self {
        let basis = reference.position().basis();
        let len = reference.position().coeffs().len();
        let weights = |e: f64| -> Vec<T> {
            (0..len)
                .map(|i| {
                    if e == 0.0 {
                        T::one()
                    } else {
                        basis.eigenvalue::<T>(i).powf(T::lit(e))
                    }
                })
                .collect()
        };
        Self {
            position: weights(s),
            velocity: matches!(reference, ModelState::Phase(_)).then(|| weights(s - 1.0)),
            prefix: vec![T::zero(); len + 1],
        }
    }

    fn prepare(&mut self, reference: &ModelState<T>) {
        let mut acc = T::zero();
        self.prefix[0] = acc;
        match reference {
            ModelState::Field(u) => {
                for (i, (&c, &w)) in u.coeffs().iter().zip(&self.position).enumerate() {
                    acc = acc + w * c * c;
                    self.prefix[i + 1] = acc;
                }
            }
            ModelState::Phase(x) => {
                let vw = self.velocity.as_deref().unwrap_or(&self.position);
                let (u, v) = (x.position.coeffs(), x.velocity.coeffs());
                for i in 0..u.len() {
                    acc = acc + self.position[i] * u[i] * u[i] + vw[i] * v[i] * v[i];
                    self.prefix[i + 1] = acc;
                }
            }
        }
    }

    /// `|reference - coarse|_s^2` after `prepare(reference)`.
    fn distance_sq(&self, reference: &ModelState<T>, coarse: &ModelState<T>) -> T {
        let diff = |a: &[T], b: &[T], w: &[T]| -> T {
            a.iter()
                .zip(b)
                .zip(w)
                .map(|((&x, &y), &w)| {
                    let d = x - y;
                    w * d * d
                })
                .sum()
        };
        let (low, len) = match (reference, coarse) {
            (ModelState::Field(r), ModelState::Field(c)) => {
                (diff(r.coeffs(), c.coeffs(), &self.position), c.coeffs().len())
            }
            (ModelState::Phase(r), ModelState::Phase(c)) => {
                let vw = self.velocity.as_deref().unwrap_or(&self.position);
                let a = diff(r.position.coeffs(), c.position.coeffs(), &self.position);
                let b = diff(r.velocity.coeffs(), c.velocity.coeffs(), vw);
                (a + b, c.position.coeffs().len())
            }
            _ => return T::infinity(),
        };
        let tail = self.prefix[self.prefix.len() - 1] - self.prefix[len];
        low + tail.max(T::zero())
    }
}

/// Per-thread state: one integrator per resolution plus accumulators.
#[derive(Clone)]
struct Worker<T: Scalar> {
    reference: GalerkinIntegrator<T>,
    coarse: Vec<GalerkinIntegrator<T>>,
    kernel: DistanceKernel<T>,
    ref_acc: Vec<FunctionalAccumulator<T>>,
    acc: Vec<Vec<FunctionalAccumulator<T>>>,
}

struct PathRecord {
    strong: Vec<f64>,
    weak: Vec<Vec<f64>>,
    reference: Vec<f64>,
}

impl<T: Scalar> Worker<T> {
    fn new(
        model: &ModelSpec,
        resolutions: &[usize],
        n_ref: usize,
        functionals: &[TestFunctional],
        config: &SolverConfig,
    ) -> Result<Self, EstimatorError> {
        let reference = GalerkinIntegrator::new(model, n_ref, config)?;
        let coarse = resolutions
            .iter()
            .map(|&n| GalerkinIntegrator::new(model, n, config))
            .collect::<Result<Vec<_>, _>>()?;
        let mk = || -> Result<Vec<FunctionalAccumulator<T>>, EstimatorError> {
            functionals
                .iter()
                .map(|f| FunctionalAccumulator::new(f, model.horizon, config.m_steps))
                .collect()
        };
        let ref_acc = mk()?;
        let acc = resolutions.iter().map(|_| mk()).collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            kernel: DistanceKernel::new(reference.state(), model.s),
            reference,
            coarse,
            ref_acc,
            acc,
        })
    }

    fn observe(&mut self, m: usize, sup: &mut [T]) {
        let r = self.reference.state();
        self.kernel.prepare(r);
        for (k, integ) in self.coarse.iter().enumerate() {
            let d = self.kernel.distance_sq(r, integ.state());
            if d > sup[k] {
                sup[k] = d;
            }
        }
        for a in &mut self.ref_acc {
            a.update(m, r);
        }
        for (integ, accs) in self.coarse.iter().zip(&mut self.acc) {
            for a in accs {
                a.update(m, integ.state());
            }
        }
    }

    fn run(&mut self, path: &NoisePath<T>) -> Result<PathRecord, EstimatorError> {
        self.reference.check_path(path)?;
        self.reference.reset();
        for integ in &mut self.coarse {
            integ.reset();
        }
        self.ref_acc.iter_mut().for_each(FunctionalAccumulator::reset);
        self.acc.iter_mut().flatten().for_each(FunctionalAccumulator::reset);
        let mut sup = vec![T::zero(); self.coarse.len()];
        self.observe(0, &mut sup);
        for m in 1..=self.reference.steps() {
            self.reference.advance(path)?;
            for integ in &mut self.coarse {
                integ.advance(path)?;
            }
            self.observe(m, &mut sup);
        }
        let reference: Vec<f64> = self.ref_acc.iter().map(FunctionalAccumulator::value).collect();
        let weak = (0..reference.len())
            .map(|j| self.acc.iter().map(|accs| reference[j] - accs[j].value()).collect())
            .collect();
        Ok(PathRecord {
            strong: sup.into_iter().map(|d| d.sqrt().as_f64()).collect(),
            weak,
            reference,
        })
    }
}

/// Runs `paths` coupled paths: for path `p` one noise path with seed
/// `path_seed(seed, p)` drives `u_{N_ref}` and every `u_N` in lockstep.
///
/// Paths are distributed over the rayon pool; results are collected in path
/// order so every statistic is independent of the worker count.
pub fn coupled_samples<T: Scalar>(
    model: &ModelSpec,
    resolutions: &[usize],
    n_ref: usize,
    paths: usize,
    seed: u64,
    functionals: &[TestFunctional],
    config: &SolverConfig,
) -> Result<CoupledSamples, EstimatorError> {
    check_resolutions(resolutions, n_ref)?;
    let proto = Worker::<T>::new(model, resolutions, n_ref, functionals, config)?;
    let noise_levels = proto.reference.noise_resolution();
    let steps = config.m_steps;
    let horizon = T::lit(model.horizon);
    let basis = model.basis();
    let records = (0..paths as u64)
        .into_par_iter()
        .map_init(
            || proto.clone(),
            |worker, p| {
                let path = NoisePath::sample(path_seed(seed, p), noise_levels, steps, horizon, basis)?;
                worker.run(&path)
            },
        )
        .collect::<Result<Vec<_>, _>>()?;
    let r = resolutions.len();
    let f = functionals.len();
    let mut strong = vec![Vec::with_capacity(paths); r];
    let mut weak = vec![vec![Vec::with_capacity(paths); r]; f];
    let mut reference = vec![Vec::with_capacity(paths); f];
    for rec in records {
        for (i, v) in rec.strong.into_iter().enumerate() {
            strong[i].push(v);
        }
        for (j, row) in rec.weak.into_iter().enumerate() {
            for (i, v) in row.into_iter().enumerate() {
                weak[j][i].push(v);
            }
        }
        for (j, v) in rec.reference.into_iter().enumerate() {
            reference[j].push(v);
        }
    }
    Ok(CoupledSamples {
        resolutions: resolutions.to_vec(),
        n_ref,
        steps,
        strong,
        weak,
        reference,
    })
}

/// Strong and weak reports of one coupled run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledReports {
    pub steps: usize,
    pub strong: Option<ErrorReport>,
    pub weak: Vec<ErrorReport>,
}

/// Executes a validated plan and fits every requested curve.
pub fn coupled_error_curves<T: Scalar>(
    model: &ModelSpec,
    plan: &CoupledPlan,
    config: &SolverConfig,
) -> Result<CoupledReports, EstimatorError> {
    plan.validate()?;
    let rates = predicted_rates(model)?;
    let samples = coupled_samples::<T>(
        model,
        &plan.resolutions,
        plan.n_ref,
        plan.paths,
        plan.seed,
        &plan.functionals,
        config,
    )?;
    let strong = plan.strong.then(|| {
        let used = plan.strong_paths.unwrap_or(plan.paths);
        ErrorReport::new(
            "strong".into(),
            plan.n_ref,
            samples.strong_points(used),
            rates.strong_n_exponent,
            plan.epsilon,
        )
    });
    let weak = plan
        .functionals
        .iter()
        .enumerate()
        .map(|(j, f)| {
            ErrorReport::new(
                format!("weak: {}", f.label()),
                plan.n_ref,
                samples.weak_points(j),
                rates.weak_n_exponent,
                plan.epsilon,
            )
        })
        .collect();
    Ok(CoupledReports {
        steps: samples.steps,
        strong,
        weak,
    })
}

/// `E sup_t |u_{N_ref} - u_N|_s` over a resolution sweep.
pub fn strong_error_curve<T: Scalar>(
    model: &ModelSpec,
    resolutions: &[usize],
    n_ref: usize,
    paths: usize,
    seed: u64,
    config: &SolverConfig,
) -> Result<ErrorReport, EstimatorError> {
    let plan = CoupledPlan {
        resolutions: resolutions.to_vec(),
        n_ref,
        paths,
        strong_paths: None,
        seed,
        strong: true,
        functionals: Vec::new(),
        epsilon: DEFAULT_EPSILON,
    };
    let out = coupled_error_curves::<T>(model, &plan, config)?;
    Ok(out.strong.expect("strong curve requested"))
}

/// `E[Phi(u_{N_ref}) - Phi(u_N)]` by the coupled-difference estimator.
pub fn weak_error_curve<T: Scalar>(
    model: &ModelSpec,
    functional: &TestFunctional,
    resolutions: &[usize],
    n_ref: usize,
    paths: usize,
    seed: u64,
    config: &SolverConfig,
) -> Result<ErrorReport, EstimatorError> {
    let plan = CoupledPlan {
        resolutions: resolutions.to_vec(),
        n_ref,
        paths,
        strong_paths: None,
        seed,
        strong: false,
        functionals: vec![functional.clone()],
        epsilon: DEFAULT_EPSILON,
    };
    let mut out = coupled_error_curves::<T>(model, &plan, config)?;
    Ok(out.weak.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::functional::InnerMap;
    use crate::solvers::integrate_galerkin;
    use crate::spectral::Exponent;

    #[test]
    fn kernel_matches_direct_distance() {
        let model = ModelSpec::heat_white_noise();
        let cfg = SolverConfig::with_steps(16);
        let path = NoisePath::sample(4, 32, 16, 0.5, model.basis()).unwrap();
        let a = integrate_galerkin::<f64>(&model, 32, &path, &cfg).unwrap();
        let b = integrate_galerkin::<f64>(&model, 8, &path, &cfg).unwrap();
        for s in [0.0, 0.3] {
            let mut k = DistanceKernel::new(a.state(0), s);
            for m in 0..=16 {
                k.prepare(a.state(m));
                let fast = k.distance_sq(a.state(m), b.state(m));
                let slow = crate::spectral::GridState::distance_sq_raw(a.state(m), b.state(m), s);
                assert!((fast - slow).abs() <= 1e-12 * slow.max(1e-300), "{fast} {slow}");
            }
        }
        // the engine sees the same path for seed path_seed(base, 0)
        let seed = path_seed(40, 0);
        let path = NoisePath::sample(seed, 32, 16, 0.5, model.basis()).unwrap();
        let a = integrate_galerkin::<f64>(&model, 32, &path, &cfg).unwrap();
        let b = integrate_galerkin::<f64>(&model, 8, &path, &cfg).unwrap();
        let sup = a.sup_distance(&b, Exponent::ZERO).unwrap();
        let samples = coupled_samples::<f64>(&model, &[8], 32, 1, 40, &[], &cfg).unwrap();
        assert!((samples.strong[0][0] - sup).abs() < 1e-12 * sup);
    }

    #[test]
    fn reference_resolution_gives_zero_error() {
        let model = ModelSpec::wave_white_noise();
        let cfg = SolverConfig::with_steps(32);
        let f = TestFunctional::gaussian_bump_integral(model.horizon);
        let s = coupled_samples::<f64>(&model, &[4, 16], 16, 8, 1, &[f], &cfg).unwrap();
        assert!(s.strong[1].iter().all(|&x| x == 0.0));
        assert!(s.weak[0][1].iter().all(|&x| x == 0.0));
        assert!(s.strong[0].iter().all(|&x| x > 0.0));
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let model = ModelSpec::torus_multiplicative();
        let cfg = SolverConfig::with_steps(32);
        let f = TestFunctional::FixedTime {
            phi: InnerMap::cosine(),
            t: 0.25,
        };
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| coupled_samples::<f64>(&model, &[2, 4], 8, 12, 9, &[f.clone()], &cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn plan_validation() {
        let mut plan = CoupledPlan {
            resolutions: vec![8, 16, 32],
            n_ref: 128,
            paths: 100,
            strong_paths: None,
            seed: 0,
            strong: true,
            functionals: vec![],
            epsilon: 0.05,
        };
        assert!(plan.validate().is_ok());
        plan.n_ref = 64;
        assert!(plan.validate().is_err());
        plan.n_ref = 128;
        plan.paths = 99;
        assert!(matches!(plan.validate(), Err(EstimatorError::TooFewPaths { .. })));
        plan.paths = 100;
        plan.resolutions = vec![8];
        assert!(matches!(plan.validate(), Err(EstimatorError::TooFewPoints(1))));
        plan.resolutions = vec![8, 8, 16];
        assert!(plan.validate().is_err());
    }
}
