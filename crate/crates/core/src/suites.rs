//! Named invariant panels. Each check reports a pass/fail flag with the
//! measured value so a run can be audited without rerunning it.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::estimators::{
    coupled_error_curves, coupled_samples, fit_rate, independence_diagnostic, linear_weak_error_oracle,
    mean_and_stderr, model_convolution, noise_levels, step_halving_check, CoupledPlan, EstimatorError, InnerMap,
    TestFunctional,
};
use crate::models::{Covariance, ModelSpec, Multiplier, Nonlinearity};
use crate::noise::{
    mode_normals, ou_variance, path_seed, rho_moment_oracle, sample_rho_n, tail_moment_oracle, NoisePath,
    OuPropagator,
};
use crate::solvers::{integrate_galerkin, ito_map, residual_r_n, SolverConfig};
use crate::spectral::{
    apply_group_wave, from_collocation, to_collocation, Basis, Exponent, GridState, PhaseField, SpectralField,
    Trajectory,
};

/// Outcome of one invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, measured: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            measured: measured.into(),
        }
    }

    /// `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value <= bound, format!("{value:.3e} (bound {bound:.1e})"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {}: {}", self.name, self.measured)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    SpectralProperties,
    ItoIdentities,
    NoiseStatistics,
    CommutatorOracle,
    RateBenchmarks,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::SpectralProperties,
        Suite::ItoIdentities,
        Suite::NoiseStatistics,
        Suite::CommutatorOracle,
        Suite::RateBenchmarks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SpectralProperties => "spectral-properties",
            Suite::ItoIdentities => "ito-identities",
            Suite::NoiseStatistics => "noise-statistics",
            Suite::CommutatorOracle => "commutator-oracle",
            Suite::RateBenchmarks => "rate-benchmarks",
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("unknown suite `{0}` (expected one of spectral-properties, ito-identities, noise-statistics, commutator-oracle, rate-benchmarks)")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport, EstimatorError> {
    let checks = match suite {
        Suite::SpectralProperties => spectral_properties(seed),
        Suite::ItoIdentities => ito_identities(20, seed)?,
        Suite::NoiseStatistics => {
            let mut c = vec![
                ou_variance_check(100_000, seed)?,
                coupling_bit_exact_check(seed)?,
                worker_count_check(seed)?,
                tail_moment_check(4000, seed)?,
            ];
            c.extend(linear_weak_oracle_checks(4000, seed)?);
            c.extend(independence_checks(400, seed)?);
            c.push(step_halving_check_default(seed)?);
            c
        }
        Suite::CommutatorOracle => {
            let mut c = vec![rho_decay_check(&[4, 8, 16, 32, 64, 128, 256], 0.5, 0.3)];
            c.extend(rho_monte_carlo_checks(&[8, 32], 10_000, 0.5, seed)?);
            c
        }
        Suite::RateBenchmarks => rate_benchmarks(seed)?,
    };
    Ok(SuiteReport {
        suite: suite.name().into(),
        checks,
    })
}

fn random_field(rng: &mut ChaCha8Rng, basis: Basis, n: usize, decay: f64) -> SpectralField<f64> {
    let coeffs = (0..basis.len_for(n))
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            z / (basis.level_of(i) as f64).powf(decay)
        })
        .collect();
    SpectralField::new(basis, n, coeffs).expect("length matches resolution")
}

/// Smoothing, semigroup, transform, isometry and projection identities on
/// random fields.
pub fn spectral_properties(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases = [Basis::DirichletSine, Basis::FourierTorus];
    let fields: Vec<SpectralField<f64>> = (0..20)
        .flat_map(|_| bases.map(|b| random_field(&mut rng, b, 64, 0.5)))
        .collect();

    // |e^{tA} u|_{s2} <= ((s2 - s1) / (2 e t))^{(s2 - s1) / 2} |u|_{s1}
    let mut smoothing = 0.0f64;
    let mut contraction = 0.0f64;
    for u in &fields {
        for t in [0.01, 0.1, 1.0] {
            let v = u.apply_semigroup(t).unwrap();
            for (s1, s2) in [(0.0, 1.0), (0.0, 2.0), (-1.0, 1.0), (0.5, 0.5), (0.25, 1.5)] {
                let c = if s2 == s1 {
                    1.0
                } else {
                    ((s2 - s1) / (2.0 * std::f64::consts::E * t)).powf((s2 - s1) / 2.0)
                };
                let lhs = v.hs_norm_sq_raw(s2).sqrt();
                let rhs = c * u.hs_norm_sq_raw(s1).sqrt();
                smoothing = smoothing.max(lhs / rhs);
            }
            let l1 = u.basis().eigenvalue::<f64>(0);
            contraction = contraction.max(v.hs_norm_sq_raw(0.5).sqrt() / ((-l1 * t).exp() * u.hs_norm_sq_raw(0.5).sqrt()));
        }
    }

    let mut semigroup = 0.0f64;
    let mut round_trip = 0.0f64;
    let mut parseval = 0.0f64;
    let mut pythagoras = 0.0f64;
    let mut idempotence = 0.0f64;
    let mut orthogonality = 0.0f64;
    for u in &fields {
        let a = u.apply_semigroup(0.03).unwrap().apply_semigroup(0.07).unwrap();
        let b = u.apply_semigroup(0.1).unwrap();
        semigroup = semigroup.max(a.distance_sq_raw(&b, 0.0).sqrt() / b.hs_norm_sq_raw(0.0).sqrt());

        let small = u.project(16).unwrap().resized(16);
        let values = to_collocation(&small, 64).unwrap();
        let back = from_collocation(&values, small.basis(), 16).unwrap();
        let norm = small.hs_norm_sq_raw(0.0).sqrt();
        round_trip = round_trip.max(back.distance_sq_raw(&small, 0.0).sqrt() / norm);
        if small.basis() == Basis::FourierTorus {
            let mean_sq = values.iter().map(|x| x * x).sum::<f64>() / values.len() as f64;
            parseval = parseval.max((mean_sq - norm * norm).abs() / (norm * norm));
        }

        for n in [1, 7, 33] {
            let p = u.project(n).unwrap();
            let q = u.project_complement(n).unwrap();
            for s in [0.0, 0.5, 1.0] {
                let total = u.hs_norm_sq_raw(s);
                pythagoras = pythagoras.max((p.hs_norm_sq_raw(s) + q.hs_norm_sq_raw(s) - total).abs() / total);
                let ip = p.hs_inner(&q, Exponent::new(s).unwrap()).abs() / total;
                orthogonality = orthogonality.max(ip);
            }
            idempotence = idempotence.max(p.project(n).unwrap().distance_sq_raw(&p, 0.0).sqrt());
        }
    }

    let mut isometry = 0.0f64;
    let mut group_inverse = 0.0f64;
    for _ in 0..20 {
        let x = PhaseField::new(
            random_field(&mut rng, Basis::DirichletSine, 64, 1.0),
            random_field(&mut rng, Basis::DirichletSine, 64, 0.0),
        )
        .unwrap();
        for t in [0.013, 0.5, -2.7] {
            let y = apply_group_wave(&x, t);
            for s in [0.0, 0.25, 0.5] {
                let a = x.hs_norm_sq_raw(s).sqrt();
                isometry = isometry.max((y.hs_norm_sq_raw(s).sqrt() - a).abs() / a);
            }
            let back = apply_group_wave(&y, -t);
            group_inverse = group_inverse.max(back.distance_sq_raw(&x, 0.0).sqrt() / x.hs_norm_sq_raw(0.0).sqrt());
        }
    }

    vec![
        Check::at_most("smoothing bound with explicit constant (max ratio - 1)", smoothing - 1.0, 1e-12),
        Check::at_most("contraction by exp(-lambda_1 t) (max ratio - 1)", contraction - 1.0, 1e-12),
        Check::at_most("semigroup law (relative)", semigroup, 1e-12),
        Check::at_most("transform round trip (relative)", round_trip, 1e-12),
        Check::at_most("torus Parseval (relative)", parseval, 1e-12),
        Check::at_most("projection Pythagoras (relative)", pythagoras, 1e-12),
        Check::at_most("projection orthogonality (relative)", orthogonality, 1e-12),
        Check::at_most("projection idempotence", idempotence, 0.0),
        Check::at_most("wave group isometry, s in {0, 1/4, 1/2} (relative)", isometry, 1e-12),
        Check::at_most("wave group inverse (relative)", group_inverse, 1e-12),
    ]
}

fn identity_models() -> Vec<(&'static str, ModelSpec)> {
    let mut torus = ModelSpec::torus_multiplicative();
    torus.initial.position = vec![0.5, 0.3, -0.2];
    vec![
        ("heat", ModelSpec::heat_white_noise()),
        ("torus", torus),
        ("wave", ModelSpec::wave_white_noise()),
    ]
}

/// `u = Theta(W)` and `u_N = Theta(P_N W + R_N)` over `seeds` noise paths for
/// each family, against ten times the fixed-point tolerance.
pub fn ito_identities(seeds: u64, base_seed: u64) -> Result<Vec<Check>, EstimatorError> {
    let steps = 128;
    let mut checks = Vec::new();
    for (label, model) in identity_models() {
        let n = 24;
        let cfg = SolverConfig {
            collocation_nodes: Some(4 * n),
            ..SolverConfig::with_steps(steps)
        };
        let bound = 10.0 * cfg.picard_tolerance;
        let mut worst = 0.0f64;
        for p in 0..seeds {
            let path = NoisePath::sample(path_seed(base_seed, p), noise_levels(&model, n), steps, model.horizon, model.basis())?;
            let u = integrate_galerkin(&model, n, &path, &cfg)?;
            let w = model_convolution(&model, n, &path)?;
            let theta = ito_map(&model, &w, &cfg)?;
            worst = worst.max(u.sup_distance(&theta, Exponent::ZERO)?);
        }
        checks.push(Check::at_most(
            format!("{label}: solution is the Ito map of the stochastic convolution"),
            worst,
            bound,
        ));

        let (n, d) = (8, 40);
        let cfg = SolverConfig {
            collocation_nodes: Some(4 * d),
            ..SolverConfig::with_steps(steps)
        };
        let mut worst = 0.0f64;
        for p in 0..seeds {
            let path = NoisePath::sample(
                path_seed(base_seed ^ 0x5eed, p),
                noise_levels(&model, d),
                steps,
                model.horizon,
                model.basis(),
            )?;
            let u_n = integrate_galerkin(&model, n, &path, &cfg)?;
            let r = residual_r_n(&model, &u_n, n, d, &cfg)?;
            let w_n = model_convolution(&model, n, &path)?;
            let mut states = Vec::with_capacity(steps + 1);
            for (a, b) in w_n.states().iter().zip(r.states()) {
                let mut s = a.resized(d);
                s.axpy(1.0, b)?;
                states.push(s);
            }
            let theta = ito_map(&model, &Trajectory::new(model.horizon, states)?, &cfg)?;
            worst = worst.max(u_n.map(|s| s.resized(d)).sup_distance(&theta, Exponent::ZERO)?);
        }
        checks.push(Check::at_most(
            format!("{label}: Galerkin solution is the Ito map of projected noise plus residual"),
            worst,
            bound,
        ));
    }
    Ok(checks)
}

/// Sample variance of one exactly sampled OU mode against
/// `q (1 - e^{-2 lambda t}) / (2 lambda)`, within 5 standard errors.
pub fn ou_variance_check(paths: usize, seed: u64) -> Result<Check, EstimatorError> {
    let (basis, k, t, steps) = (Basis::DirichletSine, 3usize, 0.02, 16);
    let prop = OuPropagator::<f64>::new(basis, k, t / steps as f64, Some(&[1.0, 1.0, 1.0]))?;
    let (a, sigma) = (prop.decay()[k - 1], prop.sigma()[k - 1]);
    let values: Vec<f64> = (0..paths as u64)
        .map(|p| mode_normals(path_seed(seed, p), k - 1, steps).fold(0.0, |z, xi| a * z + sigma * xi))
        .collect();
    let squares: Vec<f64> = values.iter().map(|z| z * z).collect();
    let (var, se) = mean_and_stderr(&squares);
    let exact = ou_variance(basis.eigenvalue(k - 1), 1.0, t);
    let z = (var - exact) / se;
    Ok(Check::new(
        format!("single-mode convolution variance, {paths} paths"),
        z.abs() <= 5.0,
        format!("{var:.6e} vs {exact:.6e} ({z:+.2} SE)"),
    ))
}

/// Increments of a path agree bit for bit with those of a path with more
/// modes.
pub fn coupling_bit_exact_check(seed: u64) -> Result<Check, EstimatorError> {
    let mut ok = true;
    for basis in [Basis::DirichletSine, Basis::FourierTorus] {
        let small = NoisePath::<f64>::sample(seed, 8, 64, 0.5, basis)?;
        let large = NoisePath::<f64>::sample(seed, 512, 64, 0.5, basis)?;
        ok &= (0..small.rows()).all(|k| small.mode_row(k) == large.mode_row(k));
    }
    Ok(Check::new(
        "coupling bit-exact across n_modes (8 vs 512)",
        ok,
        if ok { "identical" } else { "differs" },
    ))
}

/// A coupled run gives identical samples on 1 and 4 worker threads.
pub fn worker_count_check(seed: u64) -> Result<Check, EstimatorError> {
    let model = ModelSpec::torus_multiplicative();
    let cfg = SolverConfig::with_steps(64);
    let f = [TestFunctional::gaussian_bump_integral(model.horizon)];
    let run = |threads: usize| -> Result<_, EstimatorError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| EstimatorError::Resolutions(e.to_string()))?;
        pool.install(|| coupled_samples::<f64>(&model, &[2, 4, 8], 16, 24, seed, &f, &cfg))
    };
    let ok = run(1)? == run(4)?;
    Ok(Check::new(
        "coupling bit-exact across worker counts (1 vs 4)",
        ok,
        if ok { "identical" } else { "differs" },
    ))
}

/// `E|u_{N_ref}(t) - u_N(t)|_s^2` for `F = 0` against the tail sums.
pub fn tail_moment_check(paths: usize, seed: u64) -> Result<Check, EstimatorError> {
    let mut model = ModelSpec::heat_white_noise();
    model.nonlinearity = Nonlinearity::Zero;
    let (n, n_ref, steps, s) = (4, 64, 64, 0.0);
    let m = steps / 2;
    let t = model.horizon * m as f64 / steps as f64;
    let cfg = SolverConfig::with_steps(steps);
    let mut sq = Vec::with_capacity(paths);
    for p in 0..paths as u64 {
        let path = NoisePath::sample(path_seed(seed, p), n_ref, steps, model.horizon, model.basis())?;
        let a = integrate_galerkin(&model, n_ref, &path, &cfg)?;
        let b = integrate_galerkin(&model, n, &path, &cfg)?;
        sq.push(a.state(m).distance_sq_raw(b.state(m), s));
    }
    let (est, se) = mean_and_stderr(&sq);
    let k_max = 1 << 20;
    let oracle = tail_moment_oracle(&model.covariance, model.basis(), n, t, s, k_max)?.value
        - tail_moment_oracle(&model.covariance, model.basis(), n_ref, t, s, k_max)?.value;
    let z = (est - oracle) / se;
    Ok(Check::new(
        format!("tail moment oracle vs Monte Carlo (N = {n}, N_ref = {n_ref}, t = {t})"),
        z.abs() <= 5.0,
        format!("{est:.6e} vs {oracle:.6e} ({z:+.2} SE)"),
    ))
}

/// Linear heat model: coupled weak errors against the Gaussian closed forms,
/// within 3 standard errors.
pub fn linear_weak_oracle_checks(paths: usize, seed: u64) -> Result<Vec<Check>, EstimatorError> {
    let mut model = ModelSpec::heat_white_noise();
    model.nonlinearity = Nonlinearity::Zero;
    let steps = 128;
    let cfg = SolverConfig::with_steps(steps);
    let (resolutions, n_ref) = ([1usize, 2, 4, 8], 32);
    let first_mode = TestFunctional::TimeIntegral {
        phi: InnerMap::CosineFunctional { probe: Some(vec![1.0]) },
        t1: 0.0,
        t2: model.horizon,
    };
    let bump = TestFunctional::FixedTime {
        phi: InnerMap::GaussianBump,
        t: model.horizon,
    };
    let cosine = TestFunctional::FixedTime {
        phi: InnerMap::cosine(),
        t: model.horizon,
    };
    let functionals = [first_mode, bump, cosine];
    let samples = coupled_samples::<f64>(&model, &resolutions, n_ref, paths, seed, &functionals, &cfg)?;
    let mut checks = Vec::new();
    for (j, f) in functionals.iter().enumerate() {
        let mut worst = 0.0f64;
        let mut detail = String::new();
        for (i, &n) in resolutions.iter().enumerate() {
            let (est, se) = mean_and_stderr(&samples.weak[j][i]);
            let oracle = linear_weak_error_oracle(&model, f, n, n_ref, steps)?;
            let z = if se > 0.0 {
                (est - oracle).abs() / se
            } else if (est - oracle).abs() <= 1e-14 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
            detail.push_str(&format!(" N={n}: {est:.3e}/{oracle:.3e}"));
        }
        checks.push(Check::new(
            format!("linear weak error vs Gaussian oracle, {}", f.label()),
            worst <= 3.0,
            format!("max {worst:.2} SE;{detail}"),
        ));
    }
    Ok(checks)
}

/// Directional derivative of `Phi o Theta` along the unresolved noise.
pub fn independence_checks(paths: usize, seed: u64) -> Result<Vec<Check>, EstimatorError> {
    let cfg = SolverConfig::with_steps(64);
    let heat = ModelSpec::heat_white_noise();
    let f = TestFunctional::TimeIntegral {
        phi: InnerMap::cosine(),
        t1: 0.0,
        t2: heat.horizon,
    };
    let mut out = Vec::new();
    let r = independence_diagnostic::<f64>(&heat, &f, 4, 16, paths, seed, &cfg)?;
    out.push(Check::new(
        "independence diagnostic null, heat (commuting)",
        r.is_null(3.0),
        format!("{:.3e} +/- {:.1e}", r.estimate, r.stderr),
    ));
    let mut constant = ModelSpec::torus_multiplicative();
    constant.covariance = Covariance::Multiplication(Multiplier::constant(1.5));
    constant.initial.position = vec![0.2, 0.4];
    let r = independence_diagnostic::<f64>(&constant, &f, 3, 12, paths, seed, &cfg)?;
    out.push(Check::new(
        "independence diagnostic null, torus with constant b",
        r.is_null(3.0),
        format!("{:.3e} +/- {:.1e}", r.estimate, r.stderr),
    ));
    let mut cosine = ModelSpec::torus_multiplicative();
    cosine.initial.position = vec![0.2, 0.4];
    let r = independence_diagnostic::<f64>(&cosine, &f, 3, 12, paths, seed, &cfg)?;
    out.push(Check::new(
        "independence diagnostic, torus with b = 2 + cos (observational)",
        true,
        format!("{:.3e} +/- {:.1e}", r.estimate, r.stderr),
    ));
    Ok(out)
}

/// Step doubling moves the strong statistic by less than 10%.
pub fn step_halving_check_default(seed: u64) -> Result<Check, EstimatorError> {
    let model = ModelSpec::heat_white_noise();
    let r = step_halving_check::<f64>(&model, 8, 100, seed, 0.1, 2, &SolverConfig::with_steps(256))?;
    Ok(Check::new(
        "step-halving stability (< 10% change)",
        r.max_change() < 0.1,
        format!("steps {:?}, changes {:?}", r.steps, r.changes.iter().map(|c| format!("{c:.3}")).collect::<Vec<_>>()),
    ))
}

/// Slope of `log E|rho_N(T)|_s^2` against `log lambda_N`.
pub fn rho_decay_check(ns: &[usize], horizon: f64, tolerance: f64) -> Check {
    let b = Multiplier::default_cosine();
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| (Basis::FourierTorus.eigenvalue_of_wavenumber::<f64>(n), rho_moment_oracle(&b, n, horizon, 0.0)))
        .collect();
    match fit_rate(&pts) {
        Ok(fit) => Check::new(
            "commutator moment decay in lambda_N",
            fit.slope <= -(1.0 - tolerance),
            format!("slope {:.4} (bound {:.2})", fit.slope, -(1.0 - tolerance)),
        ),
        Err(e) => Check::new("commutator moment decay in lambda_N", false, e.to_string()),
    }
}

/// Monte Carlo `E|rho_N(T)|_0^2` against the closed form, within 5 standard
/// errors.
pub fn rho_monte_carlo_checks(ns: &[usize], paths: usize, horizon: f64, seed: u64) -> Result<Vec<Check>, EstimatorError> {
    let b = Multiplier::default_cosine();
    let steps = 32;
    let mut out = Vec::new();
    for &n in ns {
        let sq: Vec<f64> = (0..paths as u64)
            .map(|p| -> Result<f64, EstimatorError> {
                let rho = sample_rho_n::<f64>(path_seed(seed, p), &b, n, steps, horizon)?;
                Ok(rho.last().hs_norm_sq_raw(0.0))
            })
            .collect::<Result<_, _>>()?;
        let (est, se) = mean_and_stderr(&sq);
        let oracle = rho_moment_oracle(&b, n, horizon, 0.0);
        let z = (est - oracle) / se;
        out.push(Check::new(
            format!("commutator moment, Monte Carlo vs oracle (N = {n}, {paths} paths)"),
            z.abs() <= 5.0,
            format!("{est:.6e} vs {oracle:.6e} ({z:+.2} SE)"),
        ));
    }
    Ok(out)
}

/// Desk-scale rate runs: fitted decay at least the predicted exponent minus
/// the slack, weak slope at least 0.5 below strong, and weak CI below the
/// strong slope.
pub fn rate_benchmarks(seed: u64) -> Result<Vec<Check>, EstimatorError> {
    let cfg = SolverConfig::with_steps(512);
    let mut checks = Vec::new();
    let mut colored = ModelSpec::heat_white_noise();
    colored.covariance = Covariance::Diagonal { exponent: 0.25 };
    for (label, model) in [("heat", ModelSpec::heat_white_noise()), ("colored heat", colored)] {
        let plan = CoupledPlan {
            resolutions: vec![4, 8, 16, 32],
            n_ref: 128,
            paths: 200,
            strong_paths: None,
            seed,
            strong: true,
            functionals: vec![TestFunctional::gaussian_bump_integral(model.horizon)],
            epsilon: 0.05,
        };
        let out = coupled_error_curves::<f64>(&model, &plan, &cfg)?;
        let strong = out.strong.expect("strong requested");
        let weak = &out.weak[0];
        for r in [&strong, weak] {
            checks.push(Check::new(
                format!("{label}: {} decays at least N^-({:.2} - eps)", r.quantity, r.predicted_exponent),
                r.meets_prediction() == Some(true),
                format!("slope {:?}", r.slope()),
            ));
        }
        let ok = match (&strong.fit, &weak.fit) {
            (Some(s), Some(w)) => w.ci_high < s.slope,
            _ => false,
        };
        let gap = match (strong.slope(), weak.slope()) {
            (Some(s), Some(w)) => s - w,
            _ => f64::NAN,
        };
        checks.push(Check::new(
            format!("{label}: weak slope at most strong slope - 0.5"),
            gap >= 0.5,
            format!("strong minus weak {gap:.3}"),
        ));
        checks.push(Check::new(
            format!("{label}: weak slope CI below strong slope"),
            ok,
            format!("strong {:?}, weak {:?}", strong.slope(), weak.fit.as_ref().map(|f| (f.ci_low, f.ci_high))),
        ));
    }
    Ok(checks)
}
