use std::path::PathBuf;
use std::time::Instant;

use spde_galerkin::estimators::{
    coupled_error_curves, fit_rate, mean_and_stderr, step_halving_check, ErrorPoint, EstimatorError, MIN_PATHS,
};
use spde_galerkin::noise::{path_seed, rho_moment_oracle, sample_rho_n};
use spde_galerkin::solvers::{SolverConfig, StepPolicy};
use spde_galerkin::spectral::Basis;
use spde_galerkin::suites::{run_suite, Suite};

use crate::config::{plan, CommutatorBlock, ExperimentConfig, ExperimentKind};
use crate::report::{write_reports, QuantityReport, Slope, SuiteRecord};
use crate::CliError;

/// Everything a run produced.
#[derive(Clone, Debug, Default)]
pub struct RunOutcome {
    pub quantities: Vec<QuantityReport>,
    pub suites: Vec<SuiteRecord>,
    /// Human-readable lines, one per finding.
    pub summary: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn quantity(&self, name: &str) -> Option<&QuantityReport> {
        self.quantities.iter().find(|q| q.quantity == name)
    }

    /// False only when a suite check failed.
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

/// Validates and executes `config` without touching the file system.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let start = Instant::now();
    let mut out = match config.kind {
        ExperimentKind::Rates => rates(config)?,
        ExperimentKind::Commutator => commutator(config, config.commutator.as_ref().expect("validated"))?,
        ExperimentKind::Suite => suites(config)?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    for q in &mut out.quantities {
        q.runtime_seconds = elapsed;
    }
    Ok(out)
}

/// `execute` followed by writing the reports to `config.output.dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let mut out = execute(config)?;
    out.files = write_reports(config, &out.quantities, &out.suites)?;
    Ok(out)
}

fn rates(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let (model_block, disc, est) = config.rates_blocks()?;
    let model = model_block.spec();
    let mut solver = disc.solver();
    let mut summary = Vec::new();
    if let StepPolicy::HalveUntilStable {
        tolerance,
        max_halvings,
    } = disc.step_policy
    {
        let n = *disc.resolutions.last().expect("validated");
        let r = step_halving_check::<f64>(&model, n, est.paths.min(MIN_PATHS), est.seed, tolerance, max_halvings, &solver)?;
        let chosen = r.accepted.unwrap_or(*r.steps.last().expect("at least one level"));
        summary.push(format!(
            "step halving at N = {n}: steps {:?}, changes {:?}, using M_steps = {chosen}{}",
            r.steps,
            r.changes,
            if r.accepted.is_none() { " (not stabilized)" } else { "" }
        ));
        solver = SolverConfig {
            m_steps: chosen,
            ..solver
        };
    }
    let out = coupled_error_curves::<f64>(&model, &plan(disc, est), &solver)?;
    let mut quantities = Vec::new();
    if let Some(s) = &out.strong {
        quantities.push(QuantityReport::from_error_report(config, s, out.steps));
    }
    for w in &out.weak {
        quantities.push(QuantityReport::from_error_report(config, w, out.steps));
    }
    for q in &quantities {
        summary.push(q.summary());
    }
    if let Some(strong) = out.strong.as_ref().and_then(|s| s.slope()) {
        for w in &out.weak {
            if let Some(f) = &w.fit {
                summary.push(format!(
                    "{}: CI [{:.4}, {:.4}] {} the strong slope {strong:.4}; strong minus weak {:.3} ({} 0.5)",
                    w.quantity,
                    f.ci_low,
                    f.ci_high,
                    if f.ci_contains(strong) { "contains" } else { "excludes" },
                    strong - f.slope,
                    if strong - f.slope >= 0.5 { ">=" } else { "<" }
                ));
            }
        }
    }
    Ok(RunOutcome {
        quantities,
        summary,
        ..RunOutcome::default()
    })
}

fn commutator(config: &ExperimentConfig, c: &CommutatorBlock) -> Result<RunOutcome, CliError> {
    let lambda = |n: usize| Basis::FourierTorus.eigenvalue_of_wavenumber::<f64>(n);
    let oracle: Vec<f64> = c
        .resolutions
        .iter()
        .map(|&n| rho_moment_oracle(&c.multiplier, n, c.horizon, c.s))
        .collect();
    let pts: Vec<(f64, f64)> = c.resolutions.iter().zip(&oracle).map(|(&n, &v)| (lambda(n), v)).collect();
    let (slope, fit_error) = match fit_rate(&pts) {
        Ok(f) => (Some(Slope::from(&f)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let bound = -(1.0 - c.tolerance);
    let closed = QuantityReport {
        config: config.clone(),
        quantity: "commutator moment: closed form".into(),
        abscissa: "lambda_N".into(),
        points: c
            .resolutions
            .iter()
            .zip(&oracle)
            .map(|(&n, &v)| ErrorPoint {
                n,
                estimate: v,
                stderr: 0.0,
                paths: 0,
                censored: false,
            })
            .collect(),
        meets_prediction: slope.as_ref().map(|s| s.value <= bound),
        steeper_than_predicted: false,
        slope,
        fit_error,
        predicted_exponent: 1.0,
        epsilon: c.tolerance,
        n_ref: None,
        m_steps: 0,
        oracle: Some(oracle),
        seed: c.seed,
        runtime_seconds: 0.0,
    };
    let mut summary = vec![closed.summary()];
    let mut quantities = vec![closed];
    if !c.mc_resolutions.is_empty() {
        let mut points = Vec::new();
        let mut oracle = Vec::new();
        for &n in &c.mc_resolutions {
            let sq = (0..c.paths as u64)
                .map(|p| -> Result<f64, EstimatorError> {
                    let rho = sample_rho_n::<f64>(path_seed(c.seed, p), &c.multiplier, n, c.m_steps, c.horizon)?;
                    Ok(rho.last().hs_norm_sq_raw(c.s))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (est, se) = mean_and_stderr(&sq);
            let exact = rho_moment_oracle(&c.multiplier, n, c.horizon, c.s);
            summary.push(format!(
                "commutator moment at N = {n}: Monte Carlo {est:.6e} +/- {se:.1e}, closed form {exact:.6e} ({:+.2} SE)",
                (est - exact) / se
            ));
            points.push(ErrorPoint {
                n,
                estimate: est,
                stderr: se,
                paths: c.paths,
                censored: est.abs() < 2.0 * se,
            });
            oracle.push(exact);
        }
        quantities.push(QuantityReport {
            config: config.clone(),
            quantity: "commutator moment: monte carlo".into(),
            abscissa: "lambda_N".into(),
            points,
            slope: None,
            fit_error: None,
            predicted_exponent: 1.0,
            epsilon: c.tolerance,
            meets_prediction: None,
            steeper_than_predicted: false,
            n_ref: None,
            m_steps: c.m_steps,
            oracle: Some(oracle),
            seed: c.seed,
            runtime_seconds: 0.0,
        });
    }
    Ok(RunOutcome {
        quantities,
        summary,
        ..RunOutcome::default()
    })
}

fn suites(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let block = config.suite.as_ref().expect("validated");
    let mut out = RunOutcome::default();
    for name in &block.names {
        let suite: Suite = name.parse().map_err(|e: spde_galerkin::suites::UnknownSuite| CliError::Invalid(e.to_string()))?;
        let start = Instant::now();
        let report = run_suite(suite, block.seed)?;
        let record = SuiteRecord::new(config, report, start.elapsed().as_secs_f64());
        out.summary.push(format!("suite {}", record.suite));
        out.summary.extend(record.checks.iter().map(|c| c.to_string()));
        out.suites.push(record);
    }
    Ok(out)
}
