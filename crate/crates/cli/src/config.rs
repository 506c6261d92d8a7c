use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use spde_galerkin::estimators::{CoupledPlan, TestFunctional, DEFAULT_EPSILON, MIN_PATHS};
use spde_galerkin::models::{Covariance, Family, InitialCondition, ModelSpec, Multiplier, Nonlinearity};
use spde_galerkin::solvers::{SolverConfig, StepPolicy};
use spde_galerkin::suites::Suite;

use crate::CliError;

/// What an experiment file asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Coupled strong and weak error curves with rate fits.
    Rates,
    /// Commutator second moments: closed form over a sweep plus Monte Carlo
    /// cross-checks.
    Commutator,
    /// One or more named invariant panels.
    Suite,
}

/// A complete experiment definition, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization: Option<DiscretizationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation: Option<EstimationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commutator: Option<CommutatorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub family: Family,
    pub covariance: Covariance,
    pub nonlinearity: Nonlinearity,
    pub s: f64,
    /// Initial regularity; omit for smooth data.
    #[serde(default, rename = "s_0", skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default, rename = "gamma")]
    pub damping: f64,
    #[serde(default)]
    pub initial: InitialCondition,
}

impl ModelBlock {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            family: self.family,
            nonlinearity: self.nonlinearity,
            covariance: self.covariance.clone(),
            initial: self.initial.clone(),
            s0: self.s0,
            damping: self.damping,
            horizon: self.horizon,
            s: self.s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationBlock {
    pub resolutions: Vec<usize>,
    #[serde(rename = "N_ref")]
    pub n_ref: usize,
    #[serde(rename = "M_steps")]
    pub m_steps: usize,
    #[serde(default = "fixed_policy")]
    pub step_policy: StepPolicy,
    /// Collocation nodes for the nonlinearity; default `4 N` per resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collocation_nodes: Option<usize>,
}

fn fixed_policy() -> StepPolicy {
    StepPolicy::Fixed
}

impl DiscretizationBlock {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            m_steps: self.m_steps,
            step_policy: self.step_policy,
            collocation_nodes: self.collocation_nodes,
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationBlock {
    #[serde(rename = "M_paths")]
    pub paths: usize,
    /// Strong errors use this many leading paths (all when omitted).
    #[serde(default, skip_serializing_if = "Option::is_none")]
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

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorBlock {
    #[serde(default = "Multiplier::default_cosine")]
    pub multiplier: Multiplier,
    /// Sweep for the closed-form moment.
    pub resolutions: Vec<usize>,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub s: f64,
    /// Required decay: fitted slope in `lambda_N` at most `-(1 - tolerance)`.
    pub tolerance: f64,
    /// Resolutions for the Monte Carlo cross-check.
    #[serde(default)]
    pub mc_resolutions: Vec<usize>,
    #[serde(rename = "M_paths", default)]
    pub paths: usize,
    #[serde(rename = "M_steps", default = "default_rho_steps")]
    pub m_steps: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_rho_steps() -> usize {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteBlock {
    pub names: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_dir() -> PathBuf {
    PathBuf::from("reports")
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            format: OutputFormat::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.message().to_string()))
    }

    /// Applies overrides. A path override also caps `strong_paths`.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            if let Some(e) = &mut self.estimation {
                e.seed = seed;
            }
            if let Some(c) = &mut self.commutator {
                c.seed = seed;
            }
            if let Some(s) = &mut self.suite {
                s.seed = seed;
            }
        }
        if let Some(paths) = o.paths {
            if let Some(e) = &mut self.estimation {
                e.paths = paths;
                e.strong_paths = e.strong_paths.map(|s| s.min(paths));
            }
            if let Some(c) = &mut self.commutator {
                c.paths = paths;
            }
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
    }

    /// The seed that reproduces the run.
    pub fn seed(&self) -> u64 {
        match self.kind {
            ExperimentKind::Rates => self.estimation.as_ref().map_or(0, |e| e.seed),
            ExperimentKind::Commutator => self.commutator.as_ref().map_or(0, |c| c.seed),
            ExperimentKind::Suite => self.suite.as_ref().map_or(0, |s| s.seed),
        }
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.kind {
            ExperimentKind::Rates => {
                let (model, disc, est) = self.rates_blocks()?;
                model.spec().validate().map_err(|e| match e {
                    spde_galerkin::models::ModelError::Inadmissible { rule } => CliError::Inadmissible(rule),
                    other => CliError::Invalid(other.to_string()),
                })?;
                disc.solver().validate().map_err(|e| CliError::Invalid(e.to_string()))?;
                plan(disc, est).validate().map_err(|e| CliError::Invalid(e.to_string()))?;
                for f in &est.functionals {
                    f.weights(model.horizon, disc.m_steps)
                        .map_err(|e| CliError::Invalid(e.to_string()))?;
                }
                if !est.strong && est.functionals.is_empty() {
                    return Err(CliError::Invalid("nothing to estimate: strong = false and no functionals".into()));
                }
                Ok(())
            }
            ExperimentKind::Commutator => {
                let c = self.commutator.as_ref().ok_or(CliError::MissingBlock("commutator"))?;
                c.multiplier.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
                if c.resolutions.len() < 3 {
                    return Err(CliError::Invalid(format!(
                        "a rate fit needs at least 3 resolutions, got {}",
                        c.resolutions.len()
                    )));
                }
                if c.resolutions.contains(&0) || c.mc_resolutions.contains(&0) {
                    return Err(CliError::Invalid("resolutions must be positive".into()));
                }
                if !(c.horizon > 0.0) {
                    return Err(CliError::Inadmissible("T > 0".into()));
                }
                if !c.mc_resolutions.is_empty() && c.paths < MIN_PATHS {
                    return Err(CliError::Invalid(format!(
                        "at least {MIN_PATHS} Monte Carlo paths are required, got {}",
                        c.paths
                    )));
                }
                if c.m_steps == 0 {
                    return Err(CliError::Invalid("M_steps >= 1".into()));
                }
                Ok(())
            }
            ExperimentKind::Suite => {
                let s = self.suite.as_ref().ok_or(CliError::MissingBlock("suite"))?;
                if s.names.is_empty() {
                    return Err(CliError::Invalid("suite.names is empty".into()));
                }
                for n in &s.names {
                    n.parse::<Suite>().map_err(|e| CliError::Invalid(e.to_string()))?;
                }
                Ok(())
            }
        }
    }

    pub(crate) fn rates_blocks(&self) -> Result<(&ModelBlock, &DiscretizationBlock, &EstimationBlock), CliError> {
        Ok((
            self.model.as_ref().ok_or(CliError::MissingBlock("model"))?,
            self.discretization.as_ref().ok_or(CliError::MissingBlock("discretization"))?,
            self.estimation.as_ref().ok_or(CliError::MissingBlock("estimation"))?,
        ))
    }
}

pub(crate) fn plan(disc: &DiscretizationBlock, est: &EstimationBlock) -> CoupledPlan {
    CoupledPlan {
        resolutions: disc.resolutions.clone(),
        n_ref: disc.n_ref,
        paths: est.paths,
        strong_paths: est.strong_paths,
        seed: est.seed,
        strong: est.strong,
        functionals: est.functionals.clone(),
        epsilon: est.epsilon,
    }
}
