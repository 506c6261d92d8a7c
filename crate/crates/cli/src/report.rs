use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use spde_galerkin::estimators::{ErrorPoint, ErrorReport, RateFit};
use spde_galerkin::suites::{Check, SuiteReport};

use crate::config::{ExperimentConfig, OutputFormat};
use crate::CliError;

/// Fitted slope as written to reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Residual sum of squares of the log-log fit.
    pub residual: f64,
    pub points_used: usize,
}

impl From<&RateFit> for Slope {
    fn from(f: &RateFit) -> Self {
        Self {
            value: f.slope,
            ci_low: f.ci_low,
            ci_high: f.ci_high,
            residual: f.residual,
            points_used: f.points_used,
        }
    }
}

impl Slope {
    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Slopes this much steeper than predicted are flagged. Upper bounds are
/// not claimed to be sharp, so the flag never fails a run.
pub const STEEPER_MARGIN: f64 = 0.25;

/// One estimated quantity, self-contained: the resolved config and seed
/// reproduce it. `runtime_seconds` is the only field that varies between
/// identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityReport {
    pub config: ExperimentConfig,
    pub quantity: String,
    /// Variable the slope is fitted against: `"N"` or `"lambda_N"`.
    pub abscissa: String,
    pub points: Vec<ErrorPoint>,
    pub slope: Option<Slope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub predicted_exponent: f64,
    pub epsilon: f64,
    /// `-slope >= predicted_exponent - epsilon`.
    pub meets_prediction: Option<bool>,
    pub steeper_than_predicted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ref: Option<usize>,
    pub m_steps: usize,
    /// Closed-form values per point, when an oracle exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<f64>>,
    pub seed: u64,
    pub runtime_seconds: f64,
}

impl QuantityReport {
    pub fn from_error_report(config: &ExperimentConfig, r: &ErrorReport, m_steps: usize) -> Self {
        let slope = r.fit.as_ref().map(Slope::from);
        let steeper = slope
            .as_ref()
            .is_some_and(|s| -s.value > r.predicted_exponent + STEEPER_MARGIN);
        Self {
            config: config.clone(),
            quantity: r.quantity.clone(),
            abscissa: "N".into(),
            points: r.points.clone(),
            slope,
            fit_error: r.fit_error.clone(),
            predicted_exponent: r.predicted_exponent,
            epsilon: r.epsilon,
            meets_prediction: r.meets_prediction(),
            steeper_than_predicted: steeper,
            n_ref: Some(r.n_ref),
            m_steps,
            oracle: None,
            seed: config.seed(),
            runtime_seconds: 0.0,
        }
    }

    pub fn slope_value(&self) -> Option<f64> {
        self.slope.as_ref().map(|s| s.value)
    }

    /// One summary line for the terminal.
    pub fn summary(&self) -> String {
        let fit = match &self.slope {
            Some(s) => format!("slope {:.4} [{:.4}, {:.4}]", s.value, s.ci_low, s.ci_high),
            None => format!("no fit ({})", self.fit_error.as_deref().unwrap_or("unknown")),
        };
        let verdict = match self.meets_prediction {
            Some(true) => "meets prediction",
            Some(false) => "BELOW prediction",
            None => "unchecked",
        };
        let flag = if self.steeper_than_predicted { ", steeper than predicted" } else { "" };
        format!(
            "{}: {fit} in {}, predicted -{:.3} (eps {}): {verdict}{flag}",
            self.quantity, self.abscissa, self.predicted_exponent, self.epsilon
        )
    }
}

/// A suite run with its resolved config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub config: ExperimentConfig,
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub seed: u64,
    pub runtime_seconds: f64,
}

impl SuiteRecord {
    pub fn new(config: &ExperimentConfig, report: SuiteReport, runtime_seconds: f64) -> Self {
        Self {
            config: config.clone(),
            passed: report.passed(),
            suite: report.suite,
            checks: report.checks,
            seed: config.seed(),
            runtime_seconds,
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    quantity: &'a str,
    #[serde(rename = "N")]
    n: usize,
    estimate: f64,
    stderr: f64,
    paths: usize,
    censored: bool,
}

/// Lower-case, `[a-z0-9.]` runs joined by `-`.
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() || c == '.' {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn unique(name: String, seen: &mut HashSet<String>) -> String {
    let mut candidate = name.clone();
    let mut k = 2;
    while !seen.insert(candidate.clone()) {
        candidate = format!("{name}-{k}");
        k += 1;
    }
    candidate
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes one JSON file per quantity and suite, plus one CSV of all points.
pub fn write_reports(
    config: &ExperimentConfig,
    quantities: &[QuantityReport],
    suites: &[SuiteRecord],
) -> Result<Vec<PathBuf>, CliError> {
    let dir = &config.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.clone(),
        source: e,
    })?;
    let base = slug(&config.name);
    let mut seen = HashSet::new();
    let mut written = Vec::new();
    let json = config.output.format != OutputFormat::Csv;
    let csv = config.output.format != OutputFormat::Json;
    if json {
        for q in quantities {
            let name = unique(format!("{base}.{}", slug(&q.quantity)), &mut seen);
            let path = dir.join(format!("{name}.json"));
            write_json(&path, q)?;
            written.push(path);
        }
    }
    // Suites have no per-N points, so they are always written as JSON.
    for s in suites {
        let name = unique(format!("{base}.{}", slug(&s.suite)), &mut seen);
        let path = dir.join(format!("{name}.json"));
        write_json(&path, s)?;
        written.push(path);
    }
    if csv && !quantities.is_empty() {
        let path = dir.join(format!("{base}.csv"));
        let io = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        for q in quantities {
            for p in &q.points {
                w.serialize(CsvRow {
                    quantity: &q.quantity,
                    n: p.n,
                    estimate: p.estimate,
                    stderr: p.stderr,
                    paths: p.paths,
                    censored: p.censored,
                })
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("weak: int[0,0.5] gaussian-bump"), "weak-int-0-0.5-gaussian-bump");
        assert_eq!(slug("Strong"), "strong");
        let mut seen = HashSet::new();
        assert_eq!(unique("a".into(), &mut seen), "a");
        assert_eq!(unique("a".into(), &mut seen), "a-2");
    }
}
