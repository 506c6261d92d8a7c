use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::EstimatorError;

/// Per-resolution Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPoint {
    #[serde(rename = "N")]
    pub n: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub paths: usize,
    /// Excluded from the slope fit because `|estimate| < 2 stderr`.
    pub censored: bool,
}

/// Least-squares fit of `log value = intercept + slope log N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual sum of squares in log space.
    pub residual: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points_used: usize,
}

impl RateFit {
    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Confidence level of reported slope intervals.
pub const CONFIDENCE: f64 = 0.95;

/// Estimates over a resolution sweep with the fitted rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub quantity: String,
    pub n_ref: usize,
    pub points: Vec<ErrorPoint>,
    pub fit: Option<RateFit>,
    /// Why the fit is missing, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    /// Predicted decay exponent in `N` (the slope should be near its negative).
    pub predicted_exponent: f64,
    pub epsilon: f64,
}

impl ErrorReport {
    /// Builds the report and fits the uncensored points on `|estimate|`.
    pub fn new(quantity: String, n_ref: usize, points: Vec<ErrorPoint>, predicted_exponent: f64, epsilon: f64) -> Self {
        let data: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| !p.censored)
            .map(|p| (p.n as f64, p.estimate.abs()))
            .collect();
        let (fit, fit_error) = match fit_rate(&data) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            quantity,
            n_ref,
            points,
            fit,
            fit_error,
            predicted_exponent,
            epsilon,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.slope)
    }

    pub fn censored_count(&self) -> usize {
        self.points.iter().filter(|p| p.censored).count()
    }

    /// `|estimate|` is non-increasing in `N` up to `k` combined standard
    /// errors.
    pub fn is_monotone(&self, k: f64) -> bool {
        self.points.windows(2).all(|w| {
            let slack = k * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            w[1].estimate.abs() <= w[0].estimate.abs() + slack
        })
    }

    /// The fitted decay is at least the predicted exponent minus the slack.
    pub fn meets_prediction(&self) -> Option<bool> {
        self.slope().map(|s| -s >= self.predicted_exponent - self.epsilon)
    }
}

/// Mean and CLT standard error of a sample.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Pairwise (cascade) summation. The result depends only on the order of
/// `xs`, never on how the terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Ordinary least squares on `(log N, log value)` with a Student-t interval
/// for the slope.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit, EstimatorError> {
    if points.len() < 3 {
        return Err(EstimatorError::TooFewPoints(points.len()));
    }
    for &(n, v) in points {
        if !(n > 0.0 && v > 0.0 && v.is_finite()) {
            return Err(EstimatorError::NonPositive { n, value: v });
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(EstimatorError::Resolutions("fit needs at least two distinct N".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = k - 2.0;
    let stderr = (residual / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| EstimatorError::Resolutions(e.to_string()))?
        .inverse_cdf(0.5 + CONFIDENCE / 2.0);
    Ok(RateFit {
        slope,
        intercept,
        residual,
        stderr,
        ci_low: slope - t * stderr,
        ci_high: slope + t * stderr,
        points_used: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn exact_power_laws() {
        let pts: Vec<_> = [8.0, 16.0, 32.0, 64.0].iter().map(|&n: &f64| (n, 1.0 / n)).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-20);
        let c = 3.5;
        let pts: Vec<_> = [8.0, 16.0, 32.0, 64.0].iter().map(|&n: &f64| (n, c / (n * n))).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.intercept - c.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_or_nonpositive_input() {
        assert!(matches!(fit_rate(&[(8.0, 1.0), (16.0, 0.5)]), Err(EstimatorError::TooFewPoints(2))));
        assert!(fit_rate(&[(8.0, 1.0), (16.0, 0.0), (32.0, 0.2)]).is_err());
    }

    #[test]
    fn interval_coverage_under_multiplicative_noise() {
        // 5% log-normal noise over 6 points; nominal 95% coverage.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let ns = [8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
        let reps = 1000;
        let mut covered = 0;
        for _ in 0..reps {
            let pts: Vec<_> = ns
                .iter()
                .map(|&n: &f64| {
                    let z: f64 = rng.sample(StandardNormal);
                    (n, n.powf(-0.75) * (0.05 * z).exp())
                })
                .collect();
            if fit_rate(&pts).unwrap().ci_contains(-0.75) {
                covered += 1;
            }
        }
        assert!(covered >= 950, "coverage {covered}/1000");
    }

    #[test]
    fn censored_points_are_skipped() {
        let mk = |n: usize, e: f64, se: f64| ErrorPoint {
            n,
            estimate: e,
            stderr: se,
            paths: 100,
            censored: e.abs() < 2.0 * se,
        };
        let pts = vec![mk(8, 0.1, 0.001), mk(16, 0.05, 0.001), mk(32, 0.025, 0.001), mk(64, 0.001, 0.01)];
        let r = ErrorReport::new("weak".into(), 256, pts, 1.0, 0.05);
        assert_eq!(r.censored_count(), 1);
        let f = r.fit.unwrap();
        assert_eq!(f.points_used, 3);
        assert!((f.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
