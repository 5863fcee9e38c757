//! Small helpers for Monte Carlo summaries.

use serde::Serialize;

/// A proportion estimated from Bernoulli trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        Proportion { successes, trials }
    }

    pub fn estimate(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error `sqrt(p(1-p)/n)`.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        let p = self.estimate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    ///
    /// When the estimate has zero variance the comparison falls back to the
    /// standard error of `value` itself, so a true value of 0.01 is not
    /// rejected just because no success was observed.
    pub fn within(&self, value: f64, k: f64) -> bool {
        let n = self.trials as f64;
        let se = self.std_error().max((value * (1.0 - value) / n).sqrt());
        (self.estimate() - value).abs() <= k * se
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
