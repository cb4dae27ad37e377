//! Aggregation of per-seed best losses.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub best_loss: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Sorted by seed.
    pub per_seed: Vec<SeedOutcome>,
    pub n_ok: usize,
    pub n_failed: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for a single seed.
    pub stderr: f64,
    pub best: f64,
    pub worst: f64,
    pub median: f64,
}

impl SweepSummary {
    /// Statistics over the successful outcomes. The input order does not
    /// matter: outcomes are sorted by seed before any arithmetic.
    pub fn from_outcomes(mut outcomes: Vec<SeedOutcome>) -> Self {
        outcomes.sort_by_key(|o| o.seed);
        let losses: Vec<f64> = outcomes.iter().filter_map(|o| o.best_loss).collect();
        let n = losses.len();
        let (mean, stderr, best, worst, median) = if n == 0 {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            let mean = losses.iter().sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                let var = losses.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (n - 1) as f64;
                var.sqrt() / (n as f64).sqrt()
            } else {
                0.0
            };
            let mut sorted = losses.clone();
            sorted.sort_by(f64::total_cmp);
            let median = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            };
            (mean, stderr, sorted[0], sorted[n - 1], median)
        };
        SweepSummary {
            n_ok: n,
            n_failed: outcomes.len() - n,
            per_seed: outcomes,
            mean,
            stderr,
            best,
            worst,
            median,
        }
    }
}
