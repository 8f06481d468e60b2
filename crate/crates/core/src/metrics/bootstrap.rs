use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;

use super::confusion::check_pairs;
use super::scores::MetricFn;
use super::MetricsError;

pub const DEFAULT_ITERATIONS: usize = 10_000;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapCI {
    /// Metric on the observed sample.
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Linear interpolation between closest ranks of an ascending sample
/// (position `q * (n - 1)`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (h - i as f64) * (sorted[i + 1] - sorted[i])
}

/// Every replicate value, in generation order. Replicate `r` draws `N`
/// indices uniformly from `0..N` with xoshiro256** seeded from `seed`
/// (SplitMix64 expansion), continuing one stream across replicates.
pub fn bootstrap_replicates(
    predictions: &[usize],
    labels: &[usize],
    metric: MetricFn,
    iterations: usize,
    seed: u64,
) -> Result<Vec<f64>, MetricsError> {
    check_pairs(predictions, labels)?;
    let n = labels.len();
    if n == 0 {
        return Err(MetricsError::EmptyInput);
    }
    if iterations == 0 {
        return Err(MetricsError::InvalidIterations);
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut preds = vec![0; n];
    let mut labs = vec![0; n];
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        for j in 0..n {
            let i = rng.gen_range(0..n);
            preds[j] = predictions[i];
            labs[j] = labels[i];
        }
        out.push(metric(&preds, &labs));
    }
    Ok(out)
}

/// Percentile bootstrap interval: the `(1-level)/2` and `(1+level)/2`
/// quantiles of the replicate distribution.
pub fn bootstrap_ci(
    predictions: &[usize],
    labels: &[usize],
    metric: MetricFn,
    iterations: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCI, MetricsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(MetricsError::InvalidLevel(level));
    }
    let mut reps = bootstrap_replicates(predictions, labels, metric, iterations, seed)?;
    reps.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok(BootstrapCI {
        point: metric(predictions, labels),
        lo: percentile(&reps, alpha),
        hi: percentile(&reps, 1.0 - alpha),
        level,
        iterations,
        seed,
    })
}
