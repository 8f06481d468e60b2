use std::time::Instant;

use serde::Serialize;

use super::MetricsError;
use crate::nn::{predict, Backend};
use crate::pixel::ImageTensor;

pub const DEFAULT_WARMUP: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyReport {
    /// Arithmetic mean of `samples`, in seconds.
    pub mean_s: f64,
    /// Wall-clock seconds of each timed single-image predict call.
    pub samples: Vec<f64>,
    pub warmup: usize,
}

/// Runs `warmup` untimed predictions (cycling through `images`), then
/// times one predict call per image.
pub fn latency_benchmark(
    backend: &dyn Backend,
    images: &[ImageTensor],
    warmup: usize,
) -> Result<LatencyReport, MetricsError> {
    if images.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    for img in images.iter().cycle().take(warmup) {
        predict(backend, img).map_err(|e| MetricsError::Backend(e.to_string()))?;
    }
    let mut samples = Vec::with_capacity(images.len());
    for img in images {
        let start = Instant::now();
        predict(backend, img).map_err(|e| MetricsError::Backend(e.to_string()))?;
        samples.push(start.elapsed().as_secs_f64());
    }
    let mean_s = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(LatencyReport {
        mean_s,
        samples,
        warmup,
    })
}
