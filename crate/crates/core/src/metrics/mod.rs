//! Evaluation harness: stratified splitting, confusion matrices, per-class
//! and macro scores, percentile bootstrap intervals, latency measurement
//! and report formatting.

mod bootstrap;
mod confusion;
mod latency;
mod report;
mod scores;
mod split;

pub use bootstrap::{
    bootstrap_ci, bootstrap_replicates, percentile, BootstrapCI, DEFAULT_ITERATIONS, DEFAULT_LEVEL,
};
pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use latency::{latency_benchmark, LatencyReport, DEFAULT_WARMUP};
pub use report::{
    emit_report, emit_report_csv, format_ci, read_predictions_csv, write_predictions_csv,
    ModelResult, PredictionRecord,
};
pub use scores::{
    accuracy, macro_f1, macro_metrics, macro_precision, macro_recall, precision_recall_f1,
    ClassMetrics, MacroMetrics, MetricFn,
};
pub use split::{split_counts, stratified_split, Split, SplitSpec, MIN_CLASS_SIZE};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("class code {0} is out of range")]
    InvalidClass(usize),
    #[error("input is empty")]
    EmptyInput,
    #[error("bootstrap needs at least one iteration")]
    InvalidIterations,
    #[error("confidence level {0} is not inside (0, 1)")]
    InvalidLevel(f64),
    #[error("class {class} has {size} examples, fewer than the split needs")]
    ClassTooSmall { class: usize, size: usize },
    #[error("split ratios {0:?} must be non-negative and sum to 1")]
    InvalidRatios([f64; 3]),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for MetricsError {
    fn from(e: csv::Error) -> Self {
        MetricsError::Csv(e.to_string())
    }
}
