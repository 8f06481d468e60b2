use serde::Serialize;

use super::confusion::{check_pairs, confusion_matrix, ConfusionMatrix};
use crate::nn::NUM_CLASSES;

/// One-vs-rest scores for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when precision or recall had a zero denominator and was
    /// reported as 0.
    pub degenerate: bool,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn precision_recall_f1(cm: &ConfusionMatrix, k: usize) -> ClassMetrics {
    let tp = cm.true_positives(k);
    let precision = ratio(tp, tp + cm.false_positives(k));
    let recall = ratio(tp, tp + cm.false_negatives(k));
    let degenerate = precision.is_none() || recall.is_none();
    let (p, r) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
    let f1 = if p > 0.0 && r > 0.0 {
        2.0 / (1.0 / p + 1.0 / r)
    } else {
        0.0
    };
    ClassMetrics {
        precision: p,
        recall: r,
        f1,
        support: cm.support(k),
        degenerate,
    }
}

/// Unweighted class averages. Classes without support (no actual
/// examples) are left out of the averages and listed in `excluded`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub excluded: Vec<usize>,
}

pub fn macro_metrics(cm: &ConfusionMatrix) -> MacroMetrics {
    let per_class: Vec<ClassMetrics> = (0..NUM_CLASSES)
        .map(|k| precision_recall_f1(cm, k))
        .collect();
    let excluded: Vec<usize> = (0..NUM_CLASSES)
        .filter(|&k| per_class[k].support == 0)
        .collect();
    let included: Vec<&ClassMetrics> = per_class.iter().filter(|m| m.support > 0).collect();
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if included.is_empty() {
            0.0
        } else {
            included.iter().map(|m| f(m)).sum::<f64>() / included.len() as f64
        }
    };
    MacroMetrics {
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
        per_class,
        excluded,
    }
}

/// A scalar statistic of paired (prediction, label) samples, as resampled
/// by the bootstrap.
pub type MetricFn = fn(&[usize], &[usize]) -> f64;

fn macro_of(predictions: &[usize], labels: &[usize]) -> MacroMetrics {
    let cm =
        confusion_matrix(predictions, labels).expect("metric inputs are validated by the caller");
    macro_metrics(&cm)
}

pub fn accuracy(predictions: &[usize], labels: &[usize]) -> f64 {
    check_pairs(predictions, labels).expect("metric inputs are validated by the caller");
    if labels.is_empty() {
        return 0.0;
    }
    predictions
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count() as f64
        / labels.len() as f64
}

pub fn macro_precision(predictions: &[usize], labels: &[usize]) -> f64 {
    macro_of(predictions, labels).precision
}

pub fn macro_recall(predictions: &[usize], labels: &[usize]) -> f64 {
    macro_of(predictions, labels).recall
}

pub fn macro_f1(predictions: &[usize], labels: &[usize]) -> f64 {
    macro_of(predictions, labels).f1
}
