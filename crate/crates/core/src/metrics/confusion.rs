use serde::Serialize;

use super::MetricsError;
use crate::nn::NUM_CLASSES;

/// Counts indexed `[actual][predicted]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Number of examples whose actual class is `k` (row sum).
    pub fn support(&self, k: usize) -> u64 {
        self.counts[k].iter().sum()
    }

    /// Number of examples predicted as `k` (column sum).
    pub fn predicted(&self, k: usize) -> u64 {
        self.counts.iter().map(|row| row[k]).sum()
    }

    pub fn true_positives(&self, k: usize) -> u64 {
        self.counts[k][k]
    }

    pub fn false_positives(&self, k: usize) -> u64 {
        self.predicted(k) - self.counts[k][k]
    }

    pub fn false_negatives(&self, k: usize) -> u64 {
        self.support(k) - self.counts[k][k]
    }

    /// Diagonal fraction; zero for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (0..NUM_CLASSES).map(|k| self.counts[k][k]).sum::<u64>() as f64 / total as f64
    }
}

pub(crate) fn check_pairs(predictions: &[usize], labels: &[usize]) -> Result<(), MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if let Some(&bad) = predictions
        .iter()
        .chain(labels)
        .find(|&&c| c >= NUM_CLASSES)
    {
        return Err(MetricsError::InvalidClass(bad));
    }
    Ok(())
}

pub fn confusion_matrix(
    predictions: &[usize],
    labels: &[usize],
) -> Result<ConfusionMatrix, MetricsError> {
    check_pairs(predictions, labels)?;
    let mut cm = ConfusionMatrix::default();
    for (&p, &a) in predictions.iter().zip(labels) {
        cm.counts[a][p] += 1;
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_tallied_pairs() {
        // (actual, predicted): (0,0) (0,1) (1,1) (2,2) (2,1) (4,3)
        let labels = [0, 0, 1, 2, 2, 4];
        let preds = [0, 1, 1, 2, 1, 3];
        let cm = confusion_matrix(&preds, &labels).unwrap();
        let mut expected = [[0u64; 5]; 5];
        expected[0][0] = 1;
        expected[0][1] = 1;
        expected[1][1] = 1;
        expected[2][2] = 1;
        expected[2][1] = 1;
        expected[4][3] = 1;
        assert_eq!(cm.counts, expected);
        assert_eq!(cm.total(), 6);
        assert_eq!(cm.false_positives(1), 2);
        assert_eq!(cm.false_negatives(4), 1);
        assert_eq!(cm.accuracy(), 0.5);
    }

    #[test]
    fn all_correct_is_diagonal_and_empty_is_zero() {
        let labels = [0, 1, 1, 3, 4, 4, 4];
        let cm = confusion_matrix(&labels, &labels).unwrap();
        for a in 0..5 {
            for p in 0..5 {
                let want = if a == p {
                    labels.iter().filter(|&&l| l == a).count() as u64
                } else {
                    0
                };
                assert_eq!(cm.counts[a][p], want);
            }
        }
        assert_eq!(
            confusion_matrix(&[], &[]).unwrap(),
            ConfusionMatrix::default()
        );
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            confusion_matrix(&[0, 1], &[0]),
            Err(MetricsError::LengthMismatch {
                predictions: 2,
                labels: 1
            })
        ));
        assert!(matches!(
            confusion_matrix(&[5], &[0]),
            Err(MetricsError::InvalidClass(5))
        ));
    }
}
