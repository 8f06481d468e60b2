use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::nn::NUM_CLASSES;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Train, validation and test fractions.
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            ratios: [0.7, 0.15, 0.15],
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Smallest class size the split accepts.
pub const MIN_CLASS_SIZE: usize = 3;

/// Guards `floor(ratio * n)` against products such as `0.7 * 30` landing a
/// hair below the integer.
const FLOOR_SLACK: f64 = 1e-9;

/// `(train, val, test)` sizes for a class of `n` examples.
pub fn split_counts(n: usize, ratios: [f64; 3]) -> (usize, usize, usize) {
    let train = (ratios[0] * n as f64 + FLOOR_SLACK).floor() as usize;
    let val = (ratios[1] * n as f64 + FLOOR_SLACK).floor() as usize;
    let train = train.min(n);
    let val = val.min(n - train);
    (train, val, n - train - val)
}

/// Per-class partition. Classes are visited in code order; each class's
/// indices are shuffled with one xoshiro256** stream seeded from
/// `spec.seed`, then cut into train/val/test by [`split_counts`]. Each
/// returned index list is sorted ascending.
pub fn stratified_split(labels: &[usize], spec: &SplitSpec) -> Result<Split, MetricsError> {
    let sum: f64 = spec.ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || spec.ratios.iter().any(|&r| r < 0.0) {
        return Err(MetricsError::InvalidRatios(spec.ratios));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
    for (i, &c) in labels.iter().enumerate() {
        by_class
            .get_mut(c)
            .ok_or(MetricsError::InvalidClass(c))?
            .push(i);
    }
    if let Some((class, idx)) = by_class
        .iter()
        .enumerate()
        .find(|(_, idx)| !idx.is_empty() && idx.len() < MIN_CLASS_SIZE)
    {
        return Err(MetricsError::ClassTooSmall {
            class,
            size: idx.len(),
        });
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
    let mut split = Split {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for mut idx in by_class {
        idx.shuffle(&mut rng);
        let (tr, va, _) = split_counts(idx.len(), spec.ratios);
        split.train.extend_from_slice(&idx[..tr]);
        split.val.extend_from_slice(&idx[tr..tr + va]);
        split.test.extend_from_slice(&idx[tr + va..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_per_class_is_seven_one_two() {
        assert_eq!(split_counts(10, [0.7, 0.15, 0.15]), (7, 1, 2));
        let labels: Vec<usize> = (0..50).map(|i| i % 5).collect();
        let s = stratified_split(&labels, &SplitSpec::new(1)).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (35, 5, 10));
        for class in 0..5 {
            assert_eq!(s.train.iter().filter(|&&i| labels[i] == class).count(), 7);
        }
    }

    #[test]
    fn float_products_floor_to_the_integer() {
        // 0.7 * 30 and 0.15 * 20 are not exact in binary floating point
        assert_eq!(split_counts(30, [0.7, 0.15, 0.15]).0, 21);
        assert_eq!(split_counts(20, [0.7, 0.15, 0.15]).1, 3);
        for n in 3..5000 {
            let (tr, va, te) = split_counts(n, [0.7, 0.15, 0.15]);
            assert_eq!(tr, 7 * n / 10, "n={n}");
            assert_eq!(va, 15 * n / 100, "n={n}");
            assert_eq!(tr + va + te, n);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            stratified_split(&[0, 0, 1, 1, 1], &SplitSpec::new(0)),
            Err(MetricsError::ClassTooSmall { class: 0, size: 2 })
        ));
        assert!(matches!(
            stratified_split(&[7, 7, 7], &SplitSpec::new(0)),
            Err(MetricsError::InvalidClass(7))
        ));
        let bad = SplitSpec {
            ratios: [0.7, 0.2, 0.2],
            seed: 0,
        };
        assert!(matches!(
            stratified_split(&[0, 0, 0], &bad),
            Err(MetricsError::InvalidRatios(_))
        ));
    }
}
