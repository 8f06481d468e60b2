use serde::{Deserialize, Serialize};

use super::tensor::{Scalar, Tensor};
use super::NnError;

/// How per-example losses are combined over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    /// Plain sum over examples.
    Sum,
    /// Sum divided by the batch size.
    #[default]
    Mean,
}

fn check_finite<S: Scalar>(z: &[S]) -> Result<(), NnError> {
    if z.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NnError::NonFiniteInput)
    }
}

/// `log(sum(exp(z)))` computed with the maximum subtracted first.
pub fn log_sum_exp<S: Scalar>(z: &[S]) -> S {
    let max = z.iter().fold(S::neg_infinity(), |m, &v| m.max(v));
    let sum = z.iter().fold(S::zero(), |acc, &v| acc + (v - max).exp());
    max + sum.ln()
}

/// Normalized exponential of the logits.
pub fn softmax<S: Scalar>(z: &[S]) -> Result<Vec<S>, NnError> {
    check_finite(z)?;
    let max = z.iter().fold(S::neg_infinity(), |m, &v| m.max(v));
    let exps: Vec<S> = z.iter().map(|&v| (v - max).exp()).collect();
    let total = exps.iter().fold(S::zero(), |a, &v| a + v);
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax<S: Scalar>(z: &[S]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = i;
        }
    }
    best
}

fn check_batch<S: Scalar>(logits: &Tensor<S>, labels: &[usize]) -> Result<(usize, usize), NnError> {
    let shape = logits.shape();
    if shape.len() != 2 || shape[0] != labels.len() {
        return Err(NnError::ShapeMismatch(format!(
            "logits {shape:?} for {} labels",
            labels.len()
        )));
    }
    let k = shape[1];
    if let Some(&bad) = labels.iter().find(|&&y| y >= k) {
        return Err(NnError::LabelOutOfRange(bad));
    }
    check_finite(logits.data())?;
    Ok((shape[0], k))
}

/// Softmax cross-entropy over a `B x K` batch; each example contributes
/// `log_sum_exp(z) - z[y]`.
pub fn cross_entropy_loss<S: Scalar>(
    logits: &Tensor<S>,
    labels: &[usize],
    reduction: Reduction,
) -> Result<S, NnError> {
    let (b, k) = check_batch(logits, labels)?;
    let total = logits
        .data()
        .chunks(k)
        .zip(labels)
        .fold(S::zero(), |acc, (z, &y)| acc + (log_sum_exp(z) - z[y]));
    Ok(match reduction {
        Reduction::Sum => total,
        Reduction::Mean => total / S::of(b as f64),
    })
}

/// Loss and its gradient with respect to the logits: `softmax(z) - onehot(y)`,
/// scaled by `1/B` for mean reduction.
pub fn cross_entropy_with_grad<S: Scalar>(
    logits: &Tensor<S>,
    labels: &[usize],
    reduction: Reduction,
) -> Result<(S, Tensor<S>), NnError> {
    let loss = cross_entropy_loss(logits, labels, reduction)?;
    let (b, k) = check_batch(logits, labels)?;
    let scale = match reduction {
        Reduction::Sum => S::one(),
        Reduction::Mean => S::one() / S::of(b as f64),
    };
    let mut grad = Vec::with_capacity(b * k);
    for (z, &y) in logits.data().chunks(k).zip(labels) {
        let p = softmax(z)?;
        for (j, pj) in p.into_iter().enumerate() {
            let g = if j == y { pj - S::one() } else { pj };
            grad.push(g * scale);
        }
    }
    Ok((loss, Tensor::from_vec(&[b, k], grad)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits() {
        let p = softmax(&[0.0f64; 5]).unwrap();
        assert!(p.iter().all(|&v| (v - 0.2).abs() < 1e-15));
        let logits = Tensor::from_vec(&[1, 5], vec![0.0f64; 5]);
        let loss = cross_entropy_loss(&logits, &[3], Reduction::Mean).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-15);
        assert!((loss - 1.609_437_912_434_100_3).abs() < 1e-12);
    }

    #[test]
    fn one_hot_logit_closed_form() {
        // e / (e + 4) and 1 / (e + 4)
        let p = softmax(&[1.0f64, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((p[0] - 0.404_609_675_191_689_66).abs() < 1e-12);
        for &q in &p[1..] {
            assert!((q - 0.148_847_581_202_077_58).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_invariance() {
        let z = [0.3f64, -1.2, 2.5, 0.0, 7.1];
        let base = softmax(&z).unwrap();
        for c in [-1000.0, -3.3, 0.5, 250.0] {
            let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
            for (a, b) in base.iter().zip(softmax(&shifted).unwrap()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_and_label_errors() {
        assert!(matches!(
            softmax(&[0.0, f64::NAN]),
            Err(NnError::NonFiniteInput)
        ));
        let logits = Tensor::from_vec(&[1, 5], vec![0.0f64; 5]);
        assert!(matches!(
            cross_entropy_loss(&logits, &[5], Reduction::Mean),
            Err(NnError::LabelOutOfRange(5))
        ));
    }

    #[test]
    fn confident_correct_logit_has_near_zero_loss() {
        let logits = Tensor::from_vec(&[1, 5], vec![0.0, 0.0, 1000.0, 0.0, 0.0f64]);
        let loss = cross_entropy_loss(&logits, &[2], Reduction::Mean).unwrap();
        assert!(loss < 1e-6);
        // log-sum-exp form stays finite where naive log(softmax) would not
        let logits = Tensor::from_vec(&[1, 5], vec![0.0, 0.0, 1000.0, 0.0, 0.0f64]);
        let loss = cross_entropy_loss(&logits, &[0], Reduction::Mean).unwrap();
        assert!((loss - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn sum_reduction_is_additive() {
        let z = vec![0.2, -0.7, 1.1, 0.0, 0.4f64];
        let one = cross_entropy_loss(&Tensor::from_vec(&[1, 5], z.clone()), &[1], Reduction::Sum)
            .unwrap();
        let two = cross_entropy_loss(
            &Tensor::from_vec(&[2, 5], [z.clone(), z].concat()),
            &[1, 1],
            Reduction::Sum,
        )
        .unwrap();
        assert_eq!(two, 2.0 * one);
    }

    #[test]
    fn gradient_of_correct_logit_is_p_minus_one() {
        let z = vec![0.5, 1.5, -0.5, 0.25, 0.0f64];
        let (_, g) =
            cross_entropy_with_grad(&Tensor::from_vec(&[1, 5], z.clone()), &[1], Reduction::Mean)
                .unwrap();
        let p = softmax(&z).unwrap();
        assert!((g.data()[1] - (p[1] - 1.0)).abs() < 1e-15);
        assert!((g.data()[0] - p[0]).abs() < 1e-15);
    }

    #[test]
    fn argmax_ties_go_to_lowest_index() {
        assert_eq!(argmax(&[1.0f64; 5]), 0);
        assert_eq!(argmax(&[0.0, 2.0, 2.0, 1.0f64]), 1);
    }
}
