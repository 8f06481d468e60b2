use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::loss::{argmax, cross_entropy_loss, Reduction};
use super::model::{backward_with, forward, images_to_batch, Architecture, ModelParams};
use super::optim::{adam_step, AdamState, LrSchedule};
use super::synth::LabeledExample;
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds weight initialization (directly) and batch shuffling (via
    /// `seed + 1`).
    pub seed: u64,
    pub reduction: Reduction,
    pub schedule: LrSchedule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            seed: 0,
            reduction: Reduction::Mean,
            schedule: LrSchedule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct History {
    /// Mean per-example training loss of each epoch.
    pub train_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    /// Mean per-example validation cross-entropy of each epoch.
    pub val_loss: Vec<f64>,
    /// Zero-based epoch whose parameters were returned.
    pub best_epoch: usize,
    pub optimizer_steps: u64,
}

/// Accuracy and mean cross-entropy over a labeled set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub loss: f64,
}

pub fn evaluate(
    params: &ModelParams<f32>,
    examples: &[LabeledExample],
) -> Result<Evaluation, NnError> {
    if examples.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let mut correct = 0usize;
    let mut loss_total = 0.0f64;
    for chunk in examples.chunks(64) {
        let images: Vec<_> = chunk.iter().map(|e| &e.image).collect();
        let labels: Vec<usize> = chunk.iter().map(|e| e.label.code()).collect();
        let logits = forward(params, &images_to_batch(&images)?)?;
        loss_total += cross_entropy_loss(&logits, &labels, Reduction::Sum)? as f64;
        for (z, &y) in logits
            .data()
            .chunks(params.architecture().num_classes)
            .zip(&labels)
        {
            if argmax(z) == y {
                correct += 1;
            }
        }
    }
    let n = examples.len() as f64;
    Ok(Evaluation {
        accuracy: correct as f64 / n,
        loss: loss_total / n,
    })
}

/// Fraction of examples whose predicted class matches the label.
pub fn evaluate_accuracy(
    params: &ModelParams<f32>,
    examples: &[LabeledExample],
) -> Result<f64, NnError> {
    evaluate(params, examples).map(|e| e.accuracy)
}

fn check_inputs(
    train: &[LabeledExample],
    val: &[LabeledExample],
    cfg: &TrainConfig,
) -> Result<(), NnError> {
    if train.is_empty() || val.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(NnError::InvalidConfig(
            "epochs and batch_size must be at least 1".into(),
        ));
    }
    let (h, w) = (train[0].image.height(), train[0].image.width());
    if let Some(e) = train
        .iter()
        .chain(val)
        .find(|e| (e.image.height(), e.image.width()) != (h, w))
    {
        return Err(NnError::ShapeMismatch(format!(
            "image {}x{} in a {h}x{w} dataset",
            e.image.height(),
            e.image.width()
        )));
    }
    Ok(())
}

/// Trains RouterNet-μ with shuffled mini-batches, Adam and the warm-restart
/// schedule. Returns the parameters of the epoch with the best validation
/// accuracy; ties go to the lower validation loss, then the earlier epoch.
pub fn train(
    train_set: &[LabeledExample],
    val_set: &[LabeledExample],
    cfg: &TrainConfig,
) -> Result<(ModelParams<f32>, History), NnError> {
    train_with_progress(train_set, val_set, cfg, |_, _, _| {})
}

/// [`train`] with a callback receiving `(epoch, train_loss, val_accuracy)`
/// after each epoch.
pub fn train_with_progress(
    train_set: &[LabeledExample],
    val_set: &[LabeledExample],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64, f64),
) -> Result<(ModelParams<f32>, History), NnError> {
    check_inputs(train_set, val_set, cfg)?;
    let mut params = ModelParams::<f32>::init_he_uniform(Architecture::ROUTERNET_MU, cfg.seed);
    let mut state = AdamState::new(&params);
    let mut rng = Xoshiro256StarStar::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let batches_per_epoch = train_set.len().div_ceil(cfg.batch_size);

    let mut history = History {
        train_loss: Vec::with_capacity(cfg.epochs),
        val_accuracy: Vec::with_capacity(cfg.epochs),
        val_loss: Vec::with_capacity(cfg.epochs),
        best_epoch: 0,
        optimizer_steps: 0,
    };
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, params.clone());

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_total = 0.0f64;
        for (bi, idx) in order.chunks(cfg.batch_size).enumerate() {
            let images: Vec<_> = idx.iter().map(|&i| &train_set[i].image).collect();
            let labels: Vec<usize> = idx.iter().map(|&i| train_set[i].label.code()).collect();
            let batch = images_to_batch(&images)?;
            let (loss, grads) = backward_with(&params, &batch, &labels, cfg.reduction)?;
            loss_total += match cfg.reduction {
                Reduction::Mean => loss as f64 * idx.len() as f64,
                Reduction::Sum => loss as f64,
            };
            let progress = epoch as f64 + bi as f64 / batches_per_epoch as f64;
            adam_step(
                &mut params,
                &grads,
                &mut state,
                cfg.schedule.lr_at(progress),
            );
            history.optimizer_steps += 1;
        }
        debug_assert!(
            params.all_finite(),
            "non-finite parameters after epoch {epoch}"
        );
        let train_loss = loss_total / train_set.len() as f64;
        let val = evaluate(&params, val_set)?;
        history.train_loss.push(train_loss);
        history.val_accuracy.push(val.accuracy);
        history.val_loss.push(val.loss);
        if val.accuracy > best.0 || (val.accuracy == best.0 && val.loss < best.1) {
            best = (val.accuracy, val.loss, params.clone());
            history.best_epoch = epoch;
        }
        on_epoch(epoch, train_loss, val.accuracy);
    }
    Ok((best.2, history))
}
