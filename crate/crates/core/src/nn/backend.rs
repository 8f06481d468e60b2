use std::time::Instant;

use serde::Serialize;

use super::class::{BodyPartClass, NUM_CLASSES};
use super::loss::{argmax, softmax};
use super::model::{forward, images_to_batch, ModelParams};
use super::NnError;
use crate::pixel::{resize_bilinear, ImageTensor, MODEL_INPUT_SIZE};

/// A classifier the router can call. Implementations must be safe to share
/// across threads; `logits` must not mutate shared state.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    fn parameter_count(&self) -> usize;

    /// Side length of the square input the backend was trained on.
    fn input_size(&self) -> usize;

    /// Raw class scores, one per [`BodyPartClass`] code.
    fn logits(&self, image: &ImageTensor) -> Result<Vec<f64>, NnError>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub class: BodyPartClass,
    pub probabilities: [f64; NUM_CLASSES],
    /// Wall-clock time of the backend call.
    pub latency_s: f64,
}

impl Prediction {
    pub fn confidence(&self) -> f64 {
        self.probabilities[self.class.code()]
    }
}

/// Classifies one image: softmax over the backend's logits, argmax with
/// ties going to the lowest class code.
pub fn predict(backend: &dyn Backend, image: &ImageTensor) -> Result<Prediction, NnError> {
    let start = Instant::now();
    let logits = backend.logits(image)?;
    let latency_s = start.elapsed().as_secs_f64();
    if logits.len() != NUM_CLASSES {
        return Err(NnError::BackendFailure(format!(
            "backend {} returned {} scores",
            backend.name(),
            logits.len()
        )));
    }
    let probs = softmax(&logits).map_err(|e| NnError::BackendFailure(e.to_string()))?;
    let mut probabilities = [0.0; NUM_CLASSES];
    probabilities.copy_from_slice(&probs);
    let class = BodyPartClass::from_code(argmax(&logits)).expect("argmax is below NUM_CLASSES");
    Ok(Prediction {
        class,
        probabilities,
        latency_s,
    })
}

/// The built-in RouterNet-μ network. Images whose size differs from
/// `input_size` are bilinearly resampled first.
#[derive(Debug, Clone)]
pub struct RouterNetBackend {
    params: ModelParams<f32>,
    input_size: usize,
}

impl RouterNetBackend {
    pub fn new(params: ModelParams<f32>, input_size: usize) -> Self {
        Self { params, input_size }
    }

    pub fn with_default_input(params: ModelParams<f32>) -> Self {
        Self::new(params, MODEL_INPUT_SIZE)
    }

    pub fn params(&self) -> &ModelParams<f32> {
        &self.params
    }
}

impl Backend for RouterNetBackend {
    fn name(&self) -> &str {
        "RouterNet-μ"
    }

    fn parameter_count(&self) -> usize {
        self.params.parameter_count()
    }

    fn input_size(&self) -> usize {
        self.input_size
    }

    fn logits(&self, image: &ImageTensor) -> Result<Vec<f64>, NnError> {
        let resized;
        let img = if (image.height(), image.width()) == (self.input_size, self.input_size) {
            image
        } else {
            resized = resize_bilinear(image, self.input_size, self.input_size);
            &resized
        };
        let batch = images_to_batch(&[img])?;
        let out = forward(&self.params, &batch)?;
        Ok(out.data().iter().map(|&v| v as f64).collect())
    }
}
