//! RouterNet-μ: a small convolutional body-part classifier trained from
//! scratch with softmax cross-entropy, Adam and cosine warm restarts.

mod backend;
mod class;
pub mod gradcheck;
pub mod layers;
mod loss;
mod model;
mod optim;
mod synth;
mod tensor;
mod train;
mod weights;

pub use backend::{predict, Backend, Prediction, RouterNetBackend};
pub use class::{BodyPartClass, NUM_CLASSES};
pub use loss::{
    argmax, cross_entropy_loss, cross_entropy_with_grad, log_sum_exp, softmax, Reduction,
};
pub use model::{
    activation_pattern, backward, backward_from_logit_grad, backward_with, forward,
    images_to_batch, Architecture, ModelParams,
};
pub use optim::{adam_step, AdamState, LrSchedule, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use synth::{make_synthetic_dataset, LabeledExample};
pub use tensor::{Scalar, Tensor};
pub use train::{
    evaluate, evaluate_accuracy, train, train_with_progress, Evaluation, History, TrainConfig,
};
pub use weights::{load_weights, save_weights, WEIGHTS_MAGIC, WEIGHTS_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("non-finite value in input")]
    NonFiniteInput,
    #[error("label {0} is not a valid class code")]
    LabelOutOfRange(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("weight file does not start with RNMW")]
    BadMagic,
    #[error("weight file version {0} is not supported")]
    VersionUnsupported(u16),
    #[error("weight file is truncated")]
    TruncatedWeights,
    #[error("weights do not fit the architecture: {0}")]
    ShapeMismatchWithArchitecture(String),
    #[error("malformed weight file: {0}")]
    MalformedWeights(String),
    #[error("backend failure: {0}")]
    BackendFailure(String),
}
