use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::class::NUM_CLASSES;
use super::layers::{
    conv3x3_backward, conv3x3_forward, global_avg_pool_backward, global_avg_pool_forward,
    linear_backward, linear_forward, maxpool2_backward, maxpool2_forward, relu_backward,
    relu_forward,
};
use super::loss::{cross_entropy_with_grad, Reduction};
use super::tensor::{Scalar, Tensor};
use super::NnError;
use crate::pixel::ImageTensor;

/// Layer widths of the network. Three 3x3 conv stages (the first two
/// followed by 2x2 max pooling, the last by global average pooling) feed a
/// fully connected head with one output per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub in_channels: usize,
    pub conv_channels: [usize; 3],
    pub num_classes: usize,
}

impl Architecture {
    pub const ROUTERNET_MU: Architecture = Architecture {
        in_channels: 1,
        conv_channels: [8, 16, 32],
        num_classes: NUM_CLASSES,
    };

    /// Parameter names and shapes in storage order.
    pub fn param_specs(&self) -> Vec<(&'static str, Vec<usize>)> {
        let [c1, c2, c3] = self.conv_channels;
        vec![
            ("conv1.weight", vec![c1, self.in_channels, 3, 3]),
            ("conv1.bias", vec![c1]),
            ("conv2.weight", vec![c2, c1, 3, 3]),
            ("conv2.bias", vec![c2]),
            ("conv3.weight", vec![c3, c2, 3, 3]),
            ("conv3.bias", vec![c3]),
            ("fc.weight", vec![self.num_classes, c3]),
            ("fc.bias", vec![self.num_classes]),
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.param_specs()
            .iter()
            .map(|(_, shape)| shape.iter().product::<usize>())
            .sum()
    }

    /// Smallest spatial side that survives both pooling stages.
    pub const MIN_INPUT_SIDE: usize = 4;
}

const CONV1_W: usize = 0;
const CONV1_B: usize = 1;
const CONV2_W: usize = 2;
const CONV2_B: usize = 3;
const CONV3_W: usize = 4;
const CONV3_B: usize = 5;
const FC_W: usize = 6;
const FC_B: usize = 7;

/// Named parameter tensors of a RouterNet-μ network, in the order given by
/// [`Architecture::param_specs`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<S> {
    arch: Architecture,
    tensors: Vec<(String, Tensor<S>)>,
}

impl<S: Scalar> ModelParams<S> {
    pub fn zeros(arch: Architecture) -> Self {
        let tensors = arch
            .param_specs()
            .into_iter()
            .map(|(name, shape)| (name.to_string(), Tensor::zeros(&shape)))
            .collect();
        Self { arch, tensors }
    }

    /// He-style uniform initialization: weights drawn from
    /// `U(-sqrt(6/fan_in), sqrt(6/fan_in))`, biases zero.
    pub fn init_he_uniform(arch: Architecture, seed: u64) -> Self {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
        let mut params = Self::zeros(arch);
        for (name, tensor) in params.tensors.iter_mut() {
            if name.ends_with(".bias") {
                continue;
            }
            let fan_in: usize = tensor.shape()[1..].iter().product();
            let bound = (6.0 / fan_in as f64).sqrt();
            for v in tensor.data_mut() {
                *v = S::of(rng.gen_range(-bound..bound));
            }
        }
        params
    }

    /// Builds parameters from named tensors, checking names and shapes
    /// against the architecture.
    pub fn from_named(
        arch: Architecture,
        tensors: Vec<(String, Tensor<S>)>,
    ) -> Result<Self, NnError> {
        let specs = arch.param_specs();
        if tensors.len() != specs.len() {
            return Err(NnError::ShapeMismatchWithArchitecture(format!(
                "expected {} tensors, found {}",
                specs.len(),
                tensors.len()
            )));
        }
        for ((name, tensor), (want_name, want_shape)) in tensors.iter().zip(&specs) {
            if name != want_name || tensor.shape() != want_shape.as_slice() {
                return Err(NnError::ShapeMismatchWithArchitecture(format!(
                    "{name} {:?} where {want_name} {want_shape:?} was expected",
                    tensor.shape()
                )));
            }
        }
        Ok(Self { arch, tensors })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn tensors(&self) -> &[(String, Tensor<S>)] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor<S>> {
        self.tensors.iter_mut().map(|(_, t)| t)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<S>> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor<S>> {
        self.tensors
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(|(_, t)| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|(_, t)| t.all_finite())
    }

    pub fn cast<T: Scalar>(&self) -> ModelParams<T> {
        ModelParams {
            arch: self.arch,
            tensors: self
                .tensors
                .iter()
                .map(|(n, t)| (n.clone(), t.cast()))
                .collect(),
        }
    }

    fn data(&self, i: usize) -> &[S] {
        self.tensors[i].1.data()
    }

    fn accumulate(&mut self, i: usize, grad: &[S]) {
        for (a, &g) in self.tensors[i].1.data_mut().iter_mut().zip(grad) {
            *a += g;
        }
    }
}

/// Intermediate activations of one example, kept for the backward pass.
struct Cache<S> {
    h: usize,
    w: usize,
    a1: Vec<S>,
    idx1: Vec<u32>,
    p1: Vec<S>,
    a2: Vec<S>,
    idx2: Vec<u32>,
    p2: Vec<S>,
    a3: Vec<S>,
    pooled: Vec<S>,
}

fn check_batch<S: Scalar>(
    params: &ModelParams<S>,
    batch: &Tensor<S>,
) -> Result<(usize, usize, usize), NnError> {
    let shape = batch.shape();
    let arch = params.arch;
    if shape.len() != 4 || shape[1] != arch.in_channels {
        return Err(NnError::ShapeMismatch(format!(
            "expected a [B, {}, H, W] batch, got {shape:?}",
            arch.in_channels
        )));
    }
    if shape[2] < Architecture::MIN_INPUT_SIDE || shape[3] < Architecture::MIN_INPUT_SIDE {
        return Err(NnError::ShapeMismatch(format!(
            "spatial size {}x{} is below {}",
            shape[2],
            shape[3],
            Architecture::MIN_INPUT_SIDE
        )));
    }
    Ok((shape[0], shape[2], shape[3]))
}

fn forward_one<S: Scalar>(
    params: &ModelParams<S>,
    x: &[S],
    h: usize,
    w: usize,
) -> (Vec<S>, Cache<S>) {
    let arch = params.arch;
    let [c1, c2, c3] = arch.conv_channels;

    let mut a1 = conv3x3_forward(
        x,
        arch.in_channels,
        h,
        w,
        params.data(CONV1_W),
        params.data(CONV1_B),
        c1,
    );
    relu_forward(&mut a1);
    let (p1, idx1) = maxpool2_forward(&a1, c1, h, w);
    let (h1, w1) = (h / 2, w / 2);

    let mut a2 = conv3x3_forward(
        &p1,
        c1,
        h1,
        w1,
        params.data(CONV2_W),
        params.data(CONV2_B),
        c2,
    );
    relu_forward(&mut a2);
    let (p2, idx2) = maxpool2_forward(&a2, c2, h1, w1);
    let (h2, w2) = (h1 / 2, w1 / 2);

    let mut a3 = conv3x3_forward(
        &p2,
        c2,
        h2,
        w2,
        params.data(CONV3_W),
        params.data(CONV3_B),
        c3,
    );
    relu_forward(&mut a3);
    let pooled = global_avg_pool_forward(&a3, c3, h2 * w2);
    let logits = linear_forward(&pooled, params.data(FC_W), params.data(FC_B));
    debug_assert!(logits.iter().all(|v| v.is_finite()), "non-finite logits");

    let cache = Cache {
        h,
        w,
        a1,
        idx1,
        p1,
        a2,
        idx2,
        p2,
        a3,
        pooled,
    };
    (logits, cache)
}

/// Accumulates the parameter gradient of one example into `grads`, given
/// the gradient of the loss with respect to its logits.
fn backward_one<S: Scalar>(
    params: &ModelParams<S>,
    x: &[S],
    cache: &Cache<S>,
    dlogits: &[S],
    grads: &mut ModelParams<S>,
) {
    let arch = params.arch;
    let [c1, c2, c3] = arch.conv_channels;
    let (h, w) = (cache.h, cache.w);
    let (h1, w1) = (h / 2, w / 2);
    let (h2, w2) = (h1 / 2, w1 / 2);

    let fc = linear_backward(&cache.pooled, params.data(FC_W), dlogits);
    grads.accumulate(FC_W, &fc.weight);
    grads.accumulate(FC_B, &fc.bias);

    let mut d3 = global_avg_pool_backward(&fc.input, h2 * w2);
    relu_backward(&cache.a3, &mut d3);
    let g3 = conv3x3_backward(&cache.p2, c2, h2, w2, params.data(CONV3_W), c3, &d3, true);
    grads.accumulate(CONV3_W, &g3.weight);
    grads.accumulate(CONV3_B, &g3.bias);

    let dp2 = g3.input.expect("input gradient requested");
    let mut d2 = maxpool2_backward(&dp2, &cache.idx2, cache.a2.len());
    relu_backward(&cache.a2, &mut d2);
    let g2 = conv3x3_backward(&cache.p1, c1, h1, w1, params.data(CONV2_W), c2, &d2, true);
    grads.accumulate(CONV2_W, &g2.weight);
    grads.accumulate(CONV2_B, &g2.bias);

    let dp1 = g2.input.expect("input gradient requested");
    let mut d1 = maxpool2_backward(&dp1, &cache.idx1, cache.a1.len());
    relu_backward(&cache.a1, &mut d1);
    let g1 = conv3x3_backward(
        x,
        arch.in_channels,
        h,
        w,
        params.data(CONV1_W),
        c1,
        &d1,
        false,
    );
    grads.accumulate(CONV1_W, &g1.weight);
    grads.accumulate(CONV1_B, &g1.bias);
}

/// Logits `[B, K]` for a `[B, C, H, W]` batch.
pub fn forward<S: Scalar>(
    params: &ModelParams<S>,
    batch: &Tensor<S>,
) -> Result<Tensor<S>, NnError> {
    let (b, h, w) = check_batch(params, batch)?;
    let k = params.arch.num_classes;
    let per = batch.len() / b.max(1);
    let mut out = Vec::with_capacity(b * k);
    for x in batch.data().chunks(per.max(1)).take(b) {
        out.extend(forward_one(params, x, h, w).0);
    }
    Ok(Tensor::from_vec(&[b, k], out))
}

/// Mean-reduced cross-entropy loss and its gradient with respect to every
/// parameter.
pub fn backward<S: Scalar>(
    params: &ModelParams<S>,
    batch: &Tensor<S>,
    labels: &[usize],
) -> Result<(S, ModelParams<S>), NnError> {
    backward_with(params, batch, labels, Reduction::Mean)
}

/// Loss and parameter gradients under the given batch reduction.
pub fn backward_with<S: Scalar>(
    params: &ModelParams<S>,
    batch: &Tensor<S>,
    labels: &[usize],
    reduction: Reduction,
) -> Result<(S, ModelParams<S>), NnError> {
    let (b, h, w) = check_batch(params, batch)?;
    if labels.len() != b {
        return Err(NnError::ShapeMismatch(format!(
            "{} labels for a batch of {b}",
            labels.len()
        )));
    }
    if b == 0 {
        return Err(NnError::EmptyDataset);
    }
    let k = params.arch.num_classes;
    let per = batch.len() / b;
    let mut logits = Vec::with_capacity(b * k);
    let mut caches = Vec::with_capacity(b);
    for x in batch.data().chunks(per) {
        let (z, cache) = forward_one(params, x, h, w);
        logits.extend(z);
        caches.push(cache);
    }
    let (loss, dlogits) =
        cross_entropy_with_grad(&Tensor::from_vec(&[b, k], logits), labels, reduction)?;
    let mut grads = ModelParams::zeros(params.arch);
    for ((x, cache), dz) in batch
        .data()
        .chunks(per)
        .zip(&caches)
        .zip(dlogits.data().chunks(k))
    {
        backward_one(params, x, cache, dz, &mut grads);
    }
    Ok((loss, grads))
}

/// Parameter gradient of `sum(logit_grad * logits)`: the backward pass for
/// an arbitrary upstream gradient on the `[B, K]` logits.
pub fn backward_from_logit_grad<S: Scalar>(
    params: &ModelParams<S>,
    batch: &Tensor<S>,
    logit_grad: &Tensor<S>,
) -> Result<ModelParams<S>, NnError> {
    let (b, h, w) = check_batch(params, batch)?;
    let k = params.arch.num_classes;
    if logit_grad.shape() != [b, k] {
        return Err(NnError::ShapeMismatch(format!(
            "logit gradient {:?} for a batch of {b}",
            logit_grad.shape()
        )));
    }
    let mut grads = ModelParams::zeros(params.arch);
    if b == 0 {
        return Ok(grads);
    }
    let per = batch.len() / b;
    for (x, dz) in batch.data().chunks(per).zip(logit_grad.data().chunks(k)) {
        let (_, cache) = forward_one(params, x, h, w);
        backward_one(params, x, &cache, dz, &mut grads);
    }
    Ok(grads)
}

/// Which side of every non-differentiable point the network sits on for
/// this batch: the ReLU on/off state of each unit and each pooling
/// argmax. Finite differences are only meaningful when the pattern does
/// not change between the perturbed evaluations.
pub fn activation_pattern<S: Scalar>(
    params: &ModelParams<S>,
    batch: &Tensor<S>,
) -> Result<Vec<u32>, NnError> {
    let (b, h, w) = check_batch(params, batch)?;
    let per = batch.len() / b.max(1);
    let mut out = Vec::new();
    for x in batch.data().chunks(per.max(1)).take(b) {
        let (_, c) = forward_one(params, x, h, w);
        for a in [&c.a1, &c.a2, &c.a3] {
            out.extend(a.iter().map(|&v| u32::from(v > S::zero())));
        }
        out.extend_from_slice(&c.idx1);
        out.extend_from_slice(&c.idx2);
    }
    Ok(out)
}

/// Stacks equally sized images into a `[B, 1, H, W]` batch.
pub fn images_to_batch(images: &[&ImageTensor]) -> Result<Tensor<f32>, NnError> {
    let Some(first) = images.first() else {
        return Ok(Tensor::zeros(&[0, 1, 0, 0]));
    };
    let (h, w) = (first.height(), first.width());
    let mut data = Vec::with_capacity(images.len() * h * w);
    for img in images {
        if (img.height(), img.width()) != (h, w) {
            return Err(NnError::ShapeMismatch(format!(
                "image {}x{} in a batch of {h}x{w}",
                img.height(),
                img.width()
            )));
        }
        data.extend_from_slice(img.values());
    }
    Ok(Tensor::from_vec(&[images.len(), 1, h, w], data))
}
