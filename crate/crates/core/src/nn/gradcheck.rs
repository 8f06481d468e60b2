//! Central finite-difference checks of the analytic gradients, in f64.
//!
//! Each layer kernel is checked in isolation on a random linear projection
//! of its output, `L = sum(r * layer(x))`, so the upstream gradient is `r`.
//! Inputs to the piecewise-linear layers are drawn away from their kinks.
//! The whole-network checks perturb every parameter and skip the
//! coordinates whose perturbation flips a ReLU or pooling decision.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;

use super::layers::{
    conv3x3_backward, conv3x3_forward, global_avg_pool_backward, global_avg_pool_forward,
    linear_backward, linear_forward, maxpool2_backward, maxpool2_forward, relu_backward,
    relu_forward,
};
use super::loss::{cross_entropy_loss, cross_entropy_with_grad, Reduction};
use super::model::{
    activation_pattern, backward, backward_from_logit_grad, forward, Architecture, ModelParams,
};
use super::tensor::Tensor;
use super::NnError;

/// Finite-difference step.
pub const STEP: f64 = 1e-3;

/// Denominator floor for the relative error, so that two gradients that
/// are both essentially zero compare by absolute difference.
pub const REL_FLOOR: f64 = 1e-6;

/// `|a - n| / max(|a|, |n|, REL_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub coordinates: usize,
    /// Coordinates left out because the perturbation crossed a kink.
    pub skipped: usize,
}

fn uniform(rng: &mut Xoshiro256StarStar, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compares `analytic` against central differences of `f` around `x`.
fn compare(name: &str, x: &[f64], analytic: &[f64], f: impl Fn(&[f64]) -> f64) -> GradCheck {
    let mut xp = x.to_vec();
    let (mut worst, mut worst_abs) = (0.0f64, 0.0f64);
    for i in 0..x.len() {
        xp[i] = x[i] + STEP;
        let up = f(&xp);
        xp[i] = x[i] - STEP;
        let down = f(&xp);
        xp[i] = x[i];
        let n = (up - down) / (2.0 * STEP);
        worst = worst.max(relative_error(analytic[i], n));
        worst_abs = worst_abs.max((analytic[i] - n).abs());
    }
    GradCheck {
        name: name.to_string(),
        max_rel_error: worst,
        max_abs_error: worst_abs,
        coordinates: x.len(),
        skipped: 0,
    }
}

/// Values with magnitude at least `margin`, random sign.
fn away_from_zero(rng: &mut Xoshiro256StarStar, n: usize, margin: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.gen_range(margin..1.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect()
}

/// Checks every layer kernel once with inputs drawn from `seed`.
pub fn check_layers(seed: u64) -> Vec<GradCheck> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut out = Vec::new();

    // conv3x3: input, weight and bias gradients
    let (in_c, out_c, h, w) = (2, 3, 5, 6);
    let x = uniform(&mut rng, in_c * h * w, -1.0, 1.0);
    let wt = uniform(&mut rng, out_c * in_c * 9, -1.0, 1.0);
    let b = uniform(&mut rng, out_c, -1.0, 1.0);
    let r = uniform(&mut rng, out_c * h * w, -1.0, 1.0);
    let g = conv3x3_backward(&x, in_c, h, w, &wt, out_c, &r, true);
    out.push(compare(
        "conv3x3.input",
        &x,
        g.input.as_ref().expect("requested"),
        |x| dot(&conv3x3_forward(x, in_c, h, w, &wt, &b, out_c), &r),
    ));
    out.push(compare("conv3x3.weight", &wt, &g.weight, |wt| {
        dot(&conv3x3_forward(&x, in_c, h, w, wt, &b, out_c), &r)
    }));
    out.push(compare("conv3x3.bias", &b, &g.bias, |b| {
        dot(&conv3x3_forward(&x, in_c, h, w, &wt, b, out_c), &r)
    }));

    // relu: inputs at least 0.01 from the kink, ten times the step
    let x = away_from_zero(&mut rng, 40, 0.01);
    let r = uniform(&mut rng, 40, -1.0, 1.0);
    let mut act = x.clone();
    relu_forward(&mut act);
    let mut gr = r.clone();
    relu_backward(&act, &mut gr);
    out.push(compare("relu", &x, &gr, |x| {
        let mut y = x.to_vec();
        relu_forward(&mut y);
        dot(&y, &r)
    }));

    // maxpool2: every window holds distinct values at least 0.05 apart
    let (c, h, w) = (2, 4, 6);
    let mut x = vec![0.0; c * h * w];
    for ch in 0..c {
        for wy in 0..h / 2 {
            for wx in 0..w / 2 {
                let mut vals = [0.0, 0.05, 0.1, 0.15];
                let offset = rng.gen_range(-1.0..1.0);
                for i in (1..4).rev() {
                    vals.swap(i, rng.gen_range(0..=i));
                }
                for (k, v) in vals.iter().enumerate() {
                    let (dy, dx) = (k / 2, k % 2);
                    x[ch * h * w + (2 * wy + dy) * w + 2 * wx + dx] = offset + v;
                }
            }
        }
    }
    let (pooled, idx) = maxpool2_forward(&x, c, h, w);
    let r = uniform(&mut rng, pooled.len(), -1.0, 1.0);
    let gx = maxpool2_backward(&r, &idx, x.len());
    out.push(compare("maxpool2", &x, &gx, |x| {
        dot(&maxpool2_forward(x, c, h, w).0, &r)
    }));

    // global average pooling
    let (c, plane) = (3, 12);
    let x = uniform(&mut rng, c * plane, -1.0, 1.0);
    let r = uniform(&mut rng, c, -1.0, 1.0);
    let gx = global_avg_pool_backward(&r, plane);
    out.push(compare("global_avg_pool", &x, &gx, |x| {
        dot(&global_avg_pool_forward(x, c, plane), &r)
    }));

    // fully connected
    let (n_in, n_out) = (7, 5);
    let x = uniform(&mut rng, n_in, -1.0, 1.0);
    let wt = uniform(&mut rng, n_out * n_in, -1.0, 1.0);
    let b = uniform(&mut rng, n_out, -1.0, 1.0);
    let r = uniform(&mut rng, n_out, -1.0, 1.0);
    let g = linear_backward(&x, &wt, &r);
    out.push(compare("linear.input", &x, &g.input, |x| {
        dot(&linear_forward(x, &wt, &b), &r)
    }));
    out.push(compare("linear.weight", &wt, &g.weight, |wt| {
        dot(&linear_forward(&x, wt, &b), &r)
    }));
    out.push(compare("linear.bias", &b, &g.bias, |b| {
        dot(&linear_forward(&x, &wt, b), &r)
    }));

    // softmax cross-entropy on a batch of three, both reductions
    let z = uniform(&mut rng, 15, -3.0, 3.0);
    let labels: Vec<usize> = (0..3).map(|_| rng.gen_range(0..5)).collect();
    for (name, reduction) in [
        ("softmax_ce.mean", Reduction::Mean),
        ("softmax_ce.sum", Reduction::Sum),
    ] {
        let (_, gz) =
            cross_entropy_with_grad(&Tensor::from_vec(&[3, 5], z.clone()), &labels, reduction)
                .expect("valid logits");
        out.push(compare(name, &z, gz.data(), |z| {
            cross_entropy_loss(&Tensor::from_vec(&[3, 5], z.to_vec()), &labels, reduction)
                .expect("valid logits")
        }));
    }
    out
}

struct NetworkDraw {
    params: ModelParams<f64>,
    batch: Tensor<f64>,
    labels: [usize; 2],
    projection: Tensor<f64>,
}

fn network_draw(seed: u64, side: usize) -> NetworkDraw {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut params = ModelParams::<f64>::init_he_uniform(Architecture::ROUTERNET_MU, seed);
    for t in params.tensors_mut() {
        if t.shape().len() == 1 {
            for v in t.data_mut() {
                *v = rng.gen_range(-0.1..0.1);
            }
        }
    }
    let batch = Tensor::from_vec(
        &[2, 1, side, side],
        uniform(&mut rng, 2 * side * side, 0.0, 1.0),
    );
    let labels = [rng.gen_range(0..5), rng.gen_range(0..5)];
    let projection = Tensor::from_vec(&[2, 5], uniform(&mut rng, 10, -1.0, 1.0));
    NetworkDraw {
        params,
        batch,
        labels,
        projection,
    }
}

/// Central differences of `loss` for every parameter of `draw.params`,
/// skipping coordinates whose perturbation changes the activation pattern.
fn perturb_all(
    name: &str,
    draw: &mut NetworkDraw,
    analytic: &ModelParams<f64>,
    loss: impl Fn(&ModelParams<f64>, &Tensor<f64>) -> Result<f64, NnError>,
) -> Result<GradCheck, NnError> {
    let pattern = activation_pattern(&draw.params, &draw.batch)?;
    let names: Vec<String> = draw
        .params
        .tensors()
        .iter()
        .map(|(n, _)| n.clone())
        .collect();
    let mut check = GradCheck {
        name: name.into(),
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        coordinates: 0,
        skipped: 0,
    };
    for tensor in &names {
        let grad = analytic.get(tensor).expect("same layout").data();
        for (i, &a) in grad.iter().enumerate() {
            let orig = draw.params.get(tensor).expect("present").data()[i];
            let mut eval = |v: f64| -> Result<(f64, bool), NnError> {
                draw.params.get_mut(tensor).expect("present").data_mut()[i] = v;
                let stable = activation_pattern(&draw.params, &draw.batch)? == pattern;
                Ok((loss(&draw.params, &draw.batch)?, stable))
            };
            let (up, stable_up) = eval(orig + STEP)?;
            let (down, stable_down) = eval(orig - STEP)?;
            draw.params.get_mut(tensor).expect("present").data_mut()[i] = orig;
            if !(stable_up && stable_down) {
                check.skipped += 1;
                continue;
            }
            let n = (up - down) / (2.0 * STEP);
            check.coordinates += 1;
            check.max_rel_error = check.max_rel_error.max(relative_error(a, n));
            check.max_abs_error = check.max_abs_error.max((a - n).abs());
        }
    }
    Ok(check)
}

/// Whole-network backward pass against central differences of a random
/// linear projection of the logits, `L = sum(r * logits)`, perturbing every
/// parameter of a random two-image batch. Within a fixed activation
/// pattern the logits are linear in each single parameter, so the
/// differences carry no truncation error and the comparison isolates the
/// chain rule through all layers.
pub fn check_network(seed: u64, side: usize) -> Result<GradCheck, NnError> {
    let mut draw = network_draw(seed, side);
    let analytic = backward_from_logit_grad(&draw.params, &draw.batch, &draw.projection)?;
    let r = draw.projection.clone();
    perturb_all("network", &mut draw, &analytic, |p, batch| {
        Ok(dot(forward(p, batch)?.data(), r.data()))
    })
}

/// Gradient of the mean-reduced cross-entropy loss through the whole
/// network against central differences. The loss is curved in every
/// parameter, so tiny gradient entries carry an O(h^2) truncation error
/// that dominates their relative error; judge this check by
/// `max_abs_error`.
pub fn check_network_loss(seed: u64, side: usize) -> Result<GradCheck, NnError> {
    let mut draw = network_draw(seed, side);
    let labels = draw.labels;
    let (_, analytic) = backward(&draw.params, &draw.batch, &labels)?;
    perturb_all("network_loss", &mut draw, &analytic, |p, batch| {
        cross_entropy_loss(&forward(p, batch)?, &labels, Reduction::Mean)
    })
}
