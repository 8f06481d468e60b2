use serde::{Deserialize, Serialize};

use super::model::ModelParams;
use super::tensor::{Scalar, Tensor};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// Adam step counter and per-parameter first and second moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<S> {
    pub t: u64,
    pub m: Vec<Tensor<S>>,
    pub v: Vec<Tensor<S>>,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(params: &ModelParams<S>) -> Self {
        let zeros: Vec<Tensor<S>> = params
            .tensors()
            .iter()
            .map(|(_, t)| Tensor::zeros(t.shape()))
            .collect();
        Self {
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step<S: Scalar>(
    params: &mut ModelParams<S>,
    grads: &ModelParams<S>,
    state: &mut AdamState<S>,
    lr: f64,
) {
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (S::of(ADAM_BETA1), S::of(ADAM_BETA2));
    let one = S::one();
    let c1 = one - b1.powi(t);
    let c2 = one - b2.powi(t);
    let lr = S::of(lr);
    let eps = S::of(ADAM_EPSILON);
    for (((p, (_, g)), m), v) in params
        .tensors_mut()
        .zip(grads.tensors())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        assert_eq!(
            p.shape(),
            g.shape(),
            "gradient shape differs from parameter"
        );
        for (((pv, &gv), mv), vv) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut().iter_mut())
            .zip(v.data_mut().iter_mut())
        {
            *mv = b1 * *mv + (one - b1) * gv;
            *vv = b2 * *vv + (one - b2) * gv * gv;
            let m_hat = *mv / c1;
            let v_hat = *vv / c2;
            *pv = *pv - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// Cosine annealing with warm restarts. Progress is measured in epochs
/// (fractional within an epoch); cycle `i` lasts `t0 * t_mult^i` epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub eta_max: f64,
    pub eta_min: f64,
    pub t0: f64,
    pub t_mult: f64,
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self {
            eta_max: 1e-4,
            eta_min: 0.0,
            t0: 10.0,
            t_mult: 2.0,
        }
    }
}

impl LrSchedule {
    /// Rate at a position `t_cur` within a cycle of length `t_i`.
    pub fn cosine(&self, t_cur: f64, t_i: f64) -> f64 {
        self.eta_min
            + 0.5
                * (self.eta_max - self.eta_min)
                * (1.0 + (std::f64::consts::PI * t_cur / t_i).cos())
    }

    /// Locates `progress` within its restart cycle, returning `(t_cur, t_i)`.
    pub fn cycle_position(&self, progress: f64) -> (f64, f64) {
        let mut start = 0.0;
        let mut t_i = self.t0;
        while progress >= start + t_i {
            start += t_i;
            t_i *= self.t_mult;
        }
        (progress - start, t_i)
    }

    pub fn lr_at(&self, progress: f64) -> f64 {
        let (t_cur, t_i) = self.cycle_position(progress.max(0.0));
        self.cosine(t_cur, t_i).clamp(self.eta_min, self.eta_max)
    }
}
