//! Single-example layer kernels on `[channels, height, width]` buffers.
//! Each forward has a matching backward that returns input and parameter
//! gradients for a given upstream gradient.

use super::tensor::Scalar;

/// Output rows (or columns) `y` for which `y + k - 1` is a valid input
/// index, for kernel offset `k` in `0..3` and padding 1.
fn valid_span(n: usize, k: usize) -> (usize, usize) {
    match k {
        0 => (1, n),
        1 => (0, n),
        _ => (0, n.saturating_sub(1)),
    }
}

/// 3x3 convolution, stride 1, zero padding 1. Weight layout is
/// `[out_c, in_c, 3, 3]`.
pub fn conv3x3_forward<S: Scalar>(
    input: &[S],
    in_c: usize,
    h: usize,
    w: usize,
    weight: &[S],
    bias: &[S],
    out_c: usize,
) -> Vec<S> {
    let plane = h * w;
    debug_assert_eq!(input.len(), in_c * plane);
    debug_assert_eq!(weight.len(), out_c * in_c * 9);
    let mut out = vec![S::zero(); out_c * plane];
    for oc in 0..out_c {
        let o = &mut out[oc * plane..(oc + 1) * plane];
        o.fill(bias[oc]);
        for ic in 0..in_c {
            let inp = &input[ic * plane..(ic + 1) * plane];
            for ky in 0..3 {
                let (y0, y1) = valid_span(h, ky);
                for kx in 0..3 {
                    let (x0, x1) = valid_span(w, kx);
                    if x0 >= x1 {
                        continue;
                    }
                    let wv = weight[((oc * in_c + ic) * 3 + ky) * 3 + kx];
                    for y in y0..y1 {
                        let iy = y + ky - 1;
                        let orow = &mut o[y * w + x0..y * w + x1];
                        let irow = &inp[iy * w + x0 + kx - 1..iy * w + x1 + kx - 1];
                        for (a, &b) in orow.iter_mut().zip(irow) {
                            *a += wv * b;
                        }
                    }
                }
            }
        }
    }
    out
}

pub struct ConvGrads<S> {
    pub weight: Vec<S>,
    pub bias: Vec<S>,
    pub input: Option<Vec<S>>,
}

#[allow(clippy::too_many_arguments)]
pub fn conv3x3_backward<S: Scalar>(
    input: &[S],
    in_c: usize,
    h: usize,
    w: usize,
    weight: &[S],
    out_c: usize,
    grad_out: &[S],
    want_input_grad: bool,
) -> ConvGrads<S> {
    let plane = h * w;
    let mut gw = vec![S::zero(); weight.len()];
    let mut gb = vec![S::zero(); out_c];
    let mut gin = want_input_grad.then(|| vec![S::zero(); in_c * plane]);
    for oc in 0..out_c {
        let g = &grad_out[oc * plane..(oc + 1) * plane];
        gb[oc] = g.iter().fold(S::zero(), |acc, &v| acc + v);
        for ic in 0..in_c {
            let inp = &input[ic * plane..(ic + 1) * plane];
            for ky in 0..3 {
                let (y0, y1) = valid_span(h, ky);
                for kx in 0..3 {
                    let (x0, x1) = valid_span(w, kx);
                    if x0 >= x1 {
                        continue;
                    }
                    let widx = ((oc * in_c + ic) * 3 + ky) * 3 + kx;
                    let mut acc = S::zero();
                    for y in y0..y1 {
                        let iy = y + ky - 1;
                        let grow = &g[y * w + x0..y * w + x1];
                        let irow = &inp[iy * w + x0 + kx - 1..iy * w + x1 + kx - 1];
                        for (&a, &b) in grow.iter().zip(irow) {
                            acc += a * b;
                        }
                    }
                    gw[widx] += acc;
                    if let Some(gin) = gin.as_mut() {
                        let wv = weight[widx];
                        let gplane = &mut gin[ic * plane..(ic + 1) * plane];
                        for y in y0..y1 {
                            let iy = y + ky - 1;
                            let grow = &g[y * w + x0..y * w + x1];
                            let drow = &mut gplane[iy * w + x0 + kx - 1..iy * w + x1 + kx - 1];
                            for (d, &a) in drow.iter_mut().zip(grow) {
                                *d += wv * a;
                            }
                        }
                    }
                }
            }
        }
    }
    ConvGrads {
        weight: gw,
        bias: gb,
        input: gin,
    }
}

pub fn relu_forward<S: Scalar>(x: &mut [S]) {
    for v in x {
        if *v < S::zero() {
            *v = S::zero();
        }
    }
}

/// Zeroes the gradient wherever the activation output was not positive.
pub fn relu_backward<S: Scalar>(activated: &[S], grad: &mut [S]) {
    for (g, &a) in grad.iter_mut().zip(activated) {
        if a <= S::zero() {
            *g = S::zero();
        }
    }
}

/// 2x2 max pooling, stride 2. Odd trailing rows/columns are dropped. Also
/// returns the flat input index of each selected maximum (first wins ties).
pub fn maxpool2_forward<S: Scalar>(
    input: &[S],
    c: usize,
    h: usize,
    w: usize,
) -> (Vec<S>, Vec<u32>) {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut idx = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let base = ch * h * w;
        for y in 0..oh {
            for x in 0..ow {
                let mut best = base + 2 * y * w + 2 * x;
                for cand in [best + 1, best + w, best + w + 1] {
                    if input[cand] > input[best] {
                        best = cand;
                    }
                }
                out.push(input[best]);
                idx.push(best as u32);
            }
        }
    }
    (out, idx)
}

pub fn maxpool2_backward<S: Scalar>(grad_out: &[S], indices: &[u32], input_len: usize) -> Vec<S> {
    let mut gin = vec![S::zero(); input_len];
    for (&g, &i) in grad_out.iter().zip(indices) {
        gin[i as usize] += g;
    }
    gin
}

pub fn global_avg_pool_forward<S: Scalar>(input: &[S], c: usize, plane: usize) -> Vec<S> {
    let n = S::of(plane as f64);
    (0..c)
        .map(|ch| {
            input[ch * plane..(ch + 1) * plane]
                .iter()
                .fold(S::zero(), |a, &v| a + v)
                / n
        })
        .collect()
}

pub fn global_avg_pool_backward<S: Scalar>(grad_out: &[S], plane: usize) -> Vec<S> {
    let n = S::of(plane as f64);
    grad_out
        .iter()
        .flat_map(|&g| std::iter::repeat_n(g / n, plane))
        .collect()
}

/// Fully connected layer; weight layout `[out, in]`.
pub fn linear_forward<S: Scalar>(x: &[S], weight: &[S], bias: &[S]) -> Vec<S> {
    let n_in = x.len();
    bias.iter()
        .enumerate()
        .map(|(o, &b)| {
            weight[o * n_in..(o + 1) * n_in]
                .iter()
                .zip(x)
                .fold(b, |acc, (&wv, &xv)| acc + wv * xv)
        })
        .collect()
}

pub struct LinearGrads<S> {
    pub weight: Vec<S>,
    pub bias: Vec<S>,
    pub input: Vec<S>,
}

pub fn linear_backward<S: Scalar>(x: &[S], weight: &[S], grad_out: &[S]) -> LinearGrads<S> {
    let n_in = x.len();
    let mut gw = vec![S::zero(); weight.len()];
    let mut gx = vec![S::zero(); n_in];
    for (o, &g) in grad_out.iter().enumerate() {
        for i in 0..n_in {
            gw[o * n_in + i] = g * x[i];
            gx[i] += weight[o * n_in + i] * g;
        }
    }
    LinearGrads {
        weight: gw,
        bias: grad_out.to_vec(),
        input: gx,
    }
}
