use super::ImageTensor;

struct Tap {
    lo: usize,
    hi: usize,
    frac: f64,
}

/// Source taps for each destination index using half-pixel centers:
/// `src = (dst + 0.5) * in / out - 0.5`, clamped to the image.
fn taps(in_len: usize, out_len: usize) -> Vec<Tap> {
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (in_len - 1) as f64);
            let lo = s.floor() as usize;
            let hi = (lo + 1).min(in_len - 1);
            Tap {
                lo,
                hi,
                frac: s - lo as f64,
            }
        })
        .collect()
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let v = a + t * (b - a);
    v.clamp(a.min(b), a.max(b))
}

/// Bilinear resampling to exactly `out_h` x `out_w`.
pub fn resize_bilinear(img: &ImageTensor, out_h: usize, out_w: usize) -> ImageTensor {
    assert!(out_h > 0 && out_w > 0, "output size must be positive");
    let (h, w) = (img.height(), img.width());
    if (h, w) == (out_h, out_w) {
        return img.clone();
    }
    let rows = taps(h, out_h);
    let cols = taps(w, out_w);
    let src = img.values();
    let mut out = Vec::with_capacity(out_h * out_w);
    for r in &rows {
        let top = &src[r.lo * w..(r.lo + 1) * w];
        let bottom = &src[r.hi * w..(r.hi + 1) * w];
        for c in &cols {
            let upper = lerp(top[c.lo] as f64, top[c.hi] as f64, c.frac);
            let lower = lerp(bottom[c.lo] as f64, bottom[c.hi] as f64, c.frac);
            out.push(lerp(upper, lower, r.frac) as f32);
        }
    }
    ImageTensor::new(out_h, out_w, out)
}
