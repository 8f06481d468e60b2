//! Procedural five-pattern dataset standing in for real radiographs when
//! exercising training end to end.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::class::BodyPartClass;
use crate::pixel::ImageTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub image: ImageTensor,
    pub label: BodyPartClass,
}

/// Amplitude of the per-pixel noise added to every structured pattern.
const PIXEL_NOISE: f64 = 0.08;

fn bars(size: usize, rng: &mut Xoshiro256StarStar, horizontal: bool) -> Vec<f64> {
    let cycles = 4.0 + rng.gen_range(-0.3..0.3);
    let phase = rng.gen_range(-0.4..0.4);
    let amplitude = rng.gen_range(0.3..0.45);
    let mut out = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let t = if horizontal { y } else { x } as f64 + 0.5;
            out.push(0.5 + amplitude * (2.0 * PI * cycles * t / size as f64 + phase).sin());
        }
    }
    out
}

fn disk(size: usize, rng: &mut Xoshiro256StarStar) -> Vec<f64> {
    let s = size as f64;
    let cx = s / 2.0 + rng.gen_range(-0.05..0.05) * s;
    let cy = s / 2.0 + rng.gen_range(-0.05..0.05) * s;
    let r = rng.gen_range(0.25..0.35) * s;
    let (inside, outside) = (rng.gen_range(0.75..0.9), rng.gen_range(0.1..0.25));
    let mut out = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
            out.push(if d <= r { inside } else { outside });
        }
    }
    out
}

fn cross(size: usize, rng: &mut Xoshiro256StarStar) -> Vec<f64> {
    let s = size as f64;
    let half_width = rng.gen_range(0.05..0.08) * s;
    let shift = rng.gen_range(-0.04..0.04) * s;
    let (on, off) = (rng.gen_range(0.75..0.9), rng.gen_range(0.1..0.25));
    let mut out = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5 - shift);
            // distance to the two diagonals, measured perpendicular to each
            let d1 = (fx - fy).abs() / 2f64.sqrt();
            let d2 = (fx + fy - s).abs() / 2f64.sqrt();
            out.push(if d1.min(d2) <= half_width { on } else { off });
        }
    }
    out
}

fn noise(size: usize, rng: &mut Xoshiro256StarStar) -> Vec<f64> {
    (0..size * size).map(|_| rng.gen_range(0.0..1.0)).collect()
}

fn pattern(class: BodyPartClass, size: usize, rng: &mut Xoshiro256StarStar) -> ImageTensor {
    let base = match class {
        BodyPartClass::Abdominal => bars(size, rng, true),
        BodyPartClass::AdultChest => bars(size, rng, false),
        BodyPartClass::PediatricChest => disk(size, rng),
        BodyPartClass::Spine => cross(size, rng),
        BodyPartClass::Others => {
            return ImageTensor::new(
                size,
                size,
                noise(size, rng).into_iter().map(|v| v as f32).collect(),
            )
        }
    };
    let values = base
        .into_iter()
        .map(|v| (v + rng.gen_range(-PIXEL_NOISE..PIXEL_NOISE)).clamp(0.0, 1.0) as f32)
        .collect();
    ImageTensor::new(size, size, values)
}

/// `n_per_class` jittered examples of each pattern, interleaved so that
/// example `i` has class code `i % 5`: horizontal bars (abdominal),
/// vertical bars (adult chest), a centered disk (pediatric chest), a
/// diagonal cross (spine) and uniform noise (others).
pub fn make_synthetic_dataset(
    n_per_class: usize,
    image_size: usize,
    seed: u64,
) -> Vec<LabeledExample> {
    assert!(n_per_class >= 1, "need at least one example per class");
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_per_class * BodyPartClass::ALL.len());
    for _ in 0..n_per_class {
        for class in BodyPartClass::ALL {
            out.push(LabeledExample {
                image: pattern(class, image_size, &mut rng),
                label: class,
            });
        }
    }
    out
}
