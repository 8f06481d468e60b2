use crate::dicom::{Photometric, PixelMatrix};

use super::{ImageTensor, PipelineError};

/// Rescaled (modality) values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub center: f64,
    pub width: f64,
}

impl WindowSpec {
    pub fn new(center: f64, width: f64) -> Result<Self, PipelineError> {
        if width.is_nan() || width < 1.0 || !center.is_finite() || !width.is_finite() {
            return Err(PipelineError::InvalidWindow(width));
        }
        Ok(Self { center, width })
    }

    /// Linear VOI function mapped onto `[0, 1]`.
    pub fn apply(&self, v: f64) -> f64 {
        let c = self.center - 0.5;
        let half = (self.width - 1.0) / 2.0;
        if v <= c - half {
            0.0
        } else if v > c + half {
            1.0
        } else if self.width == 1.0 {
            // Degenerate window: the open interval above is empty.
            1.0
        } else {
            ((v - c) / (self.width - 1.0) + 0.5).clamp(0.0, 1.0)
        }
    }
}

pub fn apply_modality_rescale(raw: &PixelMatrix, slope: f64, intercept: f64) -> ValueMatrix {
    ValueMatrix {
        rows: raw.rows,
        cols: raw.cols,
        data: raw
            .data
            .iter()
            .map(|&v| v as f64 * slope + intercept)
            .collect(),
    }
}

/// Applies the VOI window, or min-max normalization when no window is given.
/// A constant image normalizes to all zeros.
pub fn apply_voi_window(
    values: &ValueMatrix,
    window: Option<WindowSpec>,
) -> Result<ImageTensor, PipelineError> {
    if values.data.is_empty() {
        return Err(PipelineError::EmptyImage);
    }
    let out: Vec<f32> = match window {
        Some(w) => {
            if w.width.is_nan() || w.width < 1.0 {
                return Err(PipelineError::InvalidWindow(w.width));
            }
            values.data.iter().map(|&v| w.apply(v) as f32).collect()
        }
        None => {
            let (lo, hi) = values
                .data
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            if hi > lo {
                let span = hi - lo;
                values
                    .data
                    .iter()
                    .map(|&v| ((v - lo) / span).clamp(0.0, 1.0) as f32)
                    .collect()
            } else {
                vec![0.0; values.data.len()]
            }
        }
    };
    Ok(ImageTensor::new(values.rows, values.cols, out))
}

/// MONOCHROME1 images are inverted so that higher always means brighter.
pub fn apply_photometric(img: ImageTensor, photometric: Photometric) -> ImageTensor {
    match photometric {
        Photometric::Monochrome2 => img,
        Photometric::Monochrome1 => {
            let (h, w) = (img.height(), img.width());
            let values = img.into_values().into_iter().map(|v| 1.0 - v).collect();
            ImageTensor::new(h, w, values)
        }
    }
}
