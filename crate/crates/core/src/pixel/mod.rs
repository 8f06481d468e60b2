//! Turns stored pixel values into the normalized grayscale tensor the
//! classifier consumes, plus PNG renditions for review.

mod lut;
mod pipeline;
mod png;
mod resize;

pub use lut::{
    apply_modality_rescale, apply_photometric, apply_voi_window, ValueMatrix, WindowSpec,
};
pub use pipeline::{preprocess, preprocess_to, render, MODEL_INPUT_SIZE};
pub use png::export_png;
pub use resize::resize_bilinear;

use crate::dicom::DicomError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dicom(#[from] DicomError),
    #[error("window width {0} is below 1")]
    InvalidWindow(f64),
    #[error("image has no pixels")]
    EmptyImage,
}

/// Grayscale image with every value in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl ImageTensor {
    /// Panics if the buffer length disagrees with the shape or a value is
    /// outside `[0, 1]`.
    pub fn new(height: usize, width: usize, values: Vec<f32>) -> Self {
        assert_eq!(values.len(), height * width, "buffer does not match shape");
        assert!(
            values.iter().all(|v| (0.0..=1.0).contains(v)),
            "image values must lie in [0, 1]"
        );
        Self {
            height,
            width,
            values,
        }
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.width + col]
    }
}
