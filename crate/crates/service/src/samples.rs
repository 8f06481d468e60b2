//! Encodes synthetic training patterns as DICOM files, for demos and
//! end-to-end tests.

use router_core::dicom::{encode_synthetic, SyntheticImage};
use router_core::pixel::ImageTensor;

/// Largest stored value; samples are 12-bit.
const FULL_SCALE: f64 = 4095.0;

/// Stores `image` as 12-bit MONOCHROME2 with a window spanning the full
/// range, so the pipeline reproduces the pattern to within one step.
pub fn image_to_dicom(image: &ImageTensor, sop_instance_uid: &str) -> Vec<u8> {
    let pixels: Vec<u16> = image
        .values()
        .iter()
        .map(|&v| (v as f64 * FULL_SCALE).round() as u16)
        .collect();
    encode_synthetic(&SyntheticImage {
        sop_instance_uid,
        rows: image.height() as u16,
        cols: image.width() as u16,
        photometric: "MONOCHROME2",
        pixels: &pixels,
        window: Some((2048.0, 4096.0)),
    })
}
