use crate::dicom::{extract_pixel_data, parse_file, read_pixel_descriptor};

use super::{
    apply_modality_rescale, apply_photometric, apply_voi_window, resize_bilinear, ImageTensor,
    PipelineError, WindowSpec,
};

/// Side length of the square classifier input.
pub const MODEL_INPUT_SIZE: usize = 512;

/// Native-resolution presentation: parse, extract, rescale, window and
/// photometric correction.
pub fn render(bytes: &[u8]) -> Result<ImageTensor, PipelineError> {
    let file = parse_file(bytes)?;
    let desc = read_pixel_descriptor(&file.dataset)?;
    let raw = extract_pixel_data(&file.dataset, &desc)?;
    let values = apply_modality_rescale(&raw, desc.rescale_slope, desc.rescale_intercept);
    let window = match (desc.window_center, desc.window_width) {
        (Some(c), Some(w)) => Some(WindowSpec::new(c, w)?),
        _ => None,
    };
    let img = apply_voi_window(&values, window)?;
    Ok(apply_photometric(img, desc.photometric))
}

/// Full pipeline to the 512x512 model input. The image is stretched to
/// square; aspect ratio is not preserved.
pub fn preprocess(bytes: &[u8]) -> Result<ImageTensor, PipelineError> {
    preprocess_to(bytes, MODEL_INPUT_SIZE)
}

pub fn preprocess_to(bytes: &[u8], size: usize) -> Result<ImageTensor, PipelineError> {
    let img = render(bytes)?;
    Ok(resize_bilinear(&img, size, size))
}
