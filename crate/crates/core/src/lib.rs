//! Core of the DICOM imaging router: file parsing, pixel preparation, the
//! built-in body-part classifier and the evaluation harness.

pub mod dicom;
pub mod metrics;
pub mod nn;
pub mod pixel;
