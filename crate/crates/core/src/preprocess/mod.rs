//! Slice preprocessing: HU conversion, background stripping, tilt
//! correction, cropping, padding and normalization.
//!
//! No smoothing filter is applied. [`estimate_noise_sigma`] is provided to
//! measure how noisy a normalized slice is.

mod crop;
mod image;
mod mask;
mod noise;
pub mod pgm;
mod tilt;

pub use crop::{crop_and_pad, normalize_hu, HU_WINDOW_MAX, HU_WINDOW_MIN};
pub use image::{BinaryMask, HuImage, TensorImage, AIR_HU};
pub use mask::brain_mask;
pub use noise::estimate_noise_sigma;
pub use tilt::{mask_orientation_deg, tilt_correct};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dicom::CtSlice;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("image must be at least 3x3, got {width}x{height}")]
    ImageTooSmall { width: usize, height: usize },
    #[error("mask is empty")]
    EmptyMask,
    #[error("mask is {mask_w}x{mask_h} but image is {img_w}x{img_h}")]
    MaskShapeMismatch { mask_w: usize, mask_h: usize, img_w: usize, img_h: usize },
    #[error("output side must be positive")]
    ZeroOutputSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Pixels above this HU value are foreground candidates.
    pub threshold_hu: f64,
    pub out_side: usize,
    pub tilt_enabled: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { threshold_hu: -500.0, out_side: 224, tilt_enabled: true }
    }
}

/// Stored pixels to Hounsfield units: `value = pixel * slope + intercept`.
pub fn to_hu(slice: &CtSlice) -> HuImage {
    let values = slice
        .pixels
        .iter()
        .map(|&p| f64::from(p) * slice.rescale_slope + slice.rescale_intercept)
        .collect();
    let img = HuImage::new(slice.cols, slice.rows, values);
    img.log_out_of_range();
    img
}

/// Intermediate images of one run, kept for debug dumps.
#[derive(Debug, Clone)]
pub struct Stages {
    pub hu: HuImage,
    pub mask: BinaryMask,
    pub aligned: HuImage,
    pub angle_deg: f64,
    pub output: TensorImage,
    pub used_fallback: bool,
}

/// Runs the full chain and returns the final image.
pub fn preprocess_slice(slice: &CtSlice, cfg: &PreprocessConfig) -> Result<TensorImage, PreprocessError> {
    preprocess_stages(slice, cfg).map(|s| s.output)
}

/// Runs `to_hu -> brain_mask -> tilt_correct -> crop_and_pad`, keeping every stage.
///
/// An empty mask falls back to a full-frame crop without tilt correction.
pub fn preprocess_stages(slice: &CtSlice, cfg: &PreprocessConfig) -> Result<Stages, PreprocessError> {
    if cfg.out_side == 0 {
        return Err(PreprocessError::ZeroOutputSide);
    }
    let hu = to_hu(slice);
    let mask = brain_mask(&hu, cfg.threshold_hu);
    if mask.is_empty() {
        warn!(
            "patient {} instance {}: nothing above {} HU, using full frame",
            slice.patient_id, slice.instance_number, cfg.threshold_hu
        );
        let full = BinaryMask::filled(hu.width, hu.height, true);
        let output = crop_and_pad(&hu, &full, cfg.out_side)?;
        return Ok(Stages { aligned: hu.clone(), hu, mask: full, angle_deg: 0.0, output, used_fallback: true });
    }
    let (aligned, aligned_mask, angle_deg) = if cfg.tilt_enabled {
        tilt_correct(&hu, &mask)?
    } else {
        (hu.clone(), mask.clone(), 0.0)
    };
    // Rotation can push a thin mask below the 0.5 resampling cut.
    let crop_mask = if aligned_mask.is_empty() {
        BinaryMask::filled(aligned.width, aligned.height, true)
    } else {
        aligned_mask
    };
    let output = crop_and_pad(&aligned, &crop_mask, cfg.out_side)?;
    Ok(Stages { hu, mask, aligned, angle_deg, output, used_fallback: false })
}
