//! Image-to-vector feature extraction and the binary feature store.
//!
//! Two backends exist: a seeded toy extractor (always available) and an
//! ONNX-model backend compiled in with the `onnx` cargo feature. The model
//! backend reads the JSON sidecar written by the export utility, which names
//! the input/output tensors and the pooled feature width.

mod matrix;
mod onnx;
mod sidecar;
mod store;
mod toy;

pub use matrix::FeatureMatrix;
pub use onnx::OnnxExtractor;
pub use sidecar::ModelSidecar;
pub use store::{load_feature_store, read_feature_store, save_feature_store, write_feature_store, STORE_MAGIC};
pub use toy::{toy_extractor, ToyExtractor};

use rayon::prelude::*;
use thiserror::Error;

use crate::preprocess::TensorImage;

#[derive(Debug, Error)]
pub enum FeaturesError {
    #[error("image side {got} does not match extractor input side {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("model backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("feature store has bad magic bytes")]
    BadMagic,
    #[error("feature store dimension mismatch: {0}")]
    DimensionHeaderMismatch(String),
    #[error("feature store truncated: expected {expected} bytes, found {found}")]
    TruncatedStore { expected: usize, found: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid model sidecar: {0}")]
    Sidecar(String),
    #[error("model inference failed: {0}")]
    Inference(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A configured image-to-vector mapping.
#[derive(Debug)]
pub enum FeatureExtractor {
    Toy(ToyExtractor),
    Onnx(OnnxExtractor),
}

impl FeatureExtractor {
    pub fn name(&self) -> String {
        match self {
            FeatureExtractor::Toy(t) => format!("toy(seed={}, d={})", t.seed(), t.output_dim()),
            FeatureExtractor::Onnx(o) => o.name(),
        }
    }

    pub fn input_side(&self) -> usize {
        match self {
            FeatureExtractor::Toy(t) => t.input_side(),
            FeatureExtractor::Onnx(o) => o.input_side(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            FeatureExtractor::Toy(t) => t.output_dim(),
            FeatureExtractor::Onnx(o) => o.output_dim(),
        }
    }
}

/// One feature row per image, in input order.
pub fn extract_features(images: &[TensorImage], ex: &FeatureExtractor) -> Result<FeatureMatrix, FeaturesError> {
    let side = ex.input_side();
    if let Some(bad) = images.iter().find(|img| img.side != side) {
        return Err(FeaturesError::ShapeMismatch { expected: side, got: bad.side });
    }
    let d = ex.output_dim();
    let rows: Vec<Vec<f32>> = match ex {
        FeatureExtractor::Toy(t) => images.par_iter().map(|img| t.extract(img)).collect(),
        FeatureExtractor::Onnx(o) => o.extract_batch(images)?,
    };
    let mut data = Vec::with_capacity(rows.len() * d);
    for row in &rows {
        data.extend_from_slice(row);
    }
    FeatureMatrix::new(rows.len(), d, data)
}
