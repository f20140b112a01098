//! ONNX-model backend. Compiled in with the `onnx` feature; without it,
//! loading a model reports [`FeaturesError::BackendUnavailable`].
//!
//! Images are fed as `1 x 3 x side x side` f32 tensors, the single channel
//! replicated three times. Any input normalization the CNN expects must be
//! part of the exported graph.

use std::path::Path;

use super::{FeaturesError, ModelSidecar};
#[cfg(feature = "onnx")]
use crate::preprocess::TensorImage;

#[cfg(feature = "onnx")]
type Plan = tract_onnx::prelude::TypedRunnableModel<tract_onnx::prelude::TypedModel>;

pub struct OnnxExtractor {
    sidecar: ModelSidecar,
    #[cfg(feature = "onnx")]
    plan: Plan,
}

impl std::fmt::Debug for OnnxExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxExtractor").field("sidecar", &self.sidecar).finish_non_exhaustive()
    }
}

impl OnnxExtractor {
    pub fn name(&self) -> String {
        format!("onnx({})", self.sidecar.model_path.display())
    }

    pub fn input_side(&self) -> usize {
        self.sidecar.input_side
    }

    pub fn output_dim(&self) -> usize {
        self.sidecar.output_dim
    }

    pub fn sidecar(&self) -> &ModelSidecar {
        &self.sidecar
    }

    pub fn from_sidecar_path(path: &Path) -> Result<Self, FeaturesError> {
        Self::load(ModelSidecar::load(path)?)
    }

    #[cfg(not(feature = "onnx"))]
    pub fn load(sidecar: ModelSidecar) -> Result<Self, FeaturesError> {
        Err(FeaturesError::BackendUnavailable(format!(
            "{} needs the `onnx` feature",
            sidecar.model_path.display()
        )))
    }

    #[cfg(not(feature = "onnx"))]
    pub(crate) fn extract_batch(&self, _images: &[crate::preprocess::TensorImage]) -> Result<Vec<Vec<f32>>, FeaturesError> {
        Err(FeaturesError::BackendUnavailable("built without the `onnx` feature".into()))
    }

    #[cfg(feature = "onnx")]
    pub fn load(sidecar: ModelSidecar) -> Result<Self, FeaturesError> {
        use tract_onnx::prelude::*;
        let err = |e: TractError| FeaturesError::Inference(e.to_string());
        let side = sidecar.input_side;
        let plan = tract_onnx::onnx()
            .model_for_path(&sidecar.model_path)
            .map_err(err)?
            .with_input_names([sidecar.input_name.as_str()])
            .map_err(err)?
            .with_output_names([sidecar.output_name.as_str()])
            .map_err(err)?
            .with_input_fact(0, f32::fact([1, 3, side, side]).into())
            .map_err(err)?
            .into_optimized()
            .map_err(err)?
            .into_runnable()
            .map_err(err)?;
        Ok(Self { sidecar, plan })
    }

    #[cfg(feature = "onnx")]
    pub(crate) fn extract_batch(&self, images: &[TensorImage]) -> Result<Vec<Vec<f32>>, FeaturesError> {
        use tract_onnx::prelude::*;
        let side = self.sidecar.input_side;
        let mut rows = Vec::with_capacity(images.len());
        for img in images {
            let mut data = Vec::with_capacity(3 * side * side);
            for _ in 0..3 {
                data.extend_from_slice(&img.values);
            }
            let input = Tensor::from_shape(&[1, 3, side, side], &data)
                .map_err(|e| FeaturesError::Inference(e.to_string()))?;
            let out = self
                .plan
                .run(tvec!(input.into()))
                .map_err(|e| FeaturesError::Inference(e.to_string()))?;
            let view = out[0].to_array_view::<f32>().map_err(|e| FeaturesError::Inference(e.to_string()))?;
            let row: Vec<f32> = view.iter().copied().collect();
            if row.len() != self.sidecar.output_dim {
                return Err(FeaturesError::DimensionHeaderMismatch(format!(
                    "model produced {} features, sidecar declares {}",
                    row.len(),
                    self.sidecar.output_dim
                )));
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

#[cfg(all(test, not(feature = "onnx")))]
mod tests {
    use super::*;

    #[test]
    fn unavailable_without_feature() {
        let sidecar = ModelSidecar {
            model_path: "resnet50.onnx".into(),
            input_name: "input".into(),
            input_side: 224,
            output_name: "pool".into(),
            output_dim: 2048,
        };
        assert!(matches!(OnnxExtractor::load(sidecar), Err(FeaturesError::BackendUnavailable(_))));
    }
}
