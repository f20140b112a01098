use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::FeaturesError;

/// JSON description of an exported CNN feature model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSidecar {
    pub model_path: PathBuf,
    pub input_name: String,
    pub input_side: usize,
    pub output_name: String,
    pub output_dim: usize,
}

impl ModelSidecar {
    pub fn from_json(text: &str) -> Result<Self, FeaturesError> {
        let s: ModelSidecar = serde_json::from_str(text).map_err(|e| FeaturesError::Sidecar(e.to_string()))?;
        if s.input_side == 0 || s.output_dim == 0 {
            return Err(FeaturesError::Sidecar("input_side and output_dim must be positive".into()));
        }
        Ok(s)
    }

    /// Reads a sidecar; a relative `model_path` resolves against the
    /// sidecar's directory.
    pub fn load(path: &Path) -> Result<Self, FeaturesError> {
        let mut s = Self::from_json(&std::fs::read_to_string(path)?)?;
        if s.model_path.is_relative() {
            if let Some(dir) = path.parent() {
                s.model_path = dir.join(&s.model_path);
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_export_sidecar() {
        let text = r#"{"model_path":"resnet50.onnx","input_name":"input","input_side":224,
                       "output_name":"pooled","output_dim":2048}"#;
        let s = ModelSidecar::from_json(text).unwrap();
        assert_eq!(s.output_dim, 2048);
        assert_eq!(s.input_side, 224);
    }

    #[test]
    fn rejects_unknown_keys_and_zero_dims() {
        let extra = r#"{"model_path":"m","input_name":"i","input_side":1,"output_name":"o","output_dim":1,"x":1}"#;
        assert!(ModelSidecar::from_json(extra).is_err());
        let zero = r#"{"model_path":"m","input_name":"i","input_side":1,"output_name":"o","output_dim":0}"#;
        assert!(ModelSidecar::from_json(zero).is_err());
    }

    #[test]
    fn relative_model_path_resolves_next_to_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, r#"{"model_path":"m.onnx","input_name":"i","input_side":4,"output_name":"o","output_dim":2}"#).unwrap();
        assert_eq!(ModelSidecar::load(&p).unwrap().model_path, dir.path().join("m.onnx"));
    }
}
