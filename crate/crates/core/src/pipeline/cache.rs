//! Preprocessed-tensor cache. Files are `TNS1`, u32 LE side, then side^2 f32
//! LE values, named by the SHA-256 of the source file bytes' hash and the
//! preprocessing settings.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::preprocess::{PreprocessConfig, TensorImage};

const TENSOR_MAGIC: &[u8; 4] = b"TNS1";

/// Cache key for one source file under one preprocessing configuration.
pub fn tensor_key(content_hash: &str, cfg: &PreprocessConfig) -> String {
    let mut h = Sha256::new();
    h.update(content_hash.as_bytes());
    h.update(b"\n");
    h.update(serde_json::to_string(cfg).expect("config serializes").as_bytes());
    hex::encode(h.finalize())
}

pub fn tensor_path(cache_dir: &Path, key: &str) -> PathBuf {
    cache_dir.join(format!("{key}.tns"))
}

pub fn encode_tensor(img: &TensorImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 * img.values.len());
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&(img.side as u32).to_le_bytes());
    for v in &img.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_tensor(bytes: &[u8]) -> io::Result<TensorImage> {
    let invalid = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    if bytes.len() < 8 || &bytes[..4] != TENSOR_MAGIC {
        return Err(invalid("not a tensor file"));
    }
    let side = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if side.checked_mul(side).and_then(|n| n.checked_mul(4)) != Some(body.len()) {
        return Err(invalid("tensor size does not match header"));
    }
    let values = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(TensorImage::new(side, values))
}

/// Writes through a temporary file so readers never see a partial tensor.
pub fn write_tensor(path: &Path, img: &TensorImage) -> io::Result<()> {
    let tmp = path.with_extension("tns.tmp");
    fs::write(&tmp, encode_tensor(img))?;
    fs::rename(tmp, path)
}

pub fn read_tensor(path: &Path) -> io::Result<TensorImage> {
    decode_tensor(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let img = TensorImage::new(2, vec![0.0, 0.25, 1.0, -0.5]);
        assert_eq!(decode_tensor(&encode_tensor(&img)).unwrap(), img);
        let bytes = encode_tensor(&img);
        assert!(decode_tensor(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn key_depends_on_config() {
        let a = PreprocessConfig::default();
        let b = PreprocessConfig { out_side: 64, ..a.clone() };
        assert_ne!(tensor_key("abc", &a), tensor_key("abc", &b));
        assert_eq!(tensor_key("abc", &a), tensor_key("abc", &a.clone()));
        assert_ne!(tensor_key("abc", &a), tensor_key("abd", &a));
    }
}
