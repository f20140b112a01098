//! `FVS1` feature store: magic, u32 N, u32 D, N*D little-endian f32
//! row-major, then N u8 labels.

use std::io::{Read, Write};
use std::path::Path;

use super::{FeatureMatrix, FeaturesError};

pub const STORE_MAGIC: &[u8; 4] = b"FVS1";
const HEADER_LEN: usize = 12;

pub fn write_feature_store<W: Write>(mut w: W, fm: &FeatureMatrix, labels: &[u8]) -> Result<(), FeaturesError> {
    if labels.len() != fm.n() {
        return Err(FeaturesError::DimensionHeaderMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            fm.n()
        )));
    }
    let n = u32::try_from(fm.n()).map_err(|_| FeaturesError::DimensionHeaderMismatch("N exceeds u32".into()))?;
    let d = u32::try_from(fm.d()).map_err(|_| FeaturesError::DimensionHeaderMismatch("D exceeds u32".into()))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + fm.data().len() * 4 + labels.len());
    buf.extend_from_slice(STORE_MAGIC);
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&d.to_le_bytes());
    for v in fm.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(labels);
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_feature_store<R: Read>(mut r: R) -> Result<(FeatureMatrix, Vec<u8>), FeaturesError> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 4 || &buf[..4] != STORE_MAGIC {
        return Err(FeaturesError::BadMagic);
    }
    if buf.len() < HEADER_LEN {
        return Err(FeaturesError::TruncatedStore { expected: HEADER_LEN, found: buf.len() });
    }
    let n = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
    let expected = HEADER_LEN + n * d * 4 + n;
    if buf.len() < expected {
        return Err(FeaturesError::TruncatedStore { expected, found: buf.len() });
    }
    if buf.len() > expected {
        return Err(FeaturesError::DimensionHeaderMismatch(format!(
            "header declares {n}x{d} ({expected} bytes) but file has {}",
            buf.len()
        )));
    }
    let body = &buf[HEADER_LEN..HEADER_LEN + n * d * 4];
    let data = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    let labels = buf[HEADER_LEN + n * d * 4..].to_vec();
    Ok((FeatureMatrix::new(n, d, data)?, labels))
}

pub fn save_feature_store(fm: &FeatureMatrix, labels: &[u8], path: &Path) -> Result<(), FeaturesError> {
    let mut buf = Vec::new();
    write_feature_store(&mut buf, fm, labels)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_feature_store(path: &Path) -> Result<(FeatureMatrix, Vec<u8>), FeaturesError> {
    read_feature_store(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (FeatureMatrix, Vec<u8>) {
        let fm = FeatureMatrix::new(3, 2, vec![0.0, -1.5, 3.25, f32::MIN_POSITIVE, 1e30, -0.0]).unwrap();
        (fm, vec![2, 0, 1])
    }

    #[test]
    fn layout_is_bit_exact() {
        let (fm, labels) = sample();
        let mut buf = Vec::new();
        write_feature_store(&mut buf, &fm, &labels).unwrap();
        assert_eq!(&buf[..4], b"FVS1");
        assert_eq!(&buf[4..8], &3u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[12..16], &0.0f32.to_le_bytes());
        assert_eq!(&buf[16..20], &(-1.5f32).to_le_bytes());
        assert_eq!(&buf[buf.len() - 3..], &[2, 0, 1]);
        assert_eq!(buf.len(), 12 + 24 + 3);
    }

    #[test]
    fn wrong_magic() {
        assert!(matches!(read_feature_store(&b"FVS2\0\0\0\0\0\0\0\0"[..]), Err(FeaturesError::BadMagic)));
    }

    #[test]
    fn header_claims_more_rows_than_present() {
        let fm = FeatureMatrix::new(50, 4, vec![1.0; 200]).unwrap();
        let mut buf = Vec::new();
        write_feature_store(&mut buf, &fm, &[0; 50]).unwrap();
        buf[4..8].copy_from_slice(&100u32.to_le_bytes());
        assert!(matches!(read_feature_store(buf.as_slice()), Err(FeaturesError::TruncatedStore { .. })));
    }

    #[test]
    fn trailing_bytes_are_a_dimension_mismatch() {
        let (fm, labels) = sample();
        let mut buf = Vec::new();
        write_feature_store(&mut buf, &fm, &labels).unwrap();
        buf.push(0);
        assert!(matches!(read_feature_store(buf.as_slice()), Err(FeaturesError::DimensionHeaderMismatch(_))));
    }

    #[test]
    fn label_count_must_match() {
        let (fm, _) = sample();
        assert!(write_feature_store(Vec::new(), &fm, &[1]).is_err());
    }
}
