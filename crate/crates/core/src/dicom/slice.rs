use serde::{Deserialize, Serialize};

use super::element::{ElementMap, Tag};
use super::{tags, DicomError};

/// One CT slice: stored pixel values plus the header fields used downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtSlice {
    pub patient_id: String,
    pub instance_number: i64,
    pub rows: usize,
    pub cols: usize,
    pub bits_allocated: u16,
    pub bits_stored: u16,
    /// 0 = unsigned, 1 = two's complement.
    pub pixel_representation: u16,
    pub rescale_slope: f64,
    /// In HU.
    pub rescale_intercept: f64,
    pub slice_thickness_mm: f64,
    /// Row-major stored values.
    pub pixels: Vec<i32>,
}

impl CtSlice {
    pub fn validate(&self) -> Result<(), DicomError> {
        let fail = |msg: String| Err(DicomError::InvalidSlice(msg));
        if self.rows == 0 || self.cols == 0 {
            return fail(format!("{}x{} image", self.rows, self.cols));
        }
        if self.pixels.len() != self.rows * self.cols {
            return fail(format!("{} pixels for {}x{}", self.pixels.len(), self.rows, self.cols));
        }
        if self.bits_stored == 0 || self.bits_stored > self.bits_allocated || self.bits_allocated > 16 {
            return fail(format!(
                "bits stored {} / allocated {}",
                self.bits_stored, self.bits_allocated
            ));
        }
        if self.slice_thickness_mm.is_nan() || self.slice_thickness_mm <= 0.0 {
            return fail(format!("slice thickness {}", self.slice_thickness_mm));
        }
        Ok(())
    }

    pub fn pixel(&self, row: usize, col: usize) -> i32 {
        self.pixels[row * self.cols + col]
    }
}

fn require(map: &ElementMap, tag: Tag) -> Result<&super::DicomElement, DicomError> {
    map.get(&tag).ok_or(DicomError::MissingRequiredTag(tag))
}

fn required_u16(map: &ElementMap, tag: Tag) -> Result<u16, DicomError> {
    require(map, tag)?.as_u16().ok_or(DicomError::MalformedValue(tag))
}

fn parse_decimal(map: &ElementMap, tag: Tag) -> Result<Option<f64>, DicomError> {
    let Some(el) = map.get(&tag) else { return Ok(None) };
    let text = el.as_trimmed_str().ok_or(DicomError::MalformedValue(tag))?;
    // Multi-valued strings: the first value applies.
    let first = text.split('\\').next().unwrap_or("").trim();
    first.parse::<f64>().map(Some).map_err(|_| DicomError::MalformedValue(tag))
}

/// Decodes one stored word, masking to `bits_stored` and sign-extending when signed.
pub(crate) fn decode_word(word: u32, bits_stored: u16, signed: bool) -> i32 {
    let bits = u32::from(bits_stored);
    let mask = if bits >= 32 { u32::MAX } else { (1u32 << bits) - 1 };
    let v = word & mask;
    if signed && bits > 0 && v & (1 << (bits - 1)) != 0 {
        (i64::from(v) - (1i64 << bits)) as i32
    } else {
        v as i32
    }
}

/// Builds a [`CtSlice`] from a parsed element map.
pub fn extract_ct_slice(map: &ElementMap) -> Result<CtSlice, DicomError> {
    let rows = required_u16(map, tags::ROWS)? as usize;
    let cols = required_u16(map, tags::COLUMNS)? as usize;
    let bits_allocated = required_u16(map, tags::BITS_ALLOCATED)?;
    let bits_stored = required_u16(map, tags::BITS_STORED)?;
    let pixel_representation = required_u16(map, tags::PIXEL_REPRESENTATION)?;
    require(map, tags::RESCALE_INTERCEPT)?;
    require(map, tags::RESCALE_SLOPE)?;
    let rescale_intercept = parse_decimal(map, tags::RESCALE_INTERCEPT)?.unwrap_or_default();
    let rescale_slope = parse_decimal(map, tags::RESCALE_SLOPE)?.unwrap_or(1.0);
    let pixel_data = require(map, tags::PIXEL_DATA)?;

    let patient_id = match map.get(&tags::PATIENT_ID) {
        Some(el) => el
            .as_trimmed_str()
            .ok_or(DicomError::MalformedValue(tags::PATIENT_ID))?
            .to_string(),
        None => "UNKNOWN".to_string(),
    };
    let instance_number = match map.get(&tags::INSTANCE_NUMBER) {
        Some(el) => el
            .as_trimmed_str()
            .and_then(|s| s.parse::<i64>().ok())
            .ok_or(DicomError::MalformedValue(tags::INSTANCE_NUMBER))?,
        None => 0,
    };
    let slice_thickness_mm = parse_decimal(map, tags::SLICE_THICKNESS)?.unwrap_or(1.0);

    if bits_allocated != 8 && bits_allocated != 16 {
        return Err(DicomError::InvalidSlice(format!("bits allocated {bits_allocated}")));
    }
    let bytes_per = usize::from(bits_allocated / 8);
    let expected = rows * cols * bytes_per;
    let data = &pixel_data.value;
    // Odd-sized 8-bit data carries one pad byte.
    let padded_ok = bytes_per == 1 && data.len() == expected + 1 && expected % 2 == 1;
    if data.len() != expected && !padded_ok {
        return Err(DicomError::PixelDataSizeMismatch { expected, actual: data.len() });
    }
    let signed = pixel_representation == 1;
    let pixels = data[..expected]
        .chunks_exact(bytes_per)
        .map(|c| {
            let word = if bytes_per == 2 { u32::from(u16::from_le_bytes([c[0], c[1]])) } else { u32::from(c[0]) };
            decode_word(word, bits_stored, signed)
        })
        .collect();

    let slice = CtSlice {
        patient_id,
        instance_number,
        rows,
        cols,
        bits_allocated,
        bits_stored,
        pixel_representation,
        rescale_slope,
        rescale_intercept,
        slice_thickness_mm,
        pixels,
    };
    slice.validate()?;
    Ok(slice)
}
