//! Binary PGM (P5) dumps of intermediate images.

use std::io::{self, Write};
use std::path::Path;

use super::{normalize_hu, BinaryMask, HuImage, TensorImage};

/// Writes 8-bit grey values from `[0, 1]` intensities.
pub fn write_unit_pgm(path: &Path, width: usize, height: usize, values: impl Iterator<Item = f64>) -> io::Result<()> {
    let mut out = Vec::with_capacity(width * height + 32);
    write!(out, "P5\n{width} {height}\n255\n")?;
    out.extend(values.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    std::fs::write(path, out)
}

pub fn write_hu(path: &Path, img: &HuImage) -> io::Result<()> {
    write_unit_pgm(path, img.width, img.height, img.values.iter().map(|&v| normalize_hu(v)))
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> io::Result<()> {
    write_unit_pgm(path, mask.width, mask.height, mask.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }))
}

pub fn write_tensor(path: &Path, img: &TensorImage) -> io::Result<()> {
    write_unit_pgm(path, img.side, img.side, img.values.iter().map(|&v| f64::from(v)))
}
