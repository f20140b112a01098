use super::{BinaryMask, HuImage, PreprocessError, TensorImage, AIR_HU};

pub const HU_WINDOW_MIN: f64 = -1024.0;
pub const HU_WINDOW_MAX: f64 = 3071.0;

/// Maps the `[-1024, 3071]` HU window affinely onto `[0, 1]`, clamping.
pub fn normalize_hu(hu: f64) -> f64 {
    ((hu - HU_WINDOW_MIN) / (HU_WINDOW_MAX - HU_WINDOW_MIN)).clamp(0.0, 1.0)
}

/// Crops to the mask bounding box, pads the short side symmetrically with
/// air to a square, resizes bilinearly to `out_side` and normalizes.
///
/// When the padding is odd the extra row/column goes to the bottom/right.
pub fn crop_and_pad(img: &HuImage, mask: &BinaryMask, out_side: usize) -> Result<TensorImage, PreprocessError> {
    if out_side == 0 {
        return Err(PreprocessError::ZeroOutputSide);
    }
    if mask.width != img.width || mask.height != img.height {
        return Err(PreprocessError::MaskShapeMismatch {
            mask_w: mask.width,
            mask_h: mask.height,
            img_w: img.width,
            img_h: img.height,
        });
    }
    let (x0, y0, x1, y1) = mask.bounding_box().ok_or(PreprocessError::EmptyMask)?;
    let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
    let side = w.max(h);
    let pad_x = (side - w) / 2;
    let pad_y = (side - h) / 2;

    let mut square = vec![AIR_HU; side * side];
    for y in 0..h {
        for x in 0..w {
            square[(y + pad_y) * side + x + pad_x] = img.get(x0 + x, y0 + y);
        }
    }

    let scale = side as f64 / out_side as f64;
    let max = (side - 1) as f64;
    let mut values = Vec::with_capacity(out_side * out_side);
    for oy in 0..out_side {
        let sy = ((oy as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
        for ox in 0..out_side {
            let sx = ((ox as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let hu = sample_clamped(&square, side, sx, sy);
            values.push(normalize_hu(hu) as f32);
        }
    }
    Ok(TensorImage::new(out_side, values))
}

/// Bilinear sample with `x`, `y` already inside `[0, side-1]`.
fn sample_clamped(values: &[f64], side: usize, x: f64, y: f64) -> f64 {
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(side - 1);
    let y1 = (y0 + 1).min(side - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let at = |xi: usize, yi: usize| values[yi * side + xi];
    let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}
