use super::image::bilinear;
use super::{BinaryMask, HuImage, PreprocessError, AIR_HU};

const DEGENERATE_EPS: f64 = 1e-9;

struct Moments {
    cx: f64,
    cy: f64,
    mu20: f64,
    mu02: f64,
    mu11: f64,
}

/// Area-normalized second-order central moments of the set pixels.
fn central_moments(mask: &BinaryMask) -> Option<Moments> {
    let (cx, cy) = mask.centroid()?;
    let (mut mu20, mut mu02, mut mu11, mut n) = (0.0, 0.0, 0.0, 0.0);
    for y in 0..mask.height {
        for x in 0..mask.width {
            if mask.get(x, y) {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                mu20 += dx * dx;
                mu02 += dy * dy;
                mu11 += dx * dy;
                n += 1.0;
            }
        }
    }
    Some(Moments { cx, cy, mu20: mu20 / n, mu02: mu02 / n, mu11: mu11 / n })
}

fn orientation_rad(m: &Moments) -> f64 {
    let diff = m.mu20 - m.mu02;
    if diff.abs() < DEGENERATE_EPS && m.mu11.abs() < DEGENERATE_EPS {
        return 0.0;
    }
    0.5 * (2.0 * m.mu11).atan2(diff)
}

/// Principal-axis angle of the mask in degrees, in `(-90, 90]`.
///
/// Measured from the +x (column) axis towards +y (down the rows). Circles
/// and other shapes with no dominant axis return 0.
pub fn mask_orientation_deg(mask: &BinaryMask) -> Result<f64, PreprocessError> {
    let m = central_moments(mask).ok_or(PreprocessError::EmptyMask)?;
    Ok(orientation_rad(&m).to_degrees())
}

/// Rotates image and mask about the mask centroid so the principal axis
/// lies along +x. Returns the aligned image, aligned mask and the angle
/// that was removed.
pub fn tilt_correct(img: &HuImage, mask: &BinaryMask) -> Result<(HuImage, BinaryMask, f64), PreprocessError> {
    if mask.width != img.width || mask.height != img.height {
        return Err(PreprocessError::MaskShapeMismatch {
            mask_w: mask.width,
            mask_h: mask.height,
            img_w: img.width,
            img_h: img.height,
        });
    }
    let m = central_moments(mask).ok_or(PreprocessError::EmptyMask)?;
    let theta = orientation_rad(&m);
    let (sin, cos) = theta.sin_cos();
    let (w, h) = (img.width, img.height);
    let mask_values: Vec<f64> = mask.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();

    let mut out = HuImage::filled(w, h, AIR_HU);
    let mut out_mask = BinaryMask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - m.cx;
            let dy = y as f64 - m.cy;
            let sx = m.cx + cos * dx - sin * dy;
            let sy = m.cy + sin * dx + cos * dy;
            out.set(x, y, img.sample(sx, sy, AIR_HU));
            out_mask.set(x, y, bilinear(&mask_values, w, h, sx, sy, 0.0) >= 0.5);
        }
    }
    Ok((out, out_mask, theta.to_degrees()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ellipse_mask;

    fn image_from_mask(mask: &BinaryMask) -> HuImage {
        let values = mask.bits.iter().map(|&b| if b { 40.0 } else { AIR_HU }).collect();
        HuImage::new(mask.width, mask.height, values)
    }

    #[test]
    fn axis_aligned_ellipse_is_left_alone() {
        let mask = ellipse_mask(200, 160, (100.0, 80.0), (60.0, 40.0), 0.0);
        let img = image_from_mask(&mask);
        let (out, _, angle) = tilt_correct(&img, &mask).unwrap();
        assert!(angle.abs() <= 0.5, "angle {angle}");
        let max_diff = out.values.iter().zip(&img.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(max_diff < 1e-9, "image changed by {max_diff}");
    }

    #[test]
    fn recovers_ten_degree_tilt() {
        let mask = ellipse_mask(200, 200, (97.0, 104.0), (60.0, 40.0), 10.0);
        let img = image_from_mask(&mask);
        let (_, _, angle) = tilt_correct(&img, &mask).unwrap();
        assert!((angle - 10.0).abs() <= 1.0, "angle {angle}");
    }

    #[test]
    fn circle_has_zero_angle() {
        let mask = ellipse_mask(101, 101, (50.0, 50.0), (30.0, 30.0), 0.0);
        assert_eq!(mask_orientation_deg(&mask).unwrap(), 0.0);
    }

    #[test]
    fn correction_is_idempotent() {
        let mask = ellipse_mask(220, 220, (110.0, 105.0), (70.0, 35.0), -27.0);
        let img = image_from_mask(&mask);
        let (once, once_mask, _) = tilt_correct(&img, &mask).unwrap();
        let (_, _, again) = tilt_correct(&once, &once_mask).unwrap();
        assert!(again.abs() <= 1.0, "second pass angle {again}");
    }

    #[test]
    fn empty_mask_is_an_error() {
        let mask = BinaryMask::filled(10, 10, false);
        let img = HuImage::filled(10, 10, AIR_HU);
        assert_eq!(tilt_correct(&img, &mask).unwrap_err(), PreprocessError::EmptyMask);
    }

    #[test]
    fn vertical_major_axis_reports_ninety() {
        let mask = ellipse_mask(200, 200, (100.0, 100.0), (30.0, 70.0), 0.0);
        let a = mask_orientation_deg(&mask).unwrap();
        assert!((a - 90.0).abs() < 1e-6, "angle {a}");
    }
}
