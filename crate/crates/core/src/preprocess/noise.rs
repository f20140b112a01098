use std::f64::consts::FRAC_PI_2;

use super::PreprocessError;

/// Fast Laplacian-based estimate of additive Gaussian noise sigma.
///
/// Convolves with `[[1,-2,1],[-2,4,-2],[1,-2,1]]` over interior pixels and
/// returns `sqrt(pi/2) * mean(|response|) / 6`. The kernel sums to zero, so
/// smooth structure and constant offsets do not contribute.
pub fn estimate_noise_sigma(values: &[f64], width: usize, height: usize) -> Result<f64, PreprocessError> {
    if width < 3 || height < 3 {
        return Err(PreprocessError::ImageTooSmall { width, height });
    }
    assert_eq!(values.len(), width * height);
    let at = |x: usize, y: usize| values[y * width + x];
    let mut total = 0.0;
    for y in 1..height - 1 {
        for x in 1..width - 1 {
            let corners = at(x - 1, y - 1) + at(x + 1, y - 1) + at(x - 1, y + 1) + at(x + 1, y + 1);
            let edges = at(x, y - 1) + at(x - 1, y) + at(x + 1, y) + at(x, y + 1);
            let r = corners - 2.0 * edges + 4.0 * at(x, y);
            total += r.abs();
        }
    }
    let interior = ((width - 2) * (height - 2)) as f64;
    Ok(FRAC_PI_2.sqrt() * total / (6.0 * interior))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_zero_noise() {
        let v = vec![0.37; 25];
        assert_eq!(estimate_noise_sigma(&v, 5, 5).unwrap(), 0.0);
    }

    #[test]
    fn rejects_tiny_images() {
        assert_eq!(
            estimate_noise_sigma(&[0.0; 4], 2, 2),
            Err(PreprocessError::ImageTooSmall { width: 2, height: 2 })
        );
    }

    #[test]
    fn linear_ramp_is_noise_free() {
        let (w, h) = (8, 6);
        let v: Vec<f64> = (0..w * h).map(|i| (i % w) as f64 * 0.125 + (i / w) as f64 * 0.25).collect();
        assert_eq!(estimate_noise_sigma(&v, w, h).unwrap(), 0.0);
    }
}
