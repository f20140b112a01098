use log::debug;
use serde::{Deserialize, Serialize};

/// Fill value for pixels outside the scanned field.
pub const AIR_HU: f64 = -1024.0;

const CLINICAL_MIN_HU: f64 = -1024.0;
const CLINICAL_MAX_HU: f64 = 3071.0;

/// Row-major image in Hounsfield units.
#[derive(Debug, Clone, PartialEq)]
pub struct HuImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl HuImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * height, "HuImage buffer size");
        Self { width, height, values }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.values[y * self.width + x] = v;
    }

    /// Bilinear sample at continuous pixel coordinates; outside samples
    /// read `fill`.
    pub fn sample(&self, x: f64, y: f64, fill: f64) -> f64 {
        bilinear(&self.values, self.width, self.height, x, y, fill)
    }

    pub(crate) fn log_out_of_range(&self) {
        let outside = self
            .values
            .iter()
            .filter(|v| **v < CLINICAL_MIN_HU || **v > CLINICAL_MAX_HU)
            .count();
        if outside > 0 {
            debug!("{outside} pixels outside [{CLINICAL_MIN_HU}, {CLINICAL_MAX_HU}] HU");
        }
    }
}

pub(crate) fn bilinear(values: &[f64], width: usize, height: usize, x: f64, y: f64, fill: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let at = |xi: f64, yi: f64| -> f64 {
        if xi < 0.0 || yi < 0.0 || xi >= width as f64 || yi >= height as f64 {
            fill
        } else {
            values[yi as usize * width + xi as usize]
        }
    };
    let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1.0, y0) * fx;
    let bottom = at(x0, y0 + 1.0) * (1.0 - fx) + at(x0 + 1.0, y0 + 1.0) * fx;
    top * (1.0 - fy) + bottom * fy
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn filled(width: usize, height: usize, on: bool) -> Self {
        Self { width, height, bits: vec![on; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.bits[y * self.width + x] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)`, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    bbox = Some(match bbox {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        bbox
    }

    /// Centroid `(x, y)` of the set pixels.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }
}

/// Square single-channel image with values in `[0, 1]`, ready for feature
/// extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorImage {
    pub side: usize,
    pub values: Vec<f32>,
}

impl TensorImage {
    pub fn new(side: usize, values: Vec<f32>) -> Self {
        assert_eq!(values.len(), side * side, "TensorImage buffer size");
        Self { side, values }
    }

    pub fn zeros(side: usize) -> Self {
        Self::new(side, vec![0.0; side * side])
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.side + x]
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }
}
