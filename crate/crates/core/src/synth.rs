//! Seeded synthetic data: CT head phantoms written as DICOM series, and
//! Gaussian-blob image sets for classifier benchmarks.
//!
//! The clinical data the pipeline was designed for is not public; these
//! generators stand in for it in tests, examples and the CLI `synth`
//! command.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::dataset::DEFAULT_CLASS_NAMES;
use crate::dicom::writer::{encode_ct_image, CtImageSpec};
use crate::dicom::{CtSlice, TransferSyntax};
use crate::preprocess::{BinaryMask, TensorImage, AIR_HU};
use crate::rng::{seeded, Rng};

/// Rasterizes a filled ellipse. `semi_axes.0` lies along the direction
/// `angle_deg` measured from +x towards +y (rows grow downwards).
pub fn ellipse_mask(width: usize, height: usize, center: (f64, f64), semi_axes: (f64, f64), angle_deg: f64) -> BinaryMask {
    let mut mask = BinaryMask::filled(width, height, false);
    let (s, c) = angle_deg.to_radians().sin_cos();
    for y in 0..height {
        for x in 0..width {
            if ellipse_coord(x as f64 - center.0, y as f64 - center.1, s, c, semi_axes) <= 1.0 {
                mask.set(x, y, true);
            }
        }
    }
    mask
}

fn ellipse_coord(dx: f64, dy: f64, s: f64, c: f64, (a, b): (f64, f64)) -> f64 {
    let u = dx * c + dy * s;
    let v = -dx * s + dy * c;
    (u / a).powi(2) + (v / b).powi(2)
}

const BRAIN_HU: f64 = 40.0;
const BONE_HU: f64 = 1200.0;
const FRAGMENT_HU: f64 = 1800.0;
const CRACK_HU: f64 = -250.0;

/// One synthetic head slice.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub side: usize,
    pub center: (f64, f64),
    /// Outer skull semi-axes; the first lies along `angle_deg`.
    pub semi_axes: (f64, f64),
    pub skull_thickness: f64,
    pub angle_deg: f64,
    /// 0 depressed fracture, 1 linear fracture, 2 intact.
    pub class_id: u8,
    pub noise_hu: f64,
    pub noise_seed: u64,
}

impl Phantom {
    /// Randomized phantom of `class_id` on a `side`-pixel grid.
    pub fn random(rng: &mut Rng, side: usize, class_id: u8) -> Self {
        let s = side as f64;
        let a = s * rng.random_range(0.33..0.38);
        let b = a * rng.random_range(0.72..0.82);
        Phantom {
            side,
            center: (s / 2.0 + rng.random_range(-0.06..0.06) * s, s / 2.0 + rng.random_range(-0.06..0.06) * s),
            semi_axes: (a, b),
            skull_thickness: s * rng.random_range(0.035..0.05),
            angle_deg: rng.random_range(-25.0..25.0),
            class_id,
            noise_hu: 15.0,
            noise_seed: rng.random(),
        }
    }

    /// Hounsfield values, row-major.
    pub fn render_hu(&self) -> Vec<f64> {
        let n = self.side;
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let (a, b) = self.semi_axes;
        let t = self.skull_thickness;
        let inner = (a - t, b - t);
        let mut noise = seeded(self.noise_seed, 0);
        let mut out = vec![AIR_HU; n * n];
        for y in 0..n {
            for x in 0..n {
                let dx = x as f64 - self.center.0;
                let dy = y as f64 - self.center.1;
                if ellipse_coord(dx, dy, s, c, (a, b)) > 1.0 {
                    continue;
                }
                // Head-frame coordinates.
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                let in_brain = ellipse_coord(dx, dy, s, c, inner) <= 1.0;
                let mut hu = if in_brain { BRAIN_HU } else { BONE_HU };
                match self.class_id {
                    0 => {
                        // Inward-displaced bone fragments at both ends of the long axis.
                        let r = 0.28 * inner.1;
                        let cu = inner.0 - r;
                        if (u - cu).hypot(v) <= r || (u + cu).hypot(v) <= r {
                            hu = FRAGMENT_HU;
                        }
                    }
                    1 => {
                        // Crossing fracture lines through the vault.
                        let half_w = 0.09 * b;
                        let d1 = (u * 0.5 - v * 0.866).abs();
                        let d2 = (u * 0.5 + v * 0.866).abs();
                        if d1 <= half_w || d2 <= half_w || v.abs() <= half_w {
                            hu = CRACK_HU;
                        }
                    }
                    _ => {}
                }
                let eps: f64 = noise.sample(StandardNormal);
                out[y * n + x] = hu + self.noise_hu * eps;
            }
        }
        out
    }

    /// Stored values for slope 1 / intercept -1024.
    pub fn stored_pixels(&self) -> Vec<i16> {
        self.render_hu()
            .into_iter()
            .map(|hu| (hu + 1024.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16)
            .collect()
    }

    pub fn to_ct_slice(&self, patient_id: &str, instance_number: i64, thickness_mm: f64) -> CtSlice {
        CtSlice {
            patient_id: patient_id.to_string(),
            instance_number,
            rows: self.side,
            cols: self.side,
            bits_allocated: 16,
            bits_stored: 16,
            pixel_representation: 1,
            rescale_slope: 1.0,
            rescale_intercept: -1024.0,
            slice_thickness_mm: thickness_mm,
            pixels: self.stored_pixels().into_iter().map(i32::from).collect(),
        }
    }
}

/// Shape of a synthetic series directory.
#[derive(Debug, Clone)]
pub struct SeriesFixture {
    pub patients: usize,
    /// Slices per patient are drawn uniformly from this inclusive range.
    pub slices_per_patient: (usize, usize),
    pub side: usize,
    pub seed: u64,
    /// Extra 5 mm slices per patient, to exercise the thickness filter.
    pub thick_slices_per_patient: usize,
}

impl Default for SeriesFixture {
    fn default() -> Self {
        Self { patients: 24, slices_per_patient: (6, 10), side: 96, seed: 2024, thick_slices_per_patient: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct FixtureSummary {
    pub files: Vec<PathBuf>,
    pub labels_csv: PathBuf,
    /// Per-patient class ids, in patient order.
    pub patient_classes: Vec<(String, u8)>,
}

/// Writes one DICOM file per slice under `dir/<patient>/` plus
/// `dir/labels.csv` (`patient_id,class`). Classes cycle over patients so all
/// three are present once there are three patients.
pub fn write_series_fixture(dir: &Path, spec: &SeriesFixture) -> io::Result<FixtureSummary> {
    fs::create_dir_all(dir)?;
    let mut rng = seeded(spec.seed, 0);
    let mut files = Vec::new();
    let mut patient_classes = Vec::new();
    let mut labels = String::from("patient_id,class\n");
    for p in 0..spec.patients {
        let pid = format!("P{p:03}");
        let class_id = (p % 3) as u8;
        patient_classes.push((pid.clone(), class_id));
        labels.push_str(&format!("{pid},{}\n", DEFAULT_CLASS_NAMES[class_id as usize]));
        let pdir = dir.join(&pid);
        fs::create_dir_all(&pdir)?;
        let n = rng.random_range(spec.slices_per_patient.0..=spec.slices_per_patient.1);
        let total = n + spec.thick_slices_per_patient;
        for i in 0..total {
            let thickness = if i < n { 1.0 } else { 5.0 };
            let phantom = Phantom::random(&mut rng, spec.side, class_id);
            let syntax = if rng.random_bool(0.5) {
                TransferSyntax::ExplicitVrLittleEndian
            } else {
                TransferSyntax::ImplicitVrLittleEndian
            };
            let image = CtImageSpec {
                patient_id: pid.clone(),
                instance_number: i as i64 + 1,
                rows: spec.side as u16,
                cols: spec.side as u16,
                slice_thickness_mm: thickness,
                rescale_slope: 1.0,
                rescale_intercept: -1024.0,
                pixels: phantom.stored_pixels(),
            };
            let path = pdir.join(format!("IM{:04}.dcm", i + 1));
            fs::write(&path, encode_ct_image(&image, syntax))?;
            files.push(path);
        }
    }
    let labels_csv = dir.join("labels.csv");
    fs::write(&labels_csv, labels)?;
    Ok(FixtureSummary { files, labels_csv, patient_classes })
}

/// Three-class image set: each class has a random mean intensity per 4x4
/// cell, samples add i.i.d. Gaussian cell noise of `spread`.
///
/// Returns images and labels, interleaved by class.
pub fn gaussian_blob_images(per_class: usize, side: usize, spread: f64, seed: u64) -> (Vec<TensorImage>, Vec<u8>) {
    let cells_per_row = side.div_ceil(4);
    let cells = cells_per_row * cells_per_row;
    let mut proto_rng = seeded(seed, 0);
    let prototypes: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..cells).map(|_| proto_rng.random_range(0.2..0.8)).collect())
        .collect();
    let mut rng = seeded(seed, 1);
    let mut images = Vec::with_capacity(per_class * 3);
    let mut labels = Vec::with_capacity(per_class * 3);
    for _ in 0..per_class {
        for (class_id, proto) in prototypes.iter().enumerate() {
            let cell_values: Vec<f64> = proto
                .iter()
                .map(|m| {
                    let eps: f64 = rng.sample(StandardNormal);
                    (m + spread * eps).clamp(0.0, 1.0)
                })
                .collect();
            let values = (0..side * side)
                .map(|i| {
                    let (x, y) = (i % side, i / side);
                    cell_values[(y / 4) * cells_per_row + x / 4] as f32
                })
                .collect();
            images.push(TensorImage::new(side, values));
            labels.push(class_id as u8);
        }
    }
    (images, labels)
}

/// Standalone image with i.i.d. Gaussian noise of `sigma` around `level`.
pub fn noisy_constant(width: usize, height: usize, level: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed, 0);
    (0..width * height)
        .map(|_| {
            let eps: f64 = rng.sample(StandardNormal);
            level + sigma * eps
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_area_is_close_to_analytic() {
        let m = ellipse_mask(200, 200, (100.0, 100.0), (60.0, 40.0), 33.0);
        let area = std::f64::consts::PI * 60.0 * 40.0;
        assert!((m.count() as f64 - area).abs() / area < 0.01);
    }

    #[test]
    fn blob_images_are_deterministic() {
        let a = gaussian_blob_images(4, 16, 0.1, 3);
        let b = gaussian_blob_images(4, 16, 0.1, 3);
        assert_eq!(a, b);
        assert_eq!(a.1, vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2]);
    }
}
