use proptest::prelude::*;

use fracture_core::dicom::CtSlice;
use fracture_core::preprocess::{
    brain_mask, crop_and_pad, estimate_noise_sigma, mask_orientation_deg, normalize_hu, preprocess_slice, preprocess_stages,
    tilt_correct, to_hu, BinaryMask, HuImage, PreprocessConfig,
};
use fracture_core::rng::seeded;
use fracture_core::synth::{ellipse_mask, Phantom};

fn slice_of(pixels: Vec<i32>, side: usize, slope: f64, intercept: f64) -> CtSlice {
    CtSlice {
        patient_id: "P".into(),
        instance_number: 1,
        rows: side,
        cols: side,
        bits_allocated: 16,
        bits_stored: 16,
        pixel_representation: 1,
        rescale_slope: slope,
        rescale_intercept: intercept,
        slice_thickness_mm: 1.0,
        pixels,
    }
}

#[test]
fn hu_conversion_examples() {
    let s = slice_of(vec![0, 1000, 512, 0], 2, 1.0, -1024.0);
    assert_eq!(to_hu(&s).values[..2], [-1024.0, -24.0]);
    let s = slice_of(vec![512; 4], 2, 2.0, 0.0);
    assert_eq!(to_hu(&s).values[0], 1024.0);
}

#[test]
fn off_center_phantom_lands_centered() {
    let cfg = PreprocessConfig::default();
    let threshold = normalize_hu(cfg.threshold_hu) as f32;
    for seed in 0..8 {
        let phantom = Phantom::random(&mut seeded(seed, 0), 128, (seed % 3) as u8);
        let out = preprocess_slice(&phantom.to_ct_slice("P", 1, 1.0), &cfg).unwrap();
        assert_eq!(out.side, 224);
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for y in 0..out.side {
            for x in 0..out.side {
                if out.get(x, y) > threshold {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1.0;
                }
            }
        }
        let c = (out.side as f64 - 1.0) / 2.0;
        let (cx, cy) = (sx / n, sy / n);
        assert!((cx - c).abs() <= 2.0 && (cy - c).abs() <= 2.0, "seed {seed}: centroid ({cx:.2}, {cy:.2})");
    }
}

#[test]
fn all_air_slice_uses_the_full_frame() {
    let s = slice_of(vec![0; 64 * 64], 64, 1.0, -1024.0);
    let stages = preprocess_stages(&s, &PreprocessConfig { out_side: 32, ..Default::default() }).unwrap();
    assert!(stages.used_fallback);
    assert_eq!(stages.output.side, 32);
    assert!(stages.output.values.iter().all(|&v| v == 0.0));
}

#[test]
fn preprocessing_is_bit_identical_across_calls() {
    let phantom = Phantom::random(&mut seeded(3, 0), 96, 1);
    let s = phantom.to_ct_slice("P", 1, 1.0);
    let cfg = PreprocessConfig::default();
    let a = preprocess_slice(&s, &cfg).unwrap();
    let b = preprocess_slice(&s, &cfg).unwrap();
    assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn disabling_tilt_keeps_the_angle_at_zero() {
    let phantom = Phantom::random(&mut seeded(4, 0), 96, 0);
    let cfg = PreprocessConfig { tilt_enabled: false, out_side: 64, ..Default::default() };
    let stages = preprocess_stages(&phantom.to_ct_slice("P", 1, 1.0), &cfg).unwrap();
    assert_eq!(stages.angle_deg, 0.0);
}

fn filled_ellipse(side: usize, axes: (f64, f64), angle: f64) -> (HuImage, BinaryMask) {
    let c = side as f64 / 2.0;
    let mask = ellipse_mask(side, side, (c, c), axes, angle);
    let mut img = HuImage::filled(side, side, -1024.0);
    for y in 0..side {
        for x in 0..side {
            if mask.get(x, y) {
                img.set(x, y, 60.0);
            }
        }
    }
    (img, mask)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn to_hu_is_affine(p in -32768i32..32768, slope in 1u32..8, intercept in -2048i32..2048) {
        let s = slice_of(vec![p], 1, f64::from(slope), f64::from(intercept));
        prop_assert_eq!(to_hu(&s).values[0], f64::from(slope) * f64::from(p) + f64::from(intercept));
    }

    #[test]
    fn crop_output_is_in_unit_range(
        values in prop::collection::vec(-3000.0f64..6000.0, 20 * 20),
        x0 in 0usize..15, y0 in 0usize..15, w in 1usize..6, h in 1usize..6,
        out_side in 1usize..48,
    ) {
        let img = HuImage::new(20, 20, values);
        let mut mask = BinaryMask::filled(20, 20, false);
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                mask.set(x, y, true);
            }
        }
        let out = crop_and_pad(&img, &mask, out_side).unwrap();
        prop_assert_eq!(out.side, out_side);
        prop_assert_eq!(out.values.len(), out_side * out_side);
        prop_assert!(out.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn noise_estimate_ignores_offsets(
        cells in prop::collection::vec(-512i32..512, 12 * 9),
        offset in -4096i32..4096,
    ) {
        // Dyadic values keep every sum exact, so equality is bitwise.
        let v: Vec<f64> = cells.iter().map(|&c| f64::from(c) / 1024.0).collect();
        let shifted: Vec<f64> = v.iter().map(|x| x + f64::from(offset) / 256.0).collect();
        prop_assert_eq!(estimate_noise_sigma(&v, 12, 9).unwrap(), estimate_noise_sigma(&shifted, 12, 9).unwrap());
    }

    #[test]
    fn tilt_correction_is_idempotent(angle in -85.0f64..85.0, a in 25.0f64..40.0, ratio in 0.4f64..0.85) {
        let (img, mask) = filled_ellipse(100, (a, a * ratio), angle);
        let (aligned, aligned_mask, removed) = tilt_correct(&img, &mask).unwrap();
        prop_assert!((removed - angle).abs() <= 1.0, "removed {} for {}", removed, angle);
        let (_, _, again) = tilt_correct(&aligned, &aligned_mask).unwrap();
        prop_assert!(again.abs() <= 1.0, "second pass removed {}", again);
    }

    #[test]
    fn orientation_is_symmetric_under_reflection(angle in 1.0f64..85.0) {
        let m = ellipse_mask(120, 120, (60.0, 60.0), (45.0, 20.0), angle);
        let r = ellipse_mask(120, 120, (60.0, 60.0), (45.0, 20.0), -angle);
        let (pa, pr) = (mask_orientation_deg(&m).unwrap(), mask_orientation_deg(&r).unwrap());
        prop_assert!((pa + pr).abs() <= 0.5, "{} vs {}", pa, pr);
    }

    #[test]
    fn mask_is_threshold_subset(values in prop::collection::vec(-1500.0f64..1500.0, 15 * 15), threshold in -800.0f64..200.0) {
        let img = HuImage::new(15, 15, values);
        let mask = brain_mask(&img, threshold);
        for y in 0..15 {
            for x in 0..15 {
                if mask.get(x, y) {
                    prop_assert!(img.get(x, y) > threshold);
                }
            }
        }
    }
}
