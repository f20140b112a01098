use std::fs;

use proptest::prelude::*;

use fracture_core::features::{
    extract_features, load_feature_store, read_feature_store, save_feature_store, toy_extractor, FeatureExtractor,
    FeatureMatrix, FeaturesError, ModelSidecar, OnnxExtractor,
};
use fracture_core::preprocess::TensorImage;
use fracture_core::rng::seeded;
use rand::Rng;

fn random_image(side: usize, seed: u64) -> TensorImage {
    let mut rng = seeded(seed, 0);
    TensorImage::new(side, (0..side * side).map(|_| rng.random::<f32>()).collect())
}

fn bits(fm: &FeatureMatrix) -> Vec<u32> {
    fm.data().iter().map(|v| v.to_bits()).collect()
}

#[test]
fn toy_extraction_is_deterministic() {
    let images: Vec<TensorImage> = (0..3).map(|s| random_image(32, s)).collect();
    let a = extract_features(&images, &FeatureExtractor::Toy(toy_extractor(7, 64, 32))).unwrap();
    let b = extract_features(&images, &FeatureExtractor::Toy(toy_extractor(7, 64, 32))).unwrap();
    assert_eq!((a.n(), a.d()), (3, 64));
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn zero_images_give_the_bias_response() {
    let ex = toy_extractor(7, 64, 16);
    let zero = ex.extract(&TensorImage::zeros(16));
    assert!(zero.iter().any(|&v| v > 0.0));
    assert_eq!(zero, ex.extract(&TensorImage::zeros(16)));
}

#[test]
fn single_cell_changes_are_visible() {
    let side = 16;
    let base = random_image(side, 99);
    let mut bumped = base.clone();
    // Pixel (5, 6) lives in pooling cell (1, 1).
    bumped.values[6 * side + 5] += 0.5;
    for seed in 0..50 {
        let ex = toy_extractor(seed, 64, side);
        assert_ne!(ex.extract(&base), ex.extract(&bumped), "seed {seed}");
    }
}

#[test]
fn single_feature_extractor() {
    let ex = FeatureExtractor::Toy(toy_extractor(1, 1, 8));
    let fm = extract_features(&[random_image(8, 0), random_image(8, 1)], &ex).unwrap();
    assert_eq!((fm.n(), fm.d()), (2, 1));
}

#[test]
fn wrong_image_side_is_rejected() {
    let ex = FeatureExtractor::Toy(toy_extractor(1, 4, 8));
    let err = extract_features(&[random_image(8, 0), random_image(9, 0)], &ex).unwrap_err();
    assert!(matches!(err, FeaturesError::ShapeMismatch { expected: 8, got: 9 }));
}

#[test]
fn store_corruption_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.fvs");
    let fm = FeatureMatrix::new(100, 2, vec![1.5; 200]).unwrap();
    save_feature_store(&fm, &[0; 100], &path).unwrap();
    let bytes = fs::read(&path).unwrap();

    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert!(matches!(read_feature_store(&wrong[..]), Err(FeaturesError::BadMagic)));

    // Keep the 100-row header but only 50 rows of payload.
    let half = &bytes[..12 + 50 * 2 * 4];
    assert!(matches!(read_feature_store(half), Err(FeaturesError::TruncatedStore { .. })));

    let mut extra = bytes;
    extra.push(0);
    assert!(matches!(read_feature_store(&extra[..]), Err(FeaturesError::DimensionHeaderMismatch(_))));
}

#[test]
fn sidecar_without_backend() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("resnet50.json");
    fs::write(
        &path,
        r#"{"model_path":"resnet50.onnx","input_name":"input","input_side":224,"output_name":"pool","output_dim":2048}"#,
    )
    .unwrap();
    let sidecar = ModelSidecar::load(&path).unwrap();
    assert_eq!(sidecar.model_path, dir.path().join("resnet50.onnx"));
    assert_eq!(sidecar.output_dim, 2048);
    if cfg!(not(feature = "onnx")) {
        assert!(matches!(OnnxExtractor::from_sidecar_path(&path), Err(FeaturesError::BackendUnavailable(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn store_round_trip_is_identity(
        n in 0usize..20,
        d in 1usize..6,
        raw in prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 120),
        labels in prop::collection::vec(0u8..3, 20),
    ) {
        let fm = FeatureMatrix::new(n, d, raw[..n * d].to_vec()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.fvs");
        save_feature_store(&fm, &labels[..n], &path).unwrap();
        let (back, back_labels) = load_feature_store(&path).unwrap();
        prop_assert_eq!((back.n(), back.d()), (n, d));
        prop_assert_eq!(bits(&back), bits(&fm));
        prop_assert_eq!(&back_labels[..], &labels[..n]);
    }

    #[test]
    fn extraction_commutes_with_permutation(seeds in prop::collection::vec(any::<u64>(), 1..8), ex_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let images: Vec<TensorImage> = seeds.iter().map(|&s| random_image(12, s)).collect();
        let mut order: Vec<usize> = (0..images.len()).collect();
        order.shuffle(&mut seeded(ex_seed, 1));
        let permuted: Vec<TensorImage> = order.iter().map(|&i| images[i].clone()).collect();
        let ex = FeatureExtractor::Toy(toy_extractor(ex_seed, 16, 12));
        let a = extract_features(&images, &ex).unwrap();
        let b = extract_features(&permuted, &ex).unwrap();
        for (row, &i) in order.iter().enumerate() {
            prop_assert_eq!(b.row(row), a.row(i));
        }
        prop_assert!(a.data().iter().all(|&v| v >= 0.0));
    }
}
