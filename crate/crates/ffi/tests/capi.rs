use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use fracture_core::classifiers::{save_model, train_forest, train_gbdt, ForestConfig, GbdtConfig, Model};
use fracture_core::dicom::writer::{encode_ct_image, CtImageSpec};
use fracture_core::dicom::TransferSyntax;
use fracture_core::features::{extract_features, FeatureExtractor, FeatureMatrix};
use fracture_core::preprocess::{preprocess_slice, PreprocessConfig};
use fracture_core::rng::seeded;
use fracture_core::synth::Phantom;
use fracture_ffi::*;

const SIDE: usize = 64;
const OUT_SIDE: usize = 32;
const DIM: usize = 16;

fn phantom(i: u64, class_id: u8) -> Phantom {
    Phantom::random(&mut seeded(99, i), SIDE, class_id)
}

fn dicom_bytes(p: &Phantom, instance: i64) -> Vec<u8> {
    let spec = CtImageSpec {
        patient_id: "P001".into(),
        instance_number: instance,
        rows: SIDE as u16,
        cols: SIDE as u16,
        slice_thickness_mm: 1.0,
        rescale_slope: 1.0,
        rescale_intercept: -1024.0,
        pixels: p.stored_pixels(),
    };
    encode_ct_image(&spec, TransferSyntax::ExplicitVrLittleEndian)
}

fn last_error() -> String {
    let p = fracture_last_error();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(bytes: &[u8]) -> *mut FractureSlice {
    let mut slice = ptr::null_mut();
    let st = unsafe { fracture_slice_parse(bytes.as_ptr(), bytes.len(), &mut slice) };
    assert_eq!(st, FractureStatus::Ok);
    slice
}

fn image_via_ffi(bytes: &[u8]) -> *mut FractureImage {
    let slice = parse(bytes);
    let mut img = ptr::null_mut();
    let st = unsafe { fracture_preprocess(slice, -500.0, OUT_SIDE, true, &mut img) };
    assert_eq!(st, FractureStatus::Ok);
    unsafe { fracture_slice_free(slice) };
    img
}

#[test]
fn slice_info_matches_header() {
    let bytes = dicom_bytes(&phantom(0, 0), 7);
    let slice = parse(&bytes);
    let (mut rows, mut cols, mut t) = (0usize, 0usize, 0.0f64);
    assert_eq!(unsafe { fracture_slice_info(slice, &mut rows, &mut cols, &mut t) }, FractureStatus::Ok);
    assert_eq!((rows, cols, t), (SIDE, SIDE, 1.0));
    assert_eq!(unsafe { fracture_slice_info(slice, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()) }, FractureStatus::Ok);
    unsafe { fracture_slice_free(slice) };
}

#[test]
fn preprocess_and_extract_agree_with_the_library() {
    let p = phantom(1, 2);
    let bytes = dicom_bytes(&p, 1);
    let img = image_via_ffi(&bytes);
    assert_eq!(unsafe { fracture_image_side(img) }, OUT_SIDE);

    let mut pixels = vec![0f32; OUT_SIDE * OUT_SIDE];
    assert_eq!(unsafe { fracture_image_copy(img, pixels.as_mut_ptr(), pixels.len()) }, FractureStatus::Ok);
    let cfg = PreprocessConfig { threshold_hu: -500.0, out_side: OUT_SIDE, tilt_enabled: true };
    let expected = preprocess_slice(&p.to_ct_slice("P001", 1, 1.0), &cfg).unwrap();
    assert_eq!(pixels, expected.values);

    let mut ex = ptr::null_mut();
    assert_eq!(unsafe { fracture_extractor_toy(5, DIM, OUT_SIDE, &mut ex) }, FractureStatus::Ok);
    assert_eq!(unsafe { fracture_extractor_dim(ex) }, DIM);
    assert_eq!(unsafe { fracture_extractor_input_side(ex) }, OUT_SIDE);
    let mut features = vec![0f32; DIM];
    assert_eq!(unsafe { fracture_extract(ex, img, features.as_mut_ptr(), DIM) }, FractureStatus::Ok);
    let lib = extract_features(&[expected], &FeatureExtractor::Toy(fracture_core::features::toy_extractor(5, DIM, OUT_SIDE))).unwrap();
    assert_eq!(features, lib.row(0));

    let mut short = vec![0f32; DIM - 1];
    assert_eq!(unsafe { fracture_extract(ex, img, short.as_mut_ptr(), short.len()) }, FractureStatus::BufferTooSmall);
    assert!(last_error().contains("need 16"));

    unsafe {
        fracture_extractor_free(ex);
        fracture_image_free(img);
    }
}

#[test]
fn extractor_rejects_wrong_image_side() {
    let mut ex = ptr::null_mut();
    assert_eq!(unsafe { fracture_extractor_toy(1, 4, 8, &mut ex) }, FractureStatus::Ok);
    let values = [0.5f32; 16];
    let mut img = ptr::null_mut();
    assert_eq!(unsafe { fracture_image_new(values.as_ptr(), 4, &mut img) }, FractureStatus::Ok);
    let mut out = [0f32; 4];
    assert_eq!(unsafe { fracture_extract(ex, img, out.as_mut_ptr(), 4) }, FractureStatus::ShapeMismatch);
    unsafe {
        fracture_image_free(img);
        fracture_extractor_free(ex);
    }
}

fn training_set() -> (FeatureMatrix, Vec<u8>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..24u64 {
        let c = (i % 3) as u8;
        let base = f32::from(c) * 3.0;
        rows.push((0..6).map(|j| base + ((i * 7 + j) % 5) as f32 * 0.1).collect::<Vec<f32>>());
        labels.push(c);
    }
    (FeatureMatrix::from_rows(&rows).unwrap(), labels)
}

fn load(path: &Path) -> *mut FractureModel {
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fracture_model_load(c.as_ptr(), &mut m) }, FractureStatus::Ok);
    m
}

#[test]
fn model_predictions_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let (fm, y) = training_set();
    let cfg = GbdtConfig { rounds: 20, ..Default::default() };
    let model = Model::Gbdt(train_gbdt(&fm, &y, 3, &cfg).unwrap());
    let path = dir.path().join("model_gbdt.mdl");
    save_model(&path, &model).unwrap();

    let m = load(&path);
    assert_eq!(unsafe { fracture_model_n_classes(m) }, 3);
    assert_eq!(unsafe { fracture_model_n_features(m) }, 6);
    assert_eq!(unsafe { CStr::from_ptr(fracture_model_kind(m)) }.to_str().unwrap(), "gbdt");

    let mut labels = vec![0u8; fm.n()];
    let st = unsafe { fracture_model_predict(m, fm.data().as_ptr(), fm.n(), fm.d(), labels.as_mut_ptr()) };
    assert_eq!(st, FractureStatus::Ok);
    assert_eq!(labels, model.predict(&fm).unwrap());

    let mut probs = vec![0f64; fm.n() * 3];
    let st = unsafe { fracture_model_predict_proba(m, fm.data().as_ptr(), fm.n(), fm.d(), probs.as_mut_ptr()) };
    assert_eq!(st, FractureStatus::Ok);
    assert_eq!(probs, model.probabilities(&fm).unwrap().unwrap().data);

    let st = unsafe { fracture_model_predict(m, fm.data().as_ptr(), fm.n(), 5, labels.as_mut_ptr()) };
    assert_eq!(st, FractureStatus::ShapeMismatch);
    assert!(last_error().contains("expects 6"));
    unsafe { fracture_model_free(m) };
}

#[test]
fn forest_probabilities_are_vote_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let (fm, y) = training_set();
    let model = Model::Forest(train_forest(&fm, &y, 3, &ForestConfig { n_trees: 15, ..Default::default() }).unwrap());
    let path = dir.path().join("model_forest.mdl");
    save_model(&path, &model).unwrap();
    let m = load(&path);
    let mut probs = vec![0f64; fm.n() * 3];
    let st = unsafe { fracture_model_predict_proba(m, fm.data().as_ptr(), fm.n(), fm.d(), probs.as_mut_ptr()) };
    assert_eq!(st, FractureStatus::Ok);
    for row in probs.chunks(3) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|&p| (p * 15.0 - (p * 15.0).round()).abs() < 1e-9));
    }
    unsafe { fracture_model_free(m) };
}

#[test]
fn errors_carry_status_and_message() {
    let mut slice = ptr::null_mut();
    let bytes = dicom_bytes(&phantom(2, 1), 1);
    let st = unsafe { fracture_slice_parse(bytes.as_ptr(), bytes.len() / 2, &mut slice) };
    assert_eq!(st, FractureStatus::Parse);
    assert!(slice.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { fracture_slice_parse(ptr::null(), 10, &mut slice) }, FractureStatus::NullPointer);
    assert_eq!(unsafe { fracture_slice_parse(bytes.as_ptr(), bytes.len(), ptr::null_mut()) }, FractureStatus::NullPointer);

    let missing = CString::new("/nonexistent/model.mdl").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fracture_model_load(missing.as_ptr(), &mut m) }, FractureStatus::Io);

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.mdl");
    std::fs::write(&junk, b"MDL1\x09garbage").unwrap();
    let junk_c = CString::new(junk.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { fracture_model_load(junk_c.as_ptr(), &mut m) }, FractureStatus::Model);

    // A successful call clears the message.
    let good = parse(&bytes);
    assert!(fracture_last_error().is_null());
    unsafe { fracture_slice_free(good) };

    // Freeing null is a no-op.
    unsafe {
        fracture_slice_free(ptr::null_mut());
        fracture_model_free(ptr::null_mut());
    }
    assert_eq!(unsafe { fracture_model_n_classes(ptr::null()) }, 0);
}

#[cfg(not(feature = "onnx"))]
#[test]
fn sidecar_extractor_reports_missing_backend() {
    let dir = tempfile::tempdir().unwrap();
    let sidecar = dir.path().join("model.json");
    std::fs::write(
        &sidecar,
        r#"{"model_path":"model.onnx","input_name":"input","output_name":"features","input_side":224,"output_dim":2048}"#,
    )
    .unwrap();
    let c = CString::new(sidecar.to_str().unwrap()).unwrap();
    let mut ex = ptr::null_mut();
    let st = unsafe { fracture_extractor_from_sidecar(c.as_ptr(), &mut ex) };
    assert_eq!(st, FractureStatus::Unsupported, "{}", last_error());
    assert!(ex.is_null());
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(fracture_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export_and_compiles() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/fracture.h")).unwrap();
    let src = std::fs::read_to_string(root.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }

    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let probe = dir.path().join("probe.c");
    std::fs::write(&probe, "#include \"fracture.h\"\nint main(void) { return fracture_last_error() != 0; }\n").unwrap();
    let status = Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(root.join("include"))
        .arg(&probe)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
