//! C ABI over `fracture-core`.
//!
//! Every object crosses the boundary as an opaque handle created by a
//! `*_new`/`*_load`/`*_parse` function and released with the matching
//! `*_free`. Functions return a [`FractureStatus`]; on failure a message is
//! available from [`fracture_last_error`] on the same thread. Panics are
//! caught and reported as [`FractureStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fracture_core::classifiers::{load_model, Model};
use fracture_core::dicom::{extract_ct_slice, parse_dicom, CtSlice};
use fracture_core::features::{extract_features, toy_extractor, FeatureExtractor, FeatureMatrix, OnnxExtractor};
use fracture_core::metrics::hard_probabilities;
use fracture_core::preprocess::{preprocess_slice, PreprocessConfig, TensorImage};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FractureStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Preprocess = 5,
    Model = 6,
    ShapeMismatch = 7,
    BufferTooSmall = 8,
    Unsupported = 9,
    Panic = 10,
}

/// A parsed CT slice.
pub struct FractureSlice(CtSlice);

/// A preprocessed square image.
pub struct FractureImage(TensorImage);

/// A configured feature extractor.
pub struct FractureExtractor(FeatureExtractor);

/// A trained classifier loaded from a model file.
pub struct FractureModel(Model);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FractureStatus, String);

impl Failure {
    fn new(status: FractureStatus, msg: impl ToString) -> Self {
        Self(status, msg.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FractureStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FractureStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("panic: {msg}"));
            FractureStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(FractureStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(FractureStatus::NullPointer, format!("{what} is null")))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(Failure::new(FractureStatus::NullPointer, "path is null"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| Failure::new(FractureStatus::InvalidArgument, "path is not UTF-8"))?;
    Ok(Path::new(s))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fracture_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fracture_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a DICOM file held in memory.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracture_slice_parse(bytes: *const u8, len: usize, out: *mut *mut FractureSlice) -> FractureStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if bytes.is_null() {
            return Err(Failure::new(FractureStatus::NullPointer, "bytes is null"));
        }
        let data = std::slice::from_raw_parts(bytes, len);
        let map = parse_dicom(data).map_err(|e| Failure::new(FractureStatus::Parse, e))?;
        let slice = extract_ct_slice(&map).map_err(|e| Failure::new(FractureStatus::Parse, e))?;
        *out = boxed(FractureSlice(slice));
        Ok(())
    })
}

/// Reads and parses a DICOM file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracture_slice_read(path: *const c_char, out: *mut *mut FractureSlice) -> FractureStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = path_arg(path)?;
        let data = std::fs::read(path).map_err(|e| Failure::new(FractureStatus::Io, format!("{}: {e}", path.display())))?;
        let map = parse_dicom(&data).map_err(|e| Failure::new(FractureStatus::Parse, e))?;
        let slice = extract_ct_slice(&map).map_err(|e| Failure::new(FractureStatus::Parse, e))?;
        *out = boxed(FractureSlice(slice));
        Ok(())
    })
}

/// Image size and slice thickness of a parsed slice. Any output may be null.
///
/// # Safety
/// `slice` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracture_slice_info(
    slice: *const FractureSlice,
    rows: *mut usize,
    cols: *mut usize,
    thickness_mm: *mut f64,
) -> FractureStatus {
    guard(|| {
        let s = &deref(slice, "slice")?.0;
        if let Some(r) = rows.as_mut() {
            *r = s.rows;
        }
        if let Some(c) = cols.as_mut() {
            *c = s.cols;
        }
        if let Some(t) = thickness_mm.as_mut() {
            *t = s.slice_thickness_mm;
        }
        Ok(())
    })
}

/// # Safety
/// `slice` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fracture_slice_free(slice: *mut FractureSlice) {
    free(slice);
}

/// Runs HU conversion, background stripping, optional tilt correction and
/// crop/pad to an `out_side` square.
///
/// # Safety
/// `slice` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracture_preprocess(
    slice: *const FractureSlice,
    threshold_hu: f64,
    out_side: usize,
    tilt_enabled: bool,
    out: *mut *mut FractureImage,
) -> FractureStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let s = &deref(slice, "slice")?.0;
        if !threshold_hu.is_finite() {
            return Err(Failure::new(FractureStatus::InvalidArgument, "threshold_hu is not finite"));
        }
        let cfg = PreprocessConfig { threshold_hu, out_side, tilt_enabled };
        let img = preprocess_slice(s, &cfg).map_err(|e| Failure::new(FractureStatus::Preprocess, e))?;
        *out = boxed(FractureImage(img));
        Ok(())
    })
}

/// Wraps caller-owned pixel values (`side * side`, row-major) as an image.
///
/// # Safety
/// `values` must point to `side * side` floats; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracture_image_new(values: *const f32, side: usize, out: *mut *mut FractureImage) -> FractureStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if values.is_null() {
            return Err(Failure::new(FractureStatus::NullPointer, "values is null"));
        }
        let n = side.checked_mul(side).filter(|&n| n > 0).ok_or_else(|| Failure::new(FractureStatus::InvalidArgument, "bad side"))?;
        let v = std::slice::from_raw_parts(values, n).to_vec();
        *out = boxed(FractureImage(TensorImage::new(side, v)));
        Ok(())
    })
}

/// # Safety
/// `image` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracture_image_side(image: *const FractureImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.side)
}

/// Copies the `side * side` pixel values into `buf`.
///
/// # Safety
/// `image` must be a live handle; `buf` must hold `len` floats.
#[no_mangle]
pub unsafe extern "C" fn fracture_image_copy(image: *const FractureImage, buf: *mut f32, len: usize) -> FractureStatus {
    guard(|| {
        let img = &deref(image, "image")?.0;
        if buf.is_null() {
            return Err(Failure::new(FractureStatus::NullPointer, "buf is null"));
        }
        if len < img.values.len() {
            return Err(Failure::new(FractureStatus::BufferTooSmall, format!("need {} values, got {len}", img.values.len())));
        }
        ptr::copy_nonoverlapping(img.values.as_ptr(), buf, img.values.len());
        Ok(())
    })
}

/// # Safety
/// `image` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fracture_image_free(image: *mut FractureImage) {
    free(image);
}

/// Seeded random-projection extractor for `input_side` images.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracture_extractor_toy(
    seed: u64,
    dim: usize,
    input_side: usize,
    out: *mut *mut FractureExtractor,
) -> FractureStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if dim == 0 || input_side == 0 {
            return Err(Failure::new(FractureStatus::InvalidArgument, "dim and input_side must be positive"));
        }
        *out = boxed(FractureExtractor(FeatureExtractor::Toy(toy_extractor(seed, dim, input_side))));
        Ok(())
    })
}

/// Model-backed extractor described by a JSON sidecar. Returns
/// `Unsupported` when the library was built without the model backend.
///
/// # Safety
/// `sidecar_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracture_extractor_from_sidecar(
    sidecar_path: *const c_char,
    out: *mut *mut FractureExtractor,
) -> FractureStatus {
    use fracture_core::features::FeaturesError;
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = path_arg(sidecar_path)?;
        let ex = OnnxExtractor::from_sidecar_path(path).map_err(|e| {
            let status = match e {
                FeaturesError::BackendUnavailable(_) => FractureStatus::Unsupported,
                FeaturesError::Io(_) => FractureStatus::Io,
                FeaturesError::Sidecar(_) => FractureStatus::Parse,
                _ => FractureStatus::Model,
            };
            Failure::new(status, e)
        })?;
        *out = boxed(FractureExtractor(FeatureExtractor::Onnx(ex)));
        Ok(())
    })
}

/// # Safety
/// `ex` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracture_extractor_dim(ex: *const FractureExtractor) -> usize {
    ex.as_ref().map_or(0, |e| e.0.output_dim())
}

/// # Safety
/// `ex` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracture_extractor_input_side(ex: *const FractureExtractor) -> usize {
    ex.as_ref().map_or(0, |e| e.0.input_side())
}

/// Writes the feature vector of `image` into `buf` (`dim` floats).
///
/// # Safety
/// Handles must be live; `buf` must hold `len` floats.
#[no_mangle]
pub unsafe extern "C" fn fracture_extract(
    ex: *const FractureExtractor,
    image: *const FractureImage,
    buf: *mut f32,
    len: usize,
) -> FractureStatus {
    guard(|| {
        let ex = &deref(ex, "extractor")?.0;
        let img = &deref(image, "image")?.0;
        if buf.is_null() {
            return Err(Failure::new(FractureStatus::NullPointer, "buf is null"));
        }
        let d = ex.output_dim();
        if len < d {
            return Err(Failure::new(FractureStatus::BufferTooSmall, format!("need {d} values, got {len}")));
        }
        let fm = extract_features(std::slice::from_ref(img), ex).map_err(|e| Failure::new(FractureStatus::ShapeMismatch, e))?;
        ptr::copy_nonoverlapping(fm.row(0).as_ptr(), buf, d);
        Ok(())
    })
}

/// # Safety
/// `ex` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fracture_extractor_free(ex: *mut FractureExtractor) {
    free(ex);
}

/// Loads a model file written by `fracture run`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracture_model_load(path: *const c_char, out: *mut *mut FractureModel) -> FractureStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = path_arg(path)?;
        let model = load_model(path).map_err(|e| {
            let status = if path.exists() { FractureStatus::Model } else { FractureStatus::Io };
            Failure::new(status, format!("{}: {e}", path.display()))
        })?;
        *out = boxed(FractureModel(model));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracture_model_n_classes(model: *const FractureModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_classes())
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracture_model_n_features(model: *const FractureModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_features())
}

/// "gbdt", "forest" or "svc"; a static string.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracture_model_kind(model: *const FractureModel) -> *const c_char {
    match model.as_ref().map(|m| &m.0) {
        Some(Model::Gbdt(_)) => c"gbdt".as_ptr(),
        Some(Model::Forest(_)) => c"forest".as_ptr(),
        Some(Model::Svc(_)) => c"svc".as_ptr(),
        None => ptr::null(),
    }
}

unsafe fn feature_rows(model: &Model, features: *const f32, n: usize, d: usize) -> Result<FeatureMatrix, Failure> {
    if features.is_null() {
        return Err(Failure::new(FractureStatus::NullPointer, "features is null"));
    }
    if n == 0 {
        return Err(Failure::new(FractureStatus::InvalidArgument, "no rows"));
    }
    if d != model.n_features() {
        return Err(Failure::new(FractureStatus::ShapeMismatch, format!("model expects {} features, got {d}", model.n_features())));
    }
    let len = n.checked_mul(d).ok_or_else(|| Failure::new(FractureStatus::InvalidArgument, "n * d overflows"))?;
    let data = std::slice::from_raw_parts(features, len).to_vec();
    FeatureMatrix::new(n, d, data).map_err(|e| Failure::new(FractureStatus::InvalidArgument, e))
}

/// Predicts class ids for `n` rows of `d` features (row-major).
///
/// # Safety
/// `features` must hold `n * d` floats and `labels` `n` bytes.
#[no_mangle]
pub unsafe extern "C" fn fracture_model_predict(
    model: *const FractureModel,
    features: *const f32,
    n: usize,
    d: usize,
    labels: *mut u8,
) -> FractureStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        if labels.is_null() {
            return Err(Failure::new(FractureStatus::NullPointer, "labels is null"));
        }
        let fm = feature_rows(m, features, n, d)?;
        let pred = m.predict(&fm).map_err(|e| Failure::new(FractureStatus::Model, e))?;
        ptr::copy_nonoverlapping(pred.as_ptr(), labels, n);
        Ok(())
    })
}

/// Writes an `n x n_classes` row-major probability matrix. Models without
/// probabilities (the linear SVC) yield one-hot rows of their predictions.
///
/// # Safety
/// `features` must hold `n * d` floats and `probs` `n * n_classes` doubles.
#[no_mangle]
pub unsafe extern "C" fn fracture_model_predict_proba(
    model: *const FractureModel,
    features: *const f32,
    n: usize,
    d: usize,
    probs: *mut f64,
) -> FractureStatus {
    guard(|| {
        let m = &deref(model, "model")?.0;
        if probs.is_null() {
            return Err(Failure::new(FractureStatus::NullPointer, "probs is null"));
        }
        let fm = feature_rows(m, features, n, d)?;
        let fail = |e| Failure::new(FractureStatus::Model, e);
        let p = match m.probabilities(&fm).map_err(fail)? {
            Some(p) => p,
            None => hard_probabilities(&m.predict(&fm).map_err(fail)?, m.n_classes()),
        };
        ptr::copy_nonoverlapping(p.data.as_ptr(), probs, p.data.len());
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fracture_model_free(model: *mut FractureModel) {
    free(model);
}
