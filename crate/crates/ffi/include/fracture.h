#ifndef FRACTURE_H
#define FRACTURE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FractureStatus {
  FRACTURE_STATUS_OK = 0,
  FRACTURE_STATUS_NULL_POINTER = 1,
  FRACTURE_STATUS_INVALID_ARGUMENT = 2,
  FRACTURE_STATUS_IO = 3,
  FRACTURE_STATUS_PARSE = 4,
  FRACTURE_STATUS_PREPROCESS = 5,
  FRACTURE_STATUS_MODEL = 6,
  FRACTURE_STATUS_SHAPE_MISMATCH = 7,
  FRACTURE_STATUS_BUFFER_TOO_SMALL = 8,
  FRACTURE_STATUS_UNSUPPORTED = 9,
  FRACTURE_STATUS_PANIC = 10,
} FractureStatus;

/**
 * A configured feature extractor.
 */
typedef struct FractureExtractor FractureExtractor;

/**
 * A preprocessed square image.
 */
typedef struct FractureImage FractureImage;

/**
 * A trained classifier loaded from a model file.
 */
typedef struct FractureModel FractureModel;

/**
 * A parsed CT slice.
 */
typedef struct FractureSlice FractureSlice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *fracture_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fracture_version(void);

/**
 * Parses a DICOM file held in memory.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes; `out` must be writable.
 */
enum FractureStatus fracture_slice_parse(const uint8_t *bytes,
                                         size_t len,
                                         struct FractureSlice **out);

/**
 * Reads and parses a DICOM file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FractureStatus fracture_slice_read(const char *path, struct FractureSlice **out);

/**
 * Image size and slice thickness of a parsed slice. Any output may be null.
 *
 * # Safety
 * `slice` must be a live handle.
 */
enum FractureStatus fracture_slice_info(const struct FractureSlice *slice,
                                        size_t *rows,
                                        size_t *cols,
                                        double *thickness_mm);

/**
 * # Safety
 * `slice` must be null or a handle not yet freed.
 */
void fracture_slice_free(struct FractureSlice *slice);

/**
 * Runs HU conversion, background stripping, optional tilt correction and
 * crop/pad to an `out_side` square.
 *
 * # Safety
 * `slice` must be a live handle; `out` must be writable.
 */
enum FractureStatus fracture_preprocess(const struct FractureSlice *slice,
                                        double threshold_hu,
                                        size_t out_side,
                                        bool tilt_enabled,
                                        struct FractureImage **out);

/**
 * Wraps caller-owned pixel values (`side * side`, row-major) as an image.
 *
 * # Safety
 * `values` must point to `side * side` floats; `out` must be writable.
 */
enum FractureStatus fracture_image_new(const float *values,
                                       size_t side,
                                       struct FractureImage **out);

/**
 * # Safety
 * `image` must be a live handle.
 */
size_t fracture_image_side(const struct FractureImage *image);

/**
 * Copies the `side * side` pixel values into `buf`.
 *
 * # Safety
 * `image` must be a live handle; `buf` must hold `len` floats.
 */
enum FractureStatus fracture_image_copy(const struct FractureImage *image, float *buf, size_t len);

/**
 * # Safety
 * `image` must be null or a handle not yet freed.
 */
void fracture_image_free(struct FractureImage *image);

/**
 * Seeded random-projection extractor for `input_side` images.
 *
 * # Safety
 * `out` must be writable.
 */
enum FractureStatus fracture_extractor_toy(uint64_t seed,
                                           size_t dim,
                                           size_t input_side,
                                           struct FractureExtractor **out);

/**
 * Model-backed extractor described by a JSON sidecar. Returns
 * `Unsupported` when the library was built without the model backend.
 *
 * # Safety
 * `sidecar_path` must be a NUL-terminated string; `out` must be writable.
 */
enum FractureStatus fracture_extractor_from_sidecar(const char *sidecar_path,
                                                    struct FractureExtractor **out);

/**
 * # Safety
 * `ex` must be a live handle.
 */
size_t fracture_extractor_dim(const struct FractureExtractor *ex);

/**
 * # Safety
 * `ex` must be a live handle.
 */
size_t fracture_extractor_input_side(const struct FractureExtractor *ex);

/**
 * Writes the feature vector of `image` into `buf` (`dim` floats).
 *
 * # Safety
 * Handles must be live; `buf` must hold `len` floats.
 */
enum FractureStatus fracture_extract(const struct FractureExtractor *ex,
                                     const struct FractureImage *image,
                                     float *buf,
                                     size_t len);

/**
 * # Safety
 * `ex` must be null or a handle not yet freed.
 */
void fracture_extractor_free(struct FractureExtractor *ex);

/**
 * Loads a model file written by `fracture run`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FractureStatus fracture_model_load(const char *path, struct FractureModel **out);

/**
 * # Safety
 * `model` must be a live handle.
 */
size_t fracture_model_n_classes(const struct FractureModel *model);

/**
 * # Safety
 * `model` must be a live handle.
 */
size_t fracture_model_n_features(const struct FractureModel *model);

/**
 * "gbdt", "forest" or "svc"; a static string.
 *
 * # Safety
 * `model` must be a live handle.
 */
const char *fracture_model_kind(const struct FractureModel *model);

/**
 * Predicts class ids for `n` rows of `d` features (row-major).
 *
 * # Safety
 * `features` must hold `n * d` floats and `labels` `n` bytes.
 */
enum FractureStatus fracture_model_predict(const struct FractureModel *model,
                                           const float *features,
                                           size_t n,
                                           size_t d,
                                           uint8_t *labels);

/**
 * Writes an `n x n_classes` row-major probability matrix. Models without
 * probabilities (the linear SVC) yield one-hot rows of their predictions.
 *
 * # Safety
 * `features` must hold `n * d` floats and `probs` `n * n_classes` doubles.
 */
enum FractureStatus fracture_model_predict_proba(const struct FractureModel *model,
                                                 const float *features,
                                                 size_t n,
                                                 size_t d,
                                                 double *probs);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void fracture_model_free(struct FractureModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACTURE_H */
