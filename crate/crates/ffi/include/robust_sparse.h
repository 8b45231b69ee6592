#ifndef ROBUST_SPARSE_H
#define ROBUST_SPARSE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  RS_STATUS_DEGENERATE_WEIGHTS = 3,
  RS_STATUS_EMPTY_INPUT = 4,
  RS_STATUS_EMPTY_SLICE = 5,
  RS_STATUS_NUMERICAL = 6,
  RS_STATUS_IO = 7,
  RS_STATUS_FORMAT = 8,
  RS_STATUS_PANIC = 9,
} RsStatus;

typedef enum RsTask {
  RS_TASK_MEAN = 0,
  RS_TASK_PCA = 1,
  RS_TASK_REGRESSION = 2,
} RsTask;

/**
 * Opaque dataset handle.
 */
typedef struct RsDataset RsDataset;

/**
 * Opaque estimate handle.
 */
typedef struct RsEstimate RsEstimate;

/**
 * Parameters of [`rs_dataset_generate`].
 */
typedef struct RsGenerateParams {
  enum RsTask task;
  size_t n;
  size_t d;
  size_t k;
  double epsilon;
  /**
   * Spike strength (pca).
   */
  double rho;
  /**
   * Noise level (regression).
   */
  double sigma;
  /**
   * Norm of the planted mean or regressor.
   */
  double norm;
  uint64_t seed;
  /**
   * Adversary name such as `"evasive_tail"`; null means none.
   */
  const char *adversary;
} RsGenerateParams;

/**
 * Parameters of [`rs_estimate`].
 */
typedef struct RsEstimateParams {
  enum RsTask task;
  /**
   * `"paper"`, `"baseline_single_direction"`, `"classical"` or `"coordinate_median"`; null means paper.
   */
  const char *estimator;
  size_t k;
  double epsilon;
  double rho;
  uint64_t seed;
  /**
   * JSON object of configuration overrides, or null.
   */
  const char *config_json;
} RsEstimateParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

/**
 * Message of the last failure on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *rs_last_error_message(void);

/**
 * Wraps a row-major `n x d` sample matrix, copied. `responses` (length `n`)
 * and `labels` (length `n`, nonzero = outlier) may be null.
 *
 * # Safety
 * `data` must point to `n * d` doubles, `responses` to `n` doubles and
 * `labels` to `n` bytes when non-null; `out` must be writable.
 */
enum RsStatus rs_dataset_from_rows(const double *data,
                                   size_t n,
                                   size_t d,
                                   enum RsTask task,
                                   const double *responses,
                                   const uint8_t *labels,
                                   struct RsDataset **out);

/**
 * Draws a synthetic contaminated dataset.
 *
 * # Safety
 * `params` must point to a valid struct and `out` must be writable.
 */
enum RsStatus rs_dataset_generate(const struct RsGenerateParams *params, struct RsDataset **out);

/**
 * Reads a dataset CSV with its optional `.labels` and `.truth.json` siblings.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum RsStatus rs_dataset_load(const char *path, struct RsDataset **out);

/**
 * Writes the dataset as CSV plus siblings.
 *
 * # Safety
 * `ds` must be a live handle and `path` a NUL-terminated string.
 */
enum RsStatus rs_dataset_save(const struct RsDataset *ds, const char *path);

/**
 * Number of samples and dimension.
 *
 * # Safety
 * `ds` must be a live handle; `n` and `d` writable.
 */
enum RsStatus rs_dataset_shape(const struct RsDataset *ds, size_t *n, size_t *d);

/**
 * Copies the samples row-major into `out`, which holds `capacity` doubles.
 *
 * # Safety
 * `ds` must be a live handle and `out` must hold `capacity` doubles.
 */
enum RsStatus rs_dataset_copy_samples(const struct RsDataset *ds, double *out, size_t capacity);

/**
 * Releases a dataset; null is ignored.
 *
 * # Safety
 * `ds` must come from this library and not be used afterwards.
 */
void rs_dataset_free(struct RsDataset *ds);

/**
 * Runs an estimator. When the dataset carries ground truth the JSON report
 * includes error metrics.
 *
 * # Safety
 * `ds` must be a live handle, `params` a valid struct, `out` writable.
 */
enum RsStatus rs_estimate(const struct RsDataset *ds,
                          const struct RsEstimateParams *params,
                          struct RsEstimate **out);

/**
 * Length of the estimated vector.
 *
 * # Safety
 * `est` must be a live handle.
 */
size_t rs_estimate_len(const struct RsEstimate *est);

/**
 * Copies the estimate into `out`, which holds `capacity` doubles.
 *
 * # Safety
 * `est` must be a live handle and `out` must hold `capacity` doubles.
 */
enum RsStatus rs_estimate_copy(const struct RsEstimate *est, double *out, size_t capacity);

/**
 * JSON report owned by the handle; valid until [`rs_estimate_free`].
 *
 * # Safety
 * `est` must be a live handle.
 */
const char *rs_estimate_report_json(const struct RsEstimate *est);

/**
 * Releases an estimate; null is ignored.
 *
 * # Safety
 * `est` must come from this library and not be used afterwards.
 */
void rs_estimate_free(struct RsEstimate *est);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUST_SPARSE_H */
