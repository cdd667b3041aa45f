#ifndef HISTCI_H
#define HISTCI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum HciMethod {
  HCI_METHOD_HISTOGRAM = 0,
  HCI_METHOD_LINEAR_INTERPOLATION = 1,
  HCI_METHOD_FREQUENCY_POLYGON = 2,
  HCI_METHOD_GLD = 3,
} HciMethod;

typedef enum HciStatus {
  HCI_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  HCI_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument, such as a probability outside (0, 1).
   */
  HCI_STATUS_USAGE = 2,
  /**
   * Input data failed validation.
   */
  HCI_STATUS_VALIDATION = 3,
  /**
   * The estimator could not produce a result for valid input.
   */
  HCI_STATUS_ESTIMATION = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  HCI_STATUS_INVALID_UTF8 = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  HCI_STATUS_PANIC = 6,
} HciStatus;

/**
 * Opaque grouped-data handle.
 */
typedef struct HciData HciData;

/**
 * Linear-interpolation switches. A null pointer means all false.
 */
typedef struct HciOptions {
  /**
   * Model the last bin as an unbounded exponential tail.
   */
  bool unbounded_tail;
  /**
   * Clip a negative segment instead of failing.
   */
  bool clip_negative;
} HciOptions;

typedef struct HciInterval {
  double point;
  /**
   * Density estimate at the point.
   */
  double density;
  double lower;
  double upper;
  double level;
  /**
   * Sample size used for the standard error.
   */
  double n;
} HciInterval;

typedef struct HciDiffInterval {
  /**
   * `x̂_p − ŷ_p`.
   */
  double difference;
  double lower;
  double upper;
  double level;
} HciDiffInterval;

typedef struct HciGldFit {
  double lambda;
  double eta;
  double alpha;
  double beta;
  double residual;
  uint64_t iterations;
  bool converged;
} HciGldFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds grouped data from `len` bins. `mean` may be null; otherwise NaN
 * entries mean "no mean for this bin".
 *
 * # Safety
 * `lower`, `upper` and `freq` (and `mean` when non-null) must point to `len`
 * readable doubles; `out` must be writable.
 */
enum HciStatus hci_data_new(const double *lower,
                            const double *upper,
                            const double *freq,
                            const double *mean,
                            uintptr_t len,
                            struct HciData **out);

/**
 * Parses CSV text (`lower,upper,freq[,mean]` with a header row).
 *
 * # Safety
 * `csv` must be a nul-terminated string; `out` must be writable.
 */
enum HciStatus hci_data_from_csv(const char *csv, struct HciData **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void hci_data_free(struct HciData *h);

/**
 * Number of bins and total frequency.
 *
 * # Safety
 * `h` must be a live handle; `bins` and `n` must be writable.
 */
enum HciStatus hci_data_info(const struct HciData *h, uintptr_t *bins, double *n);

/**
 * Quantile point estimate and density at it.
 *
 * # Safety
 * `h` must be a live handle; `options` null or valid; `x_hat` and `f_hat` writable.
 */
enum HciStatus hci_estimate(const struct HciData *h,
                            enum HciMethod method,
                            double p,
                            const struct HciOptions *options,
                            double *x_hat,
                            double *f_hat);

/**
 * Confidence interval for the `p` quantile. `n_override <= 0` uses the total frequency.
 *
 * # Safety
 * `h` must be a live handle; `options` null or valid; `out` writable.
 */
enum HciStatus hci_ci(const struct HciData *h,
                      enum HciMethod method,
                      double p,
                      double level,
                      double n_override,
                      const struct HciOptions *options,
                      struct HciInterval *out);

/**
 * Interval for `x_p − y_p`; sample sizes are the total frequencies.
 *
 * # Safety
 * `x` and `y` must be live handles; `options` null or valid; `out` writable.
 */
enum HciStatus hci_ci_diff(const struct HciData *x,
                           enum HciMethod method_x,
                           const struct HciData *y,
                           enum HciMethod method_y,
                           double p,
                           double level,
                           const struct HciOptions *options,
                           struct HciDiffInterval *out);

/**
 * Percentile-matching GLD fit with default settings.
 *
 * # Safety
 * `h` must be a live handle; `out` writable.
 */
enum HciStatus hci_fit_gld(const struct HciData *h, struct HciGldFit *out);

/**
 * Standard normal quantile.
 *
 * # Safety
 * `out` must be writable.
 */
enum HciStatus hci_z_quantile(double q, double *out);

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *hci_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HISTCI_H */
