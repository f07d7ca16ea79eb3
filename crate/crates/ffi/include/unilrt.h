#ifndef UNILRT_H
#define UNILRT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible entry point.
 */
typedef enum {
  UNILRT_STATUS_OK = 0,
  /**
   * An argument violates a precondition (alpha outside (0,1), dimension mismatch, ...).
   */
  UNILRT_STATUS_DOMAIN = 1,
  /**
   * A numerical routine failed to converge.
   */
  UNILRT_STATUS_NUMERIC = 2,
  /**
   * The operation is not defined for this configuration.
   */
  UNILRT_STATUS_UNSUPPORTED = 3,
  /**
   * Reading or writing data failed.
   */
  UNILRT_STATUS_IO = 4,
  /**
   * A required pointer argument was null.
   */
  UNILRT_STATUS_NULL_POINTER = 5,
  /**
   * Rust code panicked; the library state is still valid.
   */
  UNILRT_STATUS_PANIC = 6,
} UnilrtStatus;

/**
 * Closed form used by the power functions.
 */
typedef enum {
  UNILRT_POWER_FORM_EXACT = 0,
  UNILRT_POWER_FORM_NORMAL_APPROX = 1,
} UnilrtPowerForm;

/**
 * Universal tests whose power is simulated.
 */
typedef enum {
  UNILRT_MC_TEST_SPLIT = 0,
  UNILRT_MC_TEST_CROSSFIT = 1,
  UNILRT_MC_TEST_SUBSAMPLING = 2,
} UnilrtMcTest;

/**
 * An `n x d` sample.
 */
typedef struct UnilrtSample UnilrtSample;

/**
 * `B` random splits of one sample into `D0` and `D1`.
 */
typedef struct UnilrtSplits UnilrtSplits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null if the last
 * call succeeded. The pointer stays valid until the next call into this
 * library on the same thread; do not free it.
 */
const char *unilrt_last_error_message(void);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *unilrt_status_name(UnilrtStatus status);

/**
 * Standard normal CDF.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_std_normal_cdf(double x, double *out);

/**
 * Chi-square CDF with `d` degrees of freedom.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_chi2_cdf(double x, size_t d, double *out);

/**
 * Upper quantile `c` with `P(chi2_d >= c) = alpha`.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_chi2_upper_quantile(double alpha, size_t d, double *out);

/**
 * Noncentral chi-square CDF with `d` degrees of freedom and noncentrality `lambda`.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_noncentral_chi2_cdf(double x, size_t d, double lambda, double *out);

/**
 * Split proportion `p0` minimising the expected squared split radius.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_optimal_split_proportion(double alpha, size_t d, double *out);

/**
 * Expected squared radius of the split set at proportion `p0`.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_expected_sq_radius_split(double alpha,
                                             size_t d,
                                             size_t n,
                                             double p0,
                                             double *out);

/**
 * Ratio of expected squared radii, split (p0 = 1/2) over classical.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_ratio_expected(double alpha, size_t d, double *out);

/**
 * Lower and upper bounds on the expected-radius ratio.
 *
 * `upper` is written as NaN and `domain_ok` as false when the upper bound's
 * hypotheses fail.
 *
 * # Safety
 * All out-pointers must be valid.
 */
UnilrtStatus unilrt_ratio_bounds(double alpha,
                                 size_t d,
                                 double *lower,
                                 double *upper,
                                 bool *domain_ok);

/**
 * Bounds on the probability that the squared-radius ratio is at most 4.
 *
 * # Safety
 * All out-pointers must be valid.
 */
UnilrtStatus unilrt_prob_ratio_bounds(double alpha,
                                      size_t d,
                                      double *lower,
                                      double *upper,
                                      bool *condition_ok);

/**
 * Power of the classical LRT at squared mean norm `theta_sq_norm`.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_power_classical(double theta_sq_norm,
                                    size_t n,
                                    size_t d,
                                    double alpha,
                                    UnilrtPowerForm power_form,
                                    double *out);

/**
 * Power of the limiting (B to infinity) subsampling test.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_power_limiting_subsampling(double theta_sq_norm,
                                               size_t n,
                                               size_t d,
                                               double alpha,
                                               UnilrtPowerForm power_form,
                                               double *out);

/**
 * Monte Carlo power of a universal test at mean `theta[0..d]`.
 *
 * Deterministic in `seed`. `b` is ignored except for subsampling.
 *
 * # Safety
 * `theta` must point to `d` doubles; `value` and `stderr` must be valid.
 */
UnilrtStatus unilrt_power_monte_carlo(UnilrtMcTest test,
                                      const double *theta,
                                      size_t d,
                                      size_t n,
                                      double alpha,
                                      size_t b,
                                      size_t reps,
                                      uint64_t seed,
                                      double *value,
                                      double *stderr);

/**
 * Exact power of the intersection test of `r_in <= |theta| <= r_out`
 * at true mean norm `theta_norm`. Only the annulus `[0.5, 1]` is supported.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
UnilrtStatus unilrt_intersection_power_exact(double theta_norm,
                                             size_t n,
                                             size_t d,
                                             double alpha,
                                             double r_in,
                                             double r_out,
                                             double *out);

/**
 * Copies `n * d` row-major values into a new sample.
 *
 * # Safety
 * `values` must point to `n * d` doubles; `sample` must be valid. The
 * handle written to `*sample` must be released with [`unilrt_sample_free`].
 */
UnilrtStatus unilrt_sample_from_rows(const double *values,
                                     size_t n,
                                     size_t d,
                                     UnilrtSample **sample);

/**
 * Draws `n` observations from `N(theta, I_d)`; deterministic in `seed`.
 *
 * # Safety
 * `theta` must point to `d` doubles; `sample` must be valid. Release the
 * handle with [`unilrt_sample_free`].
 */
UnilrtStatus unilrt_sample_gaussian(size_t n,
                                    const double *theta,
                                    size_t d,
                                    uint64_t seed,
                                    UnilrtSample **sample);

/**
 * Releases a sample. Null is a no-op.
 *
 * # Safety
 * `sample` must be null or a handle from this library not yet freed.
 */
void unilrt_sample_free(UnilrtSample *sample);

/**
 * Number of observations, or 0 for a null handle.
 *
 * # Safety
 * `sample` must be null or a live handle.
 */
size_t unilrt_sample_n(const UnilrtSample *sample);

/**
 * Dimension, or 0 for a null handle.
 *
 * # Safety
 * `sample` must be null or a live handle.
 */
size_t unilrt_sample_d(const UnilrtSample *sample);

/**
 * Copies the sample mean into `mean[0..len]`; `len` must equal the dimension.
 *
 * # Safety
 * `sample` must be a live handle; `mean` must point to `len` writable doubles.
 */
UnilrtStatus unilrt_sample_mean(const UnilrtSample *sample, double *mean, size_t len);

/**
 * Tests `|Ybar| in [r_in, r_out]` at level `alpha` by intersecting the
 * classical set with the annulus.
 *
 * # Safety
 * `sample` must be a live handle; `reject` must be valid.
 */
UnilrtStatus unilrt_intersection_test(const UnilrtSample *sample,
                                      double alpha,
                                      double r_in,
                                      double r_out,
                                      bool *reject);

/**
 * Classical LRT set: writes its center (`len` = d values) and squared radius.
 *
 * # Safety
 * `sample` must be a live handle; `center` must point to `len` writable
 * doubles; `sq_radius` must be valid.
 */
UnilrtStatus unilrt_classical_region(const UnilrtSample *sample,
                                     double alpha,
                                     double *center,
                                     size_t len,
                                     double *sq_radius);

/**
 * Limiting (B to infinity) subsampling set: center and squared radius.
 *
 * # Safety
 * As for [`unilrt_classical_region`].
 */
UnilrtStatus unilrt_limiting_subsampling_region(const UnilrtSample *sample,
                                                double alpha,
                                                double *center,
                                                size_t len,
                                                double *sq_radius);

/**
 * Draws `b` independent splits of `sample` with `D0` holding a `p0` share.
 * Deterministic in `seed`.
 *
 * # Safety
 * `sample` must be a live handle; `splits` must be valid. Release the
 * handle with [`unilrt_splits_free`].
 */
UnilrtStatus unilrt_splits_new(const UnilrtSample *sample,
                               size_t b,
                               double p0,
                               uint64_t seed,
                               UnilrtSplits **splits);

/**
 * Releases a split collection. Null is a no-op.
 *
 * # Safety
 * `splits` must be null or a handle from this library not yet freed.
 */
void unilrt_splits_free(UnilrtSplits *splits);

/**
 * Number of splits, or 0 for a null handle.
 *
 * # Safety
 * `splits` must be null or a live handle.
 */
size_t unilrt_splits_len(const UnilrtSplits *splits);

/**
 * Log split statistic of split `index` at `theta[0..d]`. `theta` is
 * rejected at level alpha iff the value is at least `ln(1/alpha)`.
 *
 * # Safety
 * `splits` must be a live handle; `theta` must point to `d` doubles;
 * `out` must be valid.
 */
UnilrtStatus unilrt_split_log_statistic(const UnilrtSplits *splits,
                                        size_t index,
                                        const double *theta,
                                        size_t d,
                                        double *out);

/**
 * Log cross-fit statistic of split `index` at `theta[0..d]`.
 *
 * # Safety
 * As for [`unilrt_split_log_statistic`].
 */
UnilrtStatus unilrt_crossfit_log_statistic(const UnilrtSplits *splits,
                                           size_t index,
                                           const double *theta,
                                           size_t d,
                                           double *out);

/**
 * Log subsampling statistic over all splits at `theta[0..d]`.
 *
 * # Safety
 * `splits` must be a live handle; `theta` must point to `d` doubles;
 * `out` must be valid.
 */
UnilrtStatus unilrt_subsampling_log_statistic(const UnilrtSplits *splits,
                                              const double *theta,
                                              size_t d,
                                              double *out);

/**
 * Split set of split `index`: writes its center (`len` = d) and squared radius.
 *
 * # Safety
 * `splits` must be a live handle; `center` must point to `len` writable
 * doubles; `sq_radius` must be valid.
 */
UnilrtStatus unilrt_split_region(const UnilrtSplits *splits,
                                 size_t index,
                                 double alpha,
                                 double *center,
                                 size_t len,
                                 double *sq_radius);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNILRT_H */
