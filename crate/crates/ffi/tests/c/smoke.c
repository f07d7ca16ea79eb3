#include <math.h>
#include <stdio.h>
#include "unilrt.h"

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  double q = 0.0;
  CHECK(unilrt_chi2_upper_quantile(0.1, 1, &q) == UNILRT_STATUS_OK);
  CHECK(fabs(q - 2.705543454) < 1e-6);

  CHECK(unilrt_chi2_upper_quantile(1.5, 1, &q) == UNILRT_STATUS_DOMAIN);
  CHECK(unilrt_last_error_message() != NULL);

  double theta[2] = {0.0, 0.0};
  UnilrtSample *sample = NULL;
  CHECK(unilrt_sample_gaussian(200, theta, 2, 7, &sample) == UNILRT_STATUS_OK);
  CHECK(unilrt_sample_n(sample) == 200 && unilrt_sample_d(sample) == 2);

  double center[2], r2;
  CHECK(unilrt_classical_region(sample, 0.1, center, 2, &r2) == UNILRT_STATUS_OK);
  CHECK(fabs(r2 - 4.605170186 / 200.0) < 1e-8);

  UnilrtSplits *splits = NULL;
  CHECK(unilrt_splits_new(sample, 10, 0.5, 3, &splits) == UNILRT_STATUS_OK);
  CHECK(unilrt_splits_len(splits) == 10);
  double log_t;
  CHECK(unilrt_subsampling_log_statistic(splits, theta, 2, &log_t) == UNILRT_STATUS_OK);
  CHECK(isfinite(log_t));
  CHECK(unilrt_split_log_statistic(splits, 10, theta, 2, &log_t) == UNILRT_STATUS_DOMAIN);

  unilrt_splits_free(splits);
  unilrt_sample_free(sample);
  unilrt_sample_free(NULL);
  puts("ok");
  return 0;
}
