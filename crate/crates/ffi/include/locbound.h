#ifndef LOCBOUND_H
#define LOCBOUND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum LbStatus {
  LB_STATUS_OK = 0,
  LB_STATUS_NULL_POINTER = 1,
  LB_STATUS_INVALID_PARAMETER = 2,
  LB_STATUS_DOMAIN = 3,
  LB_STATUS_CONVERGENCE = 4,
  LB_STATUS_NOT_POSITIVE_DEFINITE = 5,
  LB_STATUS_DEGENERATE_GEOMETRY = 6,
  LB_STATUS_SINGULAR_GEOMETRY = 7,
  LB_STATUS_INSUFFICIENT_DATA = 8,
  LB_STATUS_RESOURCE_LIMIT = 9,
  LB_STATUS_PARSE = 10,
  LB_STATUS_CANDIDATE_NOT_FOUND = 11,
  LB_STATUS_PANIC = 12,
} LbStatus;

// Which terms of the information kernel are kept.
typedef enum LbKernel {
  LB_KERNEL_FULL = 0,
  LB_KERNEL_RSS_ONLY = 1,
  LB_KERNEL_TOA_ONLY = 2,
} LbKernel;

// Channel parameters (opaque).
typedef struct LbChannel LbChannel;

// Finite sensor field (opaque).
typedef struct LbField LbField;

// Averaged per-field bound.
typedef struct LbAvgCrb {
  double mean;
  double std_err;
  double median;
  size_t trials;
  size_t excluded;
  // Nonzero when more than 1% of the trials were excluded.
  int32_t exclusion_warning;
  // Nonzero when one trial dominates the mean.
  int32_t heavy_tail;
} LbAvgCrb;

// Density-level bound with its asymptotes. Absent values are NaN.
typedef struct LbBounds {
  double crb_lb;
  double crb_lb_w;
  double crb_lb_n;
  double sandwich_lo;
  int32_t sandwich_vacuous;
  double narrowband_gap;
  double quadrature_error;
} LbBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *lb_version(void);

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated when `len > 0`). Returns the full message length
// without the NUL; 0 when the last call succeeded.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t lb_last_error_message(char *buf, size_t len);

// Creates a channel from the path-loss exponent, propagation speed,
// effective bandwidth (s⁻²) and linear SNR at unit distance.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum LbStatus lb_channel_new(double gamma, double c, double we, double rho, struct LbChannel **out);

// Creates a channel for the raised-cosine pulse of duration `t_dur`
// seconds at an SNR of `snr_db` at unit distance.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum LbStatus lb_channel_for_pulse(double gamma,
                                   double c,
                                   double t_dur,
                                   double snr_db,
                                   struct LbChannel **out);

// Reads back the channel parameters. Any output pointer may be null.
//
// # Safety
// `ch` must be a live handle; non-null outputs must be writable.
enum LbStatus lb_channel_params(const struct LbChannel *ch,
                                double *gamma,
                                double *c,
                                double *we,
                                double *rho);

// Releases a channel; null is ignored.
//
// # Safety
// `ch` must be null or a handle not yet freed.
void lb_channel_free(struct LbChannel *ch);

// Samples a Poisson field of density `lambda` on the disc of `radius`
// around (`cx`, `cy`).
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum LbStatus lb_field_sample(double lambda,
                              double radius,
                              double cx,
                              double cy,
                              uint64_t seed,
                              struct LbField **out);

// Builds a field from `n` explicit points.
//
// # Safety
// `xs` and `ys` must point to `n` readable values (or be null when `n == 0`);
// `out` must be writable.
enum LbStatus lb_field_from_points(const double *xs,
                                   const double *ys,
                                   size_t n,
                                   double lambda,
                                   double radius,
                                   double cx,
                                   double cy,
                                   struct LbField **out);

// Number of sensors in the field, 0 for null.
//
// # Safety
// `field` must be null or a live handle.
size_t lb_field_len(const struct LbField *field);

// Coordinates of sensor `index`.
//
// # Safety
// `field` must be a live handle; `x` and `y` must be writable.
enum LbStatus lb_field_point(const struct LbField *field, size_t index, double *x, double *y);

// Releases a field; null is ignored.
//
// # Safety
// `field` must be null or a handle not yet freed.
void lb_field_free(struct LbField *field);

// Bound on the mean squared error (m²) for a source at (`sx`, `sy`)
// observed by `field`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum LbStatus lb_crb_realization(const struct LbField *field,
                                 const struct LbChannel *ch,
                                 double sx,
                                 double sy,
                                 double *out);

// Per-field bound averaged over `trials` Poisson fields.
//
// # Safety
// `ch` must be live; `out` must be writable.
enum LbStatus lb_avg_crb(double lambda,
                         const struct LbChannel *ch,
                         size_t trials,
                         size_t sensors_per_trial,
                         uint64_t master_seed,
                         struct LbAvgCrb *out);

// Density-level bound for `kernel`. `rel_tol <= 0` selects the default
// tolerance. `abs_error` may be null.
//
// # Safety
// `ch` must be live; `value` must be writable.
enum LbStatus lb_crb_lb(double lambda,
                        const struct LbChannel *ch,
                        enum LbKernel kernel,
                        double rel_tol,
                        double *value,
                        double *abs_error);

// The bound with its wideband and narrowband limits and sandwich
// diagnostics. `rel_tol <= 0` selects the default tolerance.
//
// # Safety
// `ch` must be live; `out` must be writable.
enum LbStatus lb_bounds(double lambda,
                        const struct LbChannel *ch,
                        double rel_tol,
                        struct LbBounds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCBOUND_H */
