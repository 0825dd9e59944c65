#ifndef FSILAB_H
#define FSILAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every function.
 */
typedef enum FsilabStatus {
  FSILAB_STATUS_OK = 0,
  FSILAB_STATUS_NULL_POINTER = 1,
  FSILAB_STATUS_INVALID_ARGUMENT = 2,
  FSILAB_STATUS_CONFIG = 3,
  FSILAB_STATUS_NUMERICAL = 4,
  FSILAB_STATUS_IO = 5,
  FSILAB_STATUS_PANIC = 6,
} FsilabStatus;

/**
 * Opaque assembled problem.
 */
typedef struct FsilabLab FsilabLab;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *fsilab_last_error_message(void);

/**
 * Builds a problem on `[0, lx] x [-ly, 0]` with `nx x ny` interior nodes.
 * `preset` is one of "zero", "uniform-shear", "solenoidal", "compressive".
 *
 * # Safety
 * `preset` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FsilabStatus fsilab_lab_new(size_t nx,
                                 size_t ny,
                                 double lx,
                                 double ly,
                                 const char *preset,
                                 double amplitude,
                                 double c1,
                                 double c2,
                                 struct FsilabLab **out);

/**
 * Builds a problem from a TOML run configuration.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FsilabStatus fsilab_lab_from_config(const char *path, struct FsilabLab **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `lab` must come from this library and not be used afterwards.
 */
void fsilab_lab_free(struct FsilabLab *lab);

/**
 * Length of the packed state vector `(p, u1, u2, w1, w2)`.
 *
 * # Safety
 * `lab` must be a live handle and `out` a valid pointer.
 */
enum FsilabStatus fsilab_state_dim(const struct FsilabLab *lab, size_t *out);

/**
 * Ambient-flow scalars: `r_U`, `xi` and `alpha`.
 *
 * # Safety
 * `lab` must be a live handle; output pointers may be null.
 */
enum FsilabStatus fsilab_metric_constants(const struct FsilabLab *lab,
                                          double *r_u,
                                          double *xi,
                                          double *alpha);

/**
 * `y = G x`.
 *
 * # Safety
 * `x` and `y` must each hold `n` doubles.
 */
enum FsilabStatus fsilab_apply_generator(const struct FsilabLab *lab,
                                         const double *x,
                                         double *y,
                                         size_t n);

/**
 * Weighted inner product of two states.
 *
 * # Safety
 * `a` and `b` must each hold `n` doubles; `out` must be valid.
 */
enum FsilabStatus fsilab_weighted_inner(const struct FsilabLab *lab,
                                        const double *a,
                                        const double *b,
                                        size_t n,
                                        double *out);

/**
 * Smoothed random state in the zero-mean subspace, reproducible from `seed`.
 *
 * # Safety
 * `out` must hold `n` doubles.
 */
enum FsilabStatus fsilab_random_state(const struct FsilabLab *lab,
                                      uint64_t seed,
                                      double *out,
                                      size_t n);

/**
 * Solves `((a + ib) I - G) phi = rhs` for a zero-mean `rhs` and reports
 * `sqrt(a) |||phi|||` and the relative residual.
 *
 * # Safety
 * `rhs` must hold `n` doubles; output pointers may be null.
 */
enum FsilabStatus fsilab_resolvent_criterion(const struct FsilabLab *lab,
                                             double a,
                                             double b,
                                             const double *rhs,
                                             size_t n,
                                             double *criterion,
                                             double *residual);

/**
 * The metric scalar `xi(C1, C2, r)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum FsilabStatus fsilab_xi(double c1, double c2, double r, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSILAB_H */
