#ifndef RANKIN_LAB_H
#define RANKIN_LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * L-function selector for [`rl_instance_new`].
 */
typedef enum RlSource {
  RL_SOURCE_ZETA = 0,
  RL_SOURCE_STANDARD = 1,
  RL_SOURCE_RANKIN = 2,
  RL_SOURCE_SYM2 = 3,
} RlSource;

/**
 * Result code of every fallible call.
 */
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_INSUFFICIENT_PRECISION = 3,
  RL_STATUS_RANGE = 4,
  RL_STATUS_DOMAIN = 5,
  RL_STATUS_DELIGNE_VIOLATION = 6,
  RL_STATUS_REPEATED_ROOTS = 7,
  RL_STATUS_UNSUPPORTED = 8,
  RL_STATUS_UNVALIDATED = 9,
  RL_STATUS_MEMORY_BUDGET = 10,
  RL_STATUS_NUMERICAL = 11,
  RL_STATUS_CACHE = 12,
  RL_STATUS_IO = 13,
  RL_STATUS_PANIC = 14,
} RlStatus;

/**
 * The Hecke eigenbasis of one weight.
 */
typedef struct RlEigenforms RlEigenforms;

/**
 * A completed L-function whose functional equation has been checked.
 */
typedef struct RlInstance RlInstance;

/**
 * Outcome of [`rl_count_zeros`].
 */
typedef struct RlZeroCount {
  uint64_t count;
  /**
   * Winding number before rounding.
   */
  double raw;
  double contour_residual;
  /**
   * 1 when the count passed the integrality and stability checks.
   */
  int32_t accepted;
} RlZeroCount;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *rl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rl_version(void);

/**
 * Computes the eigenbasis of weight `k` with `n` coefficients at `bits` of precision.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by the caller.
 */
enum RlStatus rl_eigenforms_new(uint32_t k,
                                uintptr_t n,
                                uint32_t bits,
                                struct RlEigenforms **out_handle);

/**
 * Releases a handle from [`rl_eigenforms_new`]. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void rl_eigenforms_free(struct RlEigenforms *h);

/**
 * Number of eigenforms (the dimension of the cusp space); 0 for null.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
uintptr_t rl_eigenforms_count(const struct RlEigenforms *h);

/**
 * Weight of the basis; 0 for null.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
uint32_t rl_eigenforms_weight(const struct RlEigenforms *h);

/**
 * Normalized Hecke eigenvalue λ(n) of form `index`, rounded to double.
 *
 * # Safety
 * `h` must be a live handle and `value` a valid pointer.
 */
enum RlStatus rl_eigenforms_lambda(const struct RlEigenforms *h,
                                   uintptr_t index,
                                   uint64_t n,
                                   double *value);

/**
 * Residue term 4(x − 2 + 1/x).
 */
double rl_rn_main(double x);

/**
 * Σ_{n<x²} Λ_{f⊗g}(n) n^{−1/2} log(x²/n) for forms `f` and `g`.
 *
 * # Safety
 * `h` must be a live handle and `value` a valid pointer.
 */
enum RlStatus rl_rn_sum(const struct RlEigenforms *h,
                        uintptr_t f,
                        uintptr_t g,
                        double x,
                        double *value);

/**
 * Smallest prime p with λ_f(p) ≠ λ_g(p), searched below x²; 0 if none is certified.
 *
 * # Safety
 * `h` must be a live handle and `prime` a valid pointer.
 */
enum RlStatus rl_distinguish(const struct RlEigenforms *h,
                             uintptr_t f,
                             uintptr_t g,
                             double x,
                             uint64_t *prime);

/**
 * Builds and validates a completed L-function usable up to height `t_max`.
 *
 * `forms` may be null only for [`RlSource::Zeta`]; `g` is read only for
 * [`RlSource::Rankin`]. `bits` sets the precision of the ζ source; other
 * sources inherit the precision of their forms.
 *
 * # Safety
 * `forms` must be null or a live handle; `out_handle` must be a valid pointer.
 */
enum RlStatus rl_instance_new(enum RlSource source,
                              const struct RlEigenforms *forms,
                              uintptr_t f,
                              uintptr_t g,
                              double t_max,
                              uint32_t bits,
                              struct RlInstance **out_handle);

/**
 * Releases a handle from [`rl_instance_new`]. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void rl_instance_free(struct RlInstance *h);

/**
 * Root number found by validation.
 *
 * # Safety
 * `h` must be a live handle and `value` a valid pointer.
 */
enum RlStatus rl_instance_root_number(const struct RlInstance *h, double *value);

/**
 * L(σ + it) as a pair of doubles.
 *
 * # Safety
 * `h` must be a live handle; `re` and `im` must be valid pointers.
 */
enum RlStatus rl_instance_value(const struct RlInstance *h,
                                double sigma,
                                double t,
                                double *re,
                                double *im);

/**
 * Zeros β + iγ with β ≥ `alpha` and 0 ≤ γ ≤ `t`, by the argument principle.
 *
 * # Safety
 * `h` must be a live handle and `result` a valid pointer.
 */
enum RlStatus rl_count_zeros(const struct RlInstance *h,
                             double alpha,
                             double t,
                             struct RlZeroCount *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKIN_LAB_H */
