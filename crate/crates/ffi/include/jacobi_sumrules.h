#ifndef JACOBI_SUMRULES_H
#define JACOBI_SUMRULES_H

#include <stddef.h>
#include <stdint.h>

// Result codes of every exported function.
typedef enum JsrStatus {
  JSR_STATUS_OK = 0,
  JSR_STATUS_NULL_POINTER = 1,
  JSR_STATUS_INVALID_ARGUMENT = 2,
  JSR_STATUS_INVALID_COEFFICIENTS = 3,
  JSR_STATUS_NOT_CONVERGED = 4,
  JSR_STATUS_QUADRATURE_FAILURE = 5,
  JSR_STATUS_DIVERGENCE = 6,
  JSR_STATUS_POLE_HIT = 7,
  JSR_STATUS_RANK_TOO_LARGE = 8,
  JSR_STATUS_DOMAIN = 9,
  JSR_STATUS_JSON = 10,
  JSR_STATUS_IO = 11,
  JSR_STATUS_BUFFER_TOO_SMALL = 12,
  JSR_STATUS_PANIC = 13,
} JsrStatus;

// Opaque handle to a Jacobi matrix.
typedef struct JsrMatrix JsrMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next failing call on the same thread.
const char *jsr_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *jsr_version(void);

// Eventually free matrix from a_1..a_na and b_1..b_nb; missing entries
// are free (a = 1, b = 0).
//
// # Safety
// `a` and `b` must point to `na` and `nb` readable doubles (or be null
// when the length is 0); `out` must be writable.
enum JsrStatus jsr_matrix_from_lists(const double *a,
                                     size_t na,
                                     const double *b,
                                     size_t nb,
                                     struct JsrMatrix **out);

// Matrix from a JSON family configuration (explicit lists or a generated
// family with a cutoff).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum JsrStatus jsr_matrix_from_json(const char *json, struct JsrMatrix **out);

// Releases a handle; null is ignored.
//
// # Safety
// `m` must come from this library and not be used afterwards.
void jsr_matrix_free(struct JsrMatrix *m);

// Number of stored coefficients past which the matrix is free.
//
// # Safety
// `m` must be a live handle and `out` writable.
enum JsrStatus jsr_matrix_rank(const struct JsrMatrix *m, size_t *out);

// Weighted boundary log-integral (1/2π)∫₀^π ln[sin θ / Im M(e^{iθ})] w(θ) dθ.
// `weight` is one of "unit", "1+cos", "1-cos", "sinsq", "cosmix:p", or
// null for unit; `value` and `error` receive the integral and its
// quadrature error estimate (`error` may be null).
//
// # Safety
// `m` must be a live handle, `weight` null or NUL-terminated, `value`
// writable and `error` null or writable.
enum JsrStatus jsr_szego_integral(const struct JsrMatrix *m,
                                  const char *weight,
                                  double quad_tol,
                                  double *value,
                                  double *error);

// Eigenvalues outside [−2, 2] (those above 2 in descending order, then
// those below −2 in ascending order) with their spectral weights.
// `count` always receives the number of eigenvalues; when it exceeds
// `capacity` nothing is written to the arrays and
// `JSR_STATUS_BUFFER_TOO_SMALL` is returned.
//
// # Safety
// `m` must be a live handle; `energies` and `weights` must have room for
// `capacity` doubles (or be null when `capacity` is 0); `count` writable.
enum JsrStatus jsr_eigs_outside(const struct JsrMatrix *m,
                                double tol,
                                double *energies,
                                double *weights,
                                size_t capacity,
                                size_t *count);

// Residual lhs − rhs of one identity, e.g. "c0", "p2", "case:2",
// "step:3", "onesided+:1", "quasi:2", "z1plus", "consistency:2".
//
// # Safety
// `m` must be a live handle, `rule` NUL-terminated and `residual` writable.
enum JsrStatus jsr_rule_residual(const struct JsrMatrix *m,
                                 const char *rule,
                                 double quad_tol,
                                 double *residual);

// Full report as a JSON string. `rules` is a comma-separated list or
// "all"; null means "c0,p2". Release the result with [`jsr_string_free`].
//
// # Safety
// `m` must be a live handle, `rules` null or NUL-terminated and `out`
// writable.
enum JsrStatus jsr_report_json(const struct JsrMatrix *m,
                               const char *rules,
                               double quad_tol,
                               char **out);

// Releases a string returned by this library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void jsr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JACOBI_SUMRULES_H */
