#ifndef MCMV_H
#define MCMV_H

/* Generated by cbindgen from the mcmv-ffi sources. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by all entry points.
 */
typedef enum McmvStatus {
  MCMV_STATUS_OK = 0,
  /*
   A required pointer was null.
   */
  MCMV_STATUS_NULL_POINTER = 1,
  /*
   Input violates a precondition.
   */
  MCMV_STATUS_VALIDATION = 2,
  /*
   A numerical routine failed.
   */
  MCMV_STATUS_NUMERIC = 3,
  /*
   The caller's buffer is too small; the required length was written.
   */
  MCMV_STATUS_BUFFER_TOO_SMALL = 4,
  /*
   Internal panic caught at the boundary.
   */
  MCMV_STATUS_PANIC = 5,
} McmvStatus;

/*
 Periodic MCMV operator: one block of Verblunsky coefficients, the pole
 vector and the phase.
 */
typedef struct McmvOperator McmvOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates an operator. `coeffs` holds `n_coeffs` = 2n complex values and
 `poles` holds n complex values (first one 0), both as interleaved
 (re, im) pairs. `poles` may be null, meaning all poles are 0.

 # Safety
 The arrays must be readable for the given lengths; `out` must be valid.
 */
enum McmvStatus mcmv_operator_new(const double *coeffs,
                                  size_t n_coeffs,
                                  const double *poles,
                                  size_t n_poles,
                                  double phase,
                                  struct McmvOperator **out);

/*
 Releases an operator. Null is accepted.

 # Safety
 `op` must come from `mcmv_operator_new` and not be used afterwards.
 */
void mcmv_operator_free(struct McmvOperator *op);

/*
 Number n of poles (the period is 2n).

 # Safety
 `op` and `out` must be valid.
 */
enum McmvStatus mcmv_operator_n(const struct McmvOperator *op, size_t *out);

/*
 Discriminant Delta(z).

 # Safety
 `op`, `out_re`, `out_im` must be valid.
 */
enum McmvStatus mcmv_discriminant(const struct McmvOperator *op,
                                  double re,
                                  double im,
                                  double *out_re,
                                  double *out_im);

/*
 Bands of the spectrum as (start angle, arc length) pairs written to
 `out` (capacity `cap` pairs). `count` receives the number of bands;
 when it exceeds `cap` nothing is written and BufferTooSmall is returned.

 # Safety
 `op` and `count` must be valid; `out` must hold `2 * cap` doubles.
 */
enum McmvStatus mcmv_bands(const struct McmvOperator *op,
                           size_t grid,
                           double *out,
                           size_t cap,
                           size_t *count);

/*
 Total mass of the spectral measure (should be 1).

 # Safety
 `op` and `out` must be valid.
 */
enum McmvStatus mcmv_total_mass(const struct McmvOperator *op, size_t grid, double *out);

/*
 Checks Delta(A) = S^{2n} + S^{-2n} on rows [lo, hi). Writes the maximal
 deviation and 1/0 for pass/fail.

 # Safety
 `op`, `max_deviation` and `pass` must be valid.
 */
enum McmvStatus mcmv_magic_check(const struct McmvOperator *op,
                                 int64_t lo,
                                 int64_t hi,
                                 double tol,
                                 double *max_deviation,
                                 int32_t *pass);

/*
 Recovers the first 4n coefficients from the spectral measure and writes
 the largest deviation from the generating ones.

 # Safety
 `op` and `max_error` must be valid.
 */
enum McmvStatus mcmv_roundtrip_error(const struct McmvOperator *op, size_t grid, double *max_error);

/*
 Copies the last error message of this thread into `buf` (NUL
 terminated, truncated to `len`). Returns the full message length, or 0
 when there is no message.

 # Safety
 `buf` must hold `len` bytes or be null.
 */
size_t mcmv_last_error(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *mcmv_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCMV_H */
