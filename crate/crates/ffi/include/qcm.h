/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef QCM_H
#define QCM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcmStatus {
  QCM_STATUS_OK = 0,
  QCM_STATUS_NULL_POINTER = 1,
  QCM_STATUS_INVALID_ARGUMENT = 2,
  QCM_STATUS_UNKNOWN_ENSEMBLE = 3,
  QCM_STATUS_CONSUMED_ENSEMBLE = 4,
  QCM_STATUS_DENOMINATOR_NEAR_ZERO = 5,
  QCM_STATUS_DIVISOR_NEAR_ZERO = 6,
  QCM_STATUS_PARSE_ERROR = 7,
  QCM_STATUS_NON_FINITE = 8,
  QCM_STATUS_OUT_OF_RANGE = 9,
  QCM_STATUS_STATISTICS = 10,
  QCM_STATUS_INTERNAL = 99,
} QcmStatus;

// Opaque store handle.
typedef struct QcmStore QcmStore;

// A real number `r2(num) / r2(den)` held in a store, as four ensemble ids.
typedef struct QcmReal4 {
  uint64_t num_plus;
  uint64_t num_minus;
  uint64_t den_plus;
  uint64_t den_minus;
} QcmReal4;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *qcm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qcm_version(void);

// New store with the default denominator floor. Never null.
struct QcmStore *qcm_store_new(void);

// New store that refuses to decode denominators below `den_floor`.
//
// # Safety
// `out` must be valid for writes.
enum QcmStatus qcm_store_with_den_floor(double den_floor, struct QcmStore **out);

// # Safety
// `store` must be null or a handle from this library that is not used again.
void qcm_store_free(struct QcmStore *store);

// Encodes `value` into four fresh ensembles.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_encode(struct QcmStore *store, double value, struct QcmReal4 *out);

// Decodes `x` without consuming it.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_decode(const struct QcmStore *store, struct QcmReal4 x, double *out);

// `x + y`; consumes both operands.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_add(struct QcmStore *store,
                       struct QcmReal4 x,
                       struct QcmReal4 y,
                       struct QcmReal4 *out);

// `x − y`; consumes both operands.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_sub(struct QcmStore *store,
                       struct QcmReal4 x,
                       struct QcmReal4 y,
                       struct QcmReal4 *out);

// `x · y`; consumes both operands.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_mul(struct QcmStore *store,
                       struct QcmReal4 x,
                       struct QcmReal4 y,
                       struct QcmReal4 *out);

// `x / y`; consumes both operands.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_div(struct QcmStore *store,
                       struct QcmReal4 x,
                       struct QcmReal4 y,
                       struct QcmReal4 *out);

// `−x`. Swaps handles only; no gates are applied.
struct QcmReal4 qcm_neg(struct QcmReal4 x);

// `1/x`. Swaps handles only; fails when the numerator is below the floor.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_inv(const struct QcmStore *store, struct QcmReal4 x, struct QcmReal4 *out);

// `xⁿ`; consumes `x`. With `renorm`, intermediate products are re-encoded.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_pow(struct QcmStore *store,
                       struct QcmReal4 x,
                       uint64_t n,
                       bool renorm,
                       struct QcmReal4 *out);

// Re-encodes `x` at full component magnitude; consumes `x`.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_renormalize(struct QcmStore *store, struct QcmReal4 x, struct QcmReal4 *out);

// Copies `x` into four new ensembles; `x` stays usable.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_clone(struct QcmStore *store, struct QcmReal4 x, struct QcmReal4 *out);

// Number of recorded events; only physical ones when `physical_only`.
//
// # Safety
// `store` must be a live handle and `out` valid for writes.
enum QcmStatus qcm_gate_count(const struct QcmStore *store, bool physical_only, size_t *out);

// The store's event trace as JSON lines.
//
// # Safety
// `store` must be a live handle and `out` valid for writes. Free the
// result with [`qcm_string_free`].
enum QcmStatus qcm_trace_jsonl(const struct QcmStore *store, char **out);

// Parses and evaluates `expression` on a fresh store, writing the report as
// one JSON object. `shots == 0` selects exact readout; otherwise each
// result ensemble is sampled `shots` times with `seed`.
//
// # Safety
// `expression` must be a NUL-terminated string and `out` valid for writes.
// Free the result with [`qcm_string_free`].
enum QcmStatus qcm_eval_json(const char *expression,
                             bool renorm,
                             uint64_t shots,
                             uint64_t seed,
                             char **out);

// # Safety
// `s` must be null or a string returned by this library, not freed before.
void qcm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCM_H */
