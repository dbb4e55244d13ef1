#ifndef RESPETRI_H
#define RESPETRI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RpStatus {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  RP_STATUS_INVALID_UTF8 = 2,
  RP_STATUS_PARSE_ERROR = 3,
  RP_STATUS_INVALID_MODEL = 4,
  RP_STATUS_UNKNOWN_PREDICATE = 5,
  RP_STATUS_SIMULATION_ERROR = 6,
  RP_STATUS_PATCH_ERROR = 7,
  RP_STATUS_PANIC = 99,
} RpStatus;

typedef enum RpVerdict {
  RP_VERDICT_SAFE = 0,
  RP_VERDICT_UNSAFE = 1,
  RP_VERDICT_UNKNOWN = 2,
} RpVerdict;

/**
 * Opaque handle to a parsed, validated model.
 */
typedef struct RpModel RpModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *rp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rp_version(void);

/**
 * Parses model text. On success `*out` receives a handle to free with
 * `rp_model_free`.
 *
 * # Safety
 * `text` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
 */
enum RpStatus rp_model_parse(const char *text, struct RpModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from this library not yet freed.
 */
void rp_model_free(struct RpModel *model);

/**
 * Canonical text of the model.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum RpStatus rp_model_serialize(const struct RpModel *model, char **out);

/**
 * SHA-256 (lowercase hex) of the canonical text.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum RpStatus rp_model_hash(const struct RpModel *model, char **out);

/**
 * Decides the named forbidden predicate with an exploration of at most
 * `max_states` markings (0 selects the default bound).
 *
 * # Safety
 * `model` must be a live handle, `predicate` a NUL-terminated string and
 * `verdict` writable.
 */
enum RpStatus rp_model_check(const struct RpModel *model,
                             const char *predicate,
                             size_t max_states,
                             enum RpVerdict *verdict);

/**
 * Same as `rp_model_check`, returning the full verdict (including any
 * violation trace) as JSON.
 *
 * # Safety
 * As for `rp_model_check`; `out` must be writable.
 */
enum RpStatus rp_model_check_json(const struct RpModel *model,
                                  const char *predicate,
                                  size_t max_states,
                                  char **out);

/**
 * Runs `steps` uniformly random firings from `seed` and returns the run
 * record as JSON.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum RpStatus rp_model_simulate_json(const struct RpModel *model,
                                     size_t steps,
                                     uint64_t seed,
                                     char **out);

/**
 * Applies patch text to `model`, producing a new handle in `*out`. The
 * input handle is left unchanged.
 *
 * # Safety
 * `model` must be a live handle, `patch` a NUL-terminated string and `out` writable.
 */
enum RpStatus rp_model_apply_patch(const struct RpModel *model,
                                   const char *patch,
                                   struct RpModel **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void rp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESPETRI_H */
