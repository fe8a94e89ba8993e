#ifndef CHAINSYNTH_H
#define CHAINSYNTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ChainsynthStatus {
  CHAINSYNTH_STATUS_OK = 0,
  CHAINSYNTH_STATUS_NULL_POINTER = 1,
  CHAINSYNTH_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Parameters violate an admissibility condition.
   */
  CHAINSYNTH_STATUS_VALIDATION_FAILED = 3,
  /**
   * Root solve or integration failed.
   */
  CHAINSYNTH_STATUS_RUNTIME_FAILURE = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  CHAINSYNTH_STATUS_PANIC = 5,
} ChainsynthStatus;

/**
 * Opaque controller handle.
 */
typedef struct ChainsynthController ChainsynthController;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next chainsynth call on this thread.
 */
const char *chainsynth_last_error(void);

/**
 * Builds a controller. `d` is required; `a_n`, `c_scale` and `a0` may be
 * null to take their defaults. Numbers are `p/q` or decimal strings.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum ChainsynthStatus chainsynth_synthesize(size_t n,
                                            const char *d,
                                            const char *a_n,
                                            const char *c_scale,
                                            const char *a0,
                                            struct ChainsynthController **out);

/**
 * Parses a spec document as written by `chainsynth synthesize --out`.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum ChainsynthStatus chainsynth_controller_from_json(const char *json,
                                                      struct ChainsynthController **out);

/**
 * Serialises the controller; free the result with `chainsynth_string_free`.
 *
 * # Safety
 * `controller` must come from this library; `out` must be writable.
 */
enum ChainsynthStatus chainsynth_controller_to_json(const struct ChainsynthController *controller,
                                                    char **out);

/**
 * # Safety
 * `controller` must be null or a handle from this library not yet freed.
 */
void chainsynth_controller_free(struct ChainsynthController *controller);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void chainsynth_string_free(char *s);

/**
 * State dimension, or 0 for a null handle.
 *
 * # Safety
 * `controller` must be null or a live handle.
 */
size_t chainsynth_controller_dimension(const struct ChainsynthController *controller);

/**
 * `Theta(x)`.
 *
 * # Safety
 * `x` must point to `len` doubles; `out_theta` must be writable.
 */
enum ChainsynthStatus chainsynth_theta(const struct ChainsynthController *controller,
                                       const double *x,
                                       size_t len,
                                       double *out_theta);

/**
 * Feedback `u(x)`.
 *
 * # Safety
 * `x` must point to `len` doubles; `out_u` must be writable.
 */
enum ChainsynthStatus chainsynth_control(const struct ChainsynthController *controller,
                                         const double *x,
                                         size_t len,
                                         double *out_u);

/**
 * Simulated time to reach the origin from `x`. Non-positive `rtol` or
 * `theta_stop` select the defaults.
 *
 * # Safety
 * `x` must point to `len` doubles; `out_time` must be writable.
 */
enum ChainsynthStatus chainsynth_time_of_motion(const struct ChainsynthController *controller,
                                                const double *x,
                                                size_t len,
                                                double rtol,
                                                double theta_stop,
                                                double *out_time);

/**
 * Exact corner root for dimension `n` as `"p/q"`; free with
 * `chainsynth_string_free`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ChainsynthStatus chainsynth_xi0(size_t n, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINSYNTH_H */
