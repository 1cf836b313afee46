#ifndef LINFLOW_H
#define LINFLOW_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LinflowStatus {
  LINFLOW_STATUS_OK = 0,
  LINFLOW_STATUS_NULL_ARGUMENT = 1,
  LINFLOW_STATUS_INVALID_INPUT = 2,
  LINFLOW_STATUS_DIMENSION = 3,
  LINFLOW_STATUS_NUMERICAL = 4,
  LINFLOW_STATUS_NOT_EQUIVALENT = 5,
  LINFLOW_STATUS_PANIC = 6,
} LinflowStatus;

typedef enum LinflowLevel {
  LINFLOW_LEVEL_TOPOLOGICAL = 0,
  LINFLOW_LEVEL_SOME_HOLDER = 1,
  LINFLOW_LEVEL_ALL_HOLDER = 2,
  LINFLOW_LEVEL_LIPSCHITZ = 3,
  LINFLOW_LEVEL_SMOOTH = 4,
  /**
   * Uses the `beta` argument of [`linflow_decide`].
   */
  LINFLOW_LEVEL_BETA_MINUS = 5,
  LINFLOW_LEVEL_BETA_PLUS = 6,
} LinflowLevel;

/**
 * Real generator of a linear flow.
 */
typedef struct LinflowGenerator LinflowGenerator;

/**
 * Conjugacy between two flows.
 */
typedef struct LinflowMap LinflowMap;

typedef struct LinflowVerdict {
  bool equivalent;
  bool conclusive;
  bool time_reversed;
  /**
   * `alpha` is meaningful only when this is set.
   */
  bool has_alpha;
  double alpha;
} LinflowVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *linflow_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *linflow_version(void);

/**
 * Create a generator from `d*d` row-major entries.
 *
 * # Safety
 * `entries` must point to `d*d` readable doubles; `out` must be writable.
 */
enum LinflowStatus linflow_generator_new(const double *entries,
                                         size_t d,
                                         struct LinflowGenerator **out);

/**
 * Create the realified generator of a complex `n×n` matrix given as `2*n*n`
 * row-major `(re, im)` pairs.
 *
 * # Safety
 * `entries` must point to `2*n*n` readable doubles; `out` must be writable.
 */
enum LinflowStatus linflow_generator_new_complex(const double *entries,
                                                 size_t n,
                                                 struct LinflowGenerator **out);

/**
 * Real dimension of the state space, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t linflow_generator_dim(const struct LinflowGenerator *g);

/**
 * # Safety
 * `g` must be null or a handle from this library not yet freed.
 */
void linflow_generator_free(struct LinflowGenerator *g);

/**
 * `y = e^{tA} x`, both of length `dim`.
 *
 * # Safety
 * `x` and `y` must each hold `linflow_generator_dim(g)` doubles.
 */
enum LinflowStatus linflow_flow_apply(const struct LinflowGenerator *g,
                                      double t,
                                      const double *x,
                                      double *y);

/**
 * Decide equivalence of the flows of `a` and `b` at `level`. `beta` is read
 * only for the β levels.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum LinflowStatus linflow_decide(const struct LinflowGenerator *a,
                                  const struct LinflowGenerator *b,
                                  enum LinflowLevel lvl,
                                  double beta,
                                  struct LinflowVerdict *out);

/**
 * Lyapunov cross ratio of two hyperbolic flows.
 *
 * # Safety
 * `a`, `b` must be live handles and `rho` writable.
 */
enum LinflowStatus linflow_cross_ratio(const struct LinflowGenerator *a,
                                       const struct LinflowGenerator *b,
                                       double *rho);

/**
 * Minimal period of `x`: 0 at fixed points, `INFINITY` when not periodic.
 *
 * # Safety
 * `x` must hold `linflow_generator_dim(g)` doubles; `period` writable.
 */
enum LinflowStatus linflow_minimal_period(const struct LinflowGenerator *g,
                                          const double *x,
                                          double *period);

/**
 * Build a conjugacy from the flow of `a` to the flow of `b` at the finest
 * level at which they are equivalent. Returns `NotEquivalent` when they are
 * not even topologically equivalent; `alpha` (nullable) receives the time
 * rescaling.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` writable; `alpha` null or writable.
 */
enum LinflowStatus linflow_conjugacy_build(const struct LinflowGenerator *a,
                                           const struct LinflowGenerator *b,
                                           struct LinflowMap **out,
                                           double *alpha);

/**
 * `y = h(x)`, or `h⁻¹(x)` when `inverse` is set.
 *
 * # Safety
 * `x` and `y` must each hold as many doubles as the map's dimension.
 */
enum LinflowStatus linflow_map_apply(const struct LinflowMap *h,
                                     bool inverse,
                                     const double *x,
                                     double *y);

/**
 * State dimension of the map, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t linflow_map_dim(const struct LinflowMap *h);

/**
 * JSON document of the map; release with [`linflow_string_free`].
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum LinflowStatus linflow_map_to_json(const struct LinflowMap *h, char **out);

/**
 * # Safety
 * `h` must be null or a handle from this library not yet freed.
 */
void linflow_map_free(struct LinflowMap *h);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void linflow_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINFLOW_H */
