#ifndef LIENS_H
#define LIENS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every fallible call.
 */
typedef enum LiensStatus {
  LIENS_STATUS_OK = 0,
  LIENS_STATUS_NULL_POINTER = 1,
  LIENS_STATUS_INVALID_ARGUMENT = 2,
  LIENS_STATUS_INVALID_GRID = 3,
  LIENS_STATUS_GRID_MISMATCH = 4,
  LIENS_STATUS_NOT_SOLENOIDAL = 5,
  LIENS_STATUS_NOT_HERMITIAN = 6,
  LIENS_STATUS_STEP_FAILED = 7,
  LIENS_STATUS_UNSTABLE_STEP = 8,
  LIENS_STATUS_FORMAT = 9,
  LIENS_STATUS_PARSE = 10,
  LIENS_STATUS_IO = 11,
  LIENS_STATUS_BUFFER_TOO_SMALL = 12,
  LIENS_STATUS_PANIC = 13,
} LiensStatus;

/**
 * A differential polynomial in `u_0, u_1, ...` with rational coefficients.
 */
typedef struct LiensDiffPoly LiensDiffPoly;

/**
 * A velocity field in Fourier space.
 */
typedef struct LiensField LiensField;

/**
 * Summary of a series propagation.
 */
typedef struct LiensPropagateStats {
  size_t steps;
  size_t max_order;
  double min_dt;
} LiensPropagateStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call into this library.
 */
const char *liens_last_error(void);

/**
 * Taylor-Green vortex `U (cos x sin y, -sin x cos y)` on an `n x n` grid.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum LiensStatus liens_field_taylor_green_2d(size_t n, double amplitude, struct LiensField **out);

/**
 * ABC flow with coefficients `a`, `b`, `c` on an `n^3` grid.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum LiensStatus liens_field_abc(size_t n, double a, double b, double c, struct LiensField **out);

/**
 * Seeded random solenoidal, dealiased field with spectrum peaked at `peak_k`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum LiensStatus liens_field_random(size_t dim,
                                    size_t n,
                                    uint64_t seed,
                                    size_t peak_k,
                                    double amplitude,
                                    struct LiensField **out);

/**
 * Builds a field from `dim * n^dim` real samples, component-major with x
 * varying fastest.
 *
 * # Safety
 * `samples` must point to `len` readable doubles and `out` must be valid
 * for a pointer write.
 */
enum LiensStatus liens_field_from_physical(size_t dim,
                                           size_t n,
                                           const double *samples,
                                           size_t len,
                                           struct LiensField **out);

/**
 * Reads a snapshot file (physical or spectral payload).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for a pointer write.
 */
enum LiensStatus liens_field_load(const char *path, struct LiensField **out);

/**
 * Writes `field` as a physical-space snapshot.
 *
 * # Safety
 * `field` must be a live handle and `path` a NUL-terminated string.
 */
enum LiensStatus liens_field_save(const struct LiensField *field, const char *path);

/**
 * Releases a field. Null is ignored.
 *
 * # Safety
 * `field` must be null or a handle not yet freed.
 */
void liens_field_free(struct LiensField *field);

/**
 * Spatial dimension, or 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t liens_field_dim(const struct LiensField *field);

/**
 * Points per side, or 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t liens_field_n(const struct LiensField *field);

/**
 * `½ ∫ |v|² dx`.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for a write.
 */
enum LiensStatus liens_field_energy(const struct LiensField *field, double *out);

/**
 * `Σ_ij ∫ (∂_j v_i)² dx`.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for a write.
 */
enum LiensStatus liens_field_enstrophy(const struct LiensField *field, double *out);

/**
 * Largest `|div v|` over the grid.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for a write.
 */
enum LiensStatus liens_field_div_max(const struct LiensField *field, double *out);

/**
 * Copies the real samples of all components into `buf`, in the layout
 * accepted by [`liens_field_from_physical`]. `len` must be at least
 * `dim * n^dim`.
 *
 * # Safety
 * `field` must be a live handle and `buf` writable for `len` doubles.
 */
enum LiensStatus liens_field_copy_physical(const struct LiensField *field, double *buf, size_t len);

/**
 * Advances `field` to `t_end` with the adaptive series propagator.
 * `max_order` of 0 selects the default. `stats` may be null.
 *
 * # Safety
 * `field` must be a live handle, `out` valid for a pointer write and
 * `stats` null or valid for a write.
 */
enum LiensStatus liens_propagate(const struct LiensField *field,
                                 double nu,
                                 double t_end,
                                 double tol,
                                 size_t max_order,
                                 struct LiensField **out,
                                 struct LiensPropagateStats *stats);

/**
 * Advances `field` to `t_end` with fixed-step RK4.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for a pointer write.
 */
enum LiensStatus liens_rk4(const struct LiensField *field,
                           double nu,
                           double t_end,
                           double dt,
                           struct LiensField **out);

/**
 * Parses text such as `1/10*u_2 - u_0*u_1`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` valid for a pointer write.
 */
enum LiensStatus liens_diffpoly_parse(const char *text, struct LiensDiffPoly **out);

/**
 * `A_F^n u` for the generator of `u_t = F`.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for a pointer write.
 */
enum LiensStatus liens_diffpoly_a_power_u(const struct LiensDiffPoly *f,
                                          int64_t n,
                                          struct LiensDiffPoly **out);

/**
 * Canonical text of `p`, or null on a null handle. Release it with
 * [`liens_string_free`].
 *
 * # Safety
 * `p` must be null or a live handle.
 */
char *liens_diffpoly_to_string(const struct LiensDiffPoly *p);

/**
 * Releases a polynomial. Null is ignored.
 *
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void liens_diffpoly_free(struct LiensDiffPoly *p);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void liens_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIENS_H */
