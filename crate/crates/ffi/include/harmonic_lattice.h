#ifndef HARMONIC_LATTICE_H
#define HARMONIC_LATTICE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_ARGUMENT = 2,
  HL_STATUS_SHAPE_MISMATCH = 3,
  HL_STATUS_OUT_OF_DOMAIN = 4,
  HL_STATUS_INCOMPATIBLE = 5,
  HL_STATUS_NO_CONVERGENCE = 6,
  HL_STATUS_RESIDUAL = 7,
  HL_STATUS_PANIC = 8,
  HL_STATUS_OTHER = 9,
} HlStatus;

/**
 * Opaque harmonic function on a box.
 */
typedef struct HlBoxFunction HlBoxFunction;

/**
 * Gradient norms on the tangential, normal and full edge sets. Undefined ratios are NaN.
 */
typedef struct HlGradientReport {
  double tan_norm;
  double nor_norm;
  double full_norm;
  double nor_over_tan;
  double tan_over_nor;
} HlGradientReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Number of boundary vertices of `{0,…,N}^d`, the length of Dirichlet data.
 *
 * # Safety
 * `out` must be a valid pointer to a `size_t`.
 */
enum HlStatus hl_boundary_vertex_count(size_t d, size_t n, size_t *out);

/**
 * Number of inward normal edges, the length of Neumann data.
 *
 * # Safety
 * `out` must be a valid pointer to a `size_t`.
 */
enum HlStatus hl_normal_edge_count(size_t d, size_t n, size_t *out);

/**
 * Harmonic extension of boundary values.
 *
 * # Safety
 * `values` must point to `len` doubles and `out` to writable handle storage.
 */
enum HlStatus hl_dirichlet_extension(size_t d,
                                     size_t n,
                                     const double *values,
                                     size_t len,
                                     struct HlBoxFunction **out);

/**
 * Harmonic function with the given inward normal differences; the data must sum to zero.
 *
 * # Safety
 * `values` must point to `len` doubles and `out` to writable handle storage.
 */
enum HlStatus hl_neumann_extension(size_t d,
                                   size_t n,
                                   const double *values,
                                   size_t len,
                                   struct HlBoxFunction **out);

/**
 * Number of vertices, `(N+1)^d`; 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t hl_box_function_len(const struct HlBoxFunction *f);

/**
 * Copies all values, row-major, into `out[0..len]`; `len` must equal the vertex count.
 *
 * # Safety
 * `f` must be a live handle and `out` must point to `len` writable doubles.
 */
enum HlStatus hl_box_function_values(const struct HlBoxFunction *f, double *out, size_t len);

/**
 * Value at the vertex `x[0..d]`.
 *
 * # Safety
 * `f` must be a live handle, `x` must point to `d` integers and `out` to a double.
 */
enum HlStatus hl_box_function_value_at(const struct HlBoxFunction *f,
                                       const int64_t *x,
                                       size_t d,
                                       double *out);

/**
 * Gradient norms for exponent `p ≥ 1` (pass `INFINITY` for the max norm).
 *
 * # Safety
 * `f` must be a live handle and `out` a valid pointer.
 */
enum HlStatus hl_gradient_comparison(const struct HlBoxFunction *f,
                                     double p,
                                     struct HlGradientReport *out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void hl_box_function_free(struct HlBoxFunction *f);

/**
 * Periodized exit distribution from height `z`, written row-major into `out[0..len]`,
 * `len = (2L)^{d−1}`, with coordinate `x` stored at index `x mod 2L`.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum HlStatus hl_periodized_poisson_kernel(size_t z, size_t d, size_t l, double *out, size_t len);

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *hl_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *hl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARMONIC_LATTICE_H */
