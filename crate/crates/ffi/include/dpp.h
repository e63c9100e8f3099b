#ifndef DPP_H
#define DPP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DppStatus {
  DPP_STATUS_OK = 0,
  /**
   * A required pointer was null or a length did not match.
   */
  DPP_STATUS_NULL_OR_LENGTH = 1,
  /**
   * Malformed input: wrong dimension, asymmetric matrix, nonpositive minor and so on.
   */
  DPP_STATUS_INVALID_INPUT = 2,
  /**
   * A numerical method failed to converge or a run stopped short.
   */
  DPP_STATUS_NUMERICAL = 3,
  /**
   * Points could not be certified distinct.
   */
  DPP_STATUS_INCONCLUSIVE = 4,
  /**
   * The request needs an ML degree that is not known.
   */
  DPP_STATUS_UNSUPPORTED = 5,
  DPP_STATUS_PANIC = 6,
} DppStatus;

/**
 * Result of [`dpp_solve`].
 */
typedef struct DppCensus DppCensus;

/**
 * Data vector of subset counts.
 */
typedef struct DppData DppData;

/**
 * Symmetric complex matrix.
 */
typedef struct DppMatrix DppMatrix;

/**
 * Classification of one census point.
 */
typedef struct DppPointFlags {
  bool is_real;
  bool is_positive_definite;
  bool is_local_max;
  bool is_global_max;
  bool has_value;
  /**
   * Log-likelihood; meaningful only when `has_value`.
   */
  double value;
  double residual;
  size_t orbit_size;
} DppPointFlags;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next `dpp_*` call on the same thread.
 */
const char *dpp_last_error(void);

/**
 * Builds a real symmetric `n x n` matrix from `n * n` row-major entries.
 *
 * # Safety
 * `entries` must point to `n * n` doubles and `out` must be writable.
 */
enum DppStatus dpp_matrix_new_real(size_t n, const double *entries, struct DppMatrix **out);

/**
 * Dimension of a matrix, 0 for null.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t dpp_matrix_dim(const struct DppMatrix *m);

/**
 * Entry `(i, j)` (0-based) as real and imaginary parts.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` must be writable.
 */
enum DppStatus dpp_matrix_get(const struct DppMatrix *m,
                              size_t i,
                              size_t j,
                              double *re,
                              double *im);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void dpp_matrix_free(struct DppMatrix *m);

/**
 * Builds a data vector on `n` elements from `2^n` real counts in graded order.
 *
 * # Safety
 * `graded` must point to `2^n` doubles and `out` must be writable.
 */
enum DppStatus dpp_data_new_real(size_t n, const double *graded, struct DppData **out);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void dpp_data_free(struct DppData *d);

/**
 * All `2^n` principal minors in graded order. `len` must equal `2^n`.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` must each hold `len` doubles.
 */
enum DppStatus dpp_principal_minors(const struct DppMatrix *m, double *re, double *im, size_t len);

/**
 * `det(Θ + Id)`.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` must be writable.
 */
enum DppStatus dpp_partition_function(const struct DppMatrix *m, double *re, double *im);

/**
 * Log-likelihood of a real matrix whose minors carrying data are positive.
 *
 * # Safety
 * `m` and `d` must be live handles; `out` must be writable.
 */
enum DppStatus dpp_loglike(const struct DppMatrix *m, const struct DppData *d, double *out);

/**
 * `max |∂L/∂θ_ij| / Σ |u_I|`; zero exactly at critical points.
 *
 * # Safety
 * `m` and `d` must be live handles; `out` must be writable.
 */
enum DppStatus dpp_gradient_residual(const struct DppMatrix *m,
                                     const struct DppData *d,
                                     double *out);

/**
 * Number of complex critical matrices for generic data on `n` elements.
 * Returns `Unsupported` when an ML degree for some block size is unknown.
 *
 * # Safety
 * `out` must be writable.
 */
enum DppStatus dpp_count_critical_points(size_t n, uint64_t *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum DppStatus dpp_bell_number(size_t n, uint64_t *out);

/**
 * Cayley hyperdeterminant of a real 2x2x2 tensor given as 8 entries in graded order.
 *
 * # Safety
 * `graded` must point to 8 doubles; `out` must be writable.
 */
enum DppStatus dpp_hyperdet(const double *graded, double *out);

/**
 * Solves the likelihood equations. `all_components` selects every set
 * partition instead of the main component only. A census is produced even
 * when the run stops short; check [`dpp_census_complete`].
 *
 * # Safety
 * `d` must be a live handle and `out` must be writable.
 */
enum DppStatus dpp_solve(const struct DppData *d,
                         bool all_components,
                         uint64_t seed,
                         struct DppCensus **out);

/**
 * Number of points in a census, 0 for null.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
size_t dpp_census_len(const struct DppCensus *c);

/**
 * Whether every solver run reached its expected solution count.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
bool dpp_census_complete(const struct DppCensus *c);

/**
 * Copies point `k` into a new matrix handle owned by the caller.
 *
 * # Safety
 * `c` must be a live handle and `out` must be writable.
 */
enum DppStatus dpp_census_point(const struct DppCensus *c, size_t k, struct DppMatrix **out);

/**
 * # Safety
 * `c` must be a live handle and `out` must be writable.
 */
enum DppStatus dpp_census_flags(const struct DppCensus *c, size_t k, struct DppPointFlags *out);

/**
 * The census as a JSON document, in the same format as the command-line tool.
 * Release with [`dpp_string_free`]. Returns null on failure.
 *
 * # Safety
 * `c` must be a live handle.
 */
char *dpp_census_to_json(const struct DppCensus *c);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void dpp_string_free(char *s);

/**
 * # Safety
 * `c` must be null or a handle not yet freed.
 */
void dpp_census_free(struct DppCensus *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPP_H */
