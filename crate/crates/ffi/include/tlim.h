#ifndef TLIM_H
#define TLIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TlimStatus {
  TLIM_STATUS_OK = 0,
  TLIM_STATUS_NULL_POINTER = 1,
  TLIM_STATUS_INVALID_ARGUMENT = 2,
  TLIM_STATUS_IO = 3,
  TLIM_STATUS_PARSE = 4,
  TLIM_STATUS_INSUFFICIENT_SUPPORT = 5,
  TLIM_STATUS_ZERO_CELL = 6,
  TLIM_STATUS_UNSUPPORTED = 7,
  TLIM_STATUS_PANIC = 8,
} TlimStatus;

// A loaded or simulated sample matrix.
typedef struct TlimMatrix TlimMatrix;

// Restricted Boltzmann machine parameters.
typedef struct TlimRbm TlimRbm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *tlim_last_error(void);

// Loads a packed file, or a CSV with an inferred schema when the path ends in `.csv`.
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum TlimStatus tlim_matrix_load(const char *path, struct TlimMatrix **out);

// Writes the matrix in the packed format.
//
// # Safety
// `m` must come from this library; `path` must be a nul-terminated string.
enum TlimStatus tlim_matrix_save(const struct TlimMatrix *m, const char *path);

// Builds a matrix from row-major ±1 spins (`n_samples * n_vars` values).
//
// # Safety
// `spins` must point to `n_samples * n_vars` readable bytes; `out` must be writable.
enum TlimStatus tlim_matrix_from_spins(const int8_t *spins,
                                       size_t n_samples,
                                       size_t n_vars,
                                       struct TlimMatrix **out);

// # Safety
// `m` must come from this library and not be used afterwards. Null is ignored.
void tlim_matrix_free(struct TlimMatrix *m);

// # Safety
// `m` must come from this library or be null (returns 0).
size_t tlim_matrix_n_samples(const struct TlimMatrix *m);

// # Safety
// `m` must come from this library or be null (returns 0).
size_t tlim_matrix_n_vars(const struct TlimMatrix *m);

// Rows where `vars[k] == values[k]` for every k.
//
// # Safety
// `vars` and `values` must each hold `len` entries; `out` must be writable.
enum TlimStatus tlim_count_assignment(const struct TlimMatrix *m,
                                      const size_t *vars,
                                      const uint8_t *values,
                                      size_t len,
                                      uint64_t *out);

// `ln I^m` of the targets given the conditioning variables at 0. A null
// `conditioning` conditions on every other discrete variable. Cells below
// `min_bin_count` are an error.
//
// # Safety
// Arrays must hold the stated number of entries; `out_log_value` must be writable.
enum TlimStatus tlim_multiplicative(const struct TlimMatrix *m,
                                    const size_t *targets,
                                    size_t n_targets,
                                    const size_t *conditioning,
                                    size_t n_conditioning,
                                    double min_bin_count,
                                    double *out_log_value);

// `I^a` of the targets on the outcome column, conditioning as in
// [`tlim_multiplicative`].
//
// # Safety
// Arrays must hold the stated number of entries; `out_value` must be writable.
enum TlimStatus tlim_additive(const struct TlimMatrix *m,
                              size_t outcome,
                              const size_t *targets,
                              size_t n_targets,
                              const size_t *conditioning,
                              size_t n_conditioning,
                              double min_bin_count,
                              double *out_value);

// Divisor turning `ln I^m` of an `order`-tuple into a ±1-basis coupling.
//
// # Safety
// `out` must be writable.
enum TlimStatus tlim_coupling_factor(size_t order, double *out);

// Runs the Ising Metropolis sampler with the default coupling, burn-in,
// thinning and chain count.
//
// # Safety
// `out` must be writable.
enum TlimStatus tlim_simulate_ising(size_t side,
                                    double temperature,
                                    size_t n_samples,
                                    uint64_t seed,
                                    struct TlimMatrix **out);

// Parses `{m, n, w, b, c}` JSON.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum TlimStatus tlim_rbm_from_json(const char *json, struct TlimRbm **out);

// Closed-form pair coupling between visible units `j1` and `j2`.
//
// # Safety
// `rbm` must come from this library; `out` must be writable.
enum TlimStatus tlim_rbm_pair_coupling(const struct TlimRbm *rbm,
                                       size_t j1,
                                       size_t j2,
                                       double *out);

// # Safety
// `rbm` must come from this library and not be used afterwards. Null is ignored.
void tlim_rbm_free(struct TlimRbm *rbm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TLIM_H */
