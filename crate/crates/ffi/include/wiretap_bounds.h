#ifndef WIRETAP_BOUNDS_H
#define WIRETAP_BOUNDS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define WT_UNIT_NATS 0

#define WT_UNIT_BITS 1

#define WT_BOUND_LOWER 0

#define WT_BOUND_UPPER 1

typedef enum WtStatus {
  WT_STATUS_OK = 0,
  WT_STATUS_NULL_POINTER = 1,
  WT_STATUS_DOMAIN = 2,
  WT_STATUS_DIMENSION = 3,
  WT_STATUS_NOT_UNITARY = 4,
  WT_STATUS_NUMERICAL = 5,
  WT_STATUS_PARSE = 6,
  WT_STATUS_PANIC = 7,
} WtStatus;

typedef struct WtAllocation WtAllocation;

typedef struct WtEnsemble WtEnsemble;

typedef struct WtMatrix WtMatrix;

typedef struct WtSpectrum WtSpectrum;

/*
 Monte Carlo estimate with its 95% interval.
 */
typedef struct WtEstimate {
  double mean;
  double std_error;
  uint64_t n_samples;
  double ci_low;
  double ci_high;
} WtEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. The pointer is
 valid until the next failing call on the same thread.
 */
const char *wt_last_error(void);

/*
 Thermal entropy `g(x)` in nats.

 # Safety
 `out` must be valid for writing one `double`.
 */
enum WtStatus wt_g_entropy(double x, double *out);

/*
 Single-mode lower bound `L(eta, nbar)` in `unit`.

 # Safety
 `out` must be valid for writing one `double`.
 */
enum WtStatus wt_lower_bound(double eta, double nbar, uint32_t unit, double *out);

/*
 Single-mode upper bound `U(eta, nbar)` in `unit`.

 # Safety
 `out` must be valid for writing one `double`.
 */
enum WtStatus wt_upper_bound(double eta, double nbar, uint32_t unit, double *out);

/*
 Large-budget limit of the lower bound in nats; `+inf` at `eta = 1`.

 # Safety
 `out` must be valid for writing one `double`.
 */
enum WtStatus wt_capacity_infinite(double eta, double *out);

/*
 Low-photon `O(nbar)` coefficients of the lower and upper bounds, in nats.

 # Safety
 `lower` and `upper` must be valid for writing one `double` each.
 */
enum WtStatus wt_asymptotic_coefficients(double eta, double *lower, double *upper);

/*
 Build a `rows x cols` matrix from row-major real and imaginary parts.
 `im` may be null for a real matrix.

 # Safety
 `re` (and `im` if non-null) must hold `rows * cols` doubles; `out` must be
 valid for writing one pointer.
 */
enum WtStatus wt_matrix_new(uintptr_t rows,
                            uintptr_t cols,
                            const double *re,
                            const double *im,
                            struct WtMatrix **out);

/*
 An `n x n` Haar-random unitary, deterministic in `seed`.

 # Safety
 `out` must be valid for writing one pointer.
 */
enum WtStatus wt_matrix_haar(uintptr_t n, uint64_t seed, struct WtMatrix **out);

/*
 Copy the entries into row-major `re` and `im`, each of length `len`
 (at least rows * cols).

 # Safety
 `matrix` must come from this library; `re` and `im` must be valid for
 writing `len` doubles.
 */
enum WtStatus wt_matrix_entries(const struct WtMatrix *matrix,
                                double *re,
                                double *im,
                                uintptr_t len);

/*
 # Safety
 `matrix` must be null or come from this library, and not be used afterwards.
 */
void wt_matrix_free(struct WtMatrix *matrix);

/*
 A spectrum of transmissivities, each in `[0, 1]`.

 # Safety
 `etas` must hold `len` doubles; `out` must be valid for writing one pointer.
 */
enum WtStatus wt_spectrum_new(const double *etas, uintptr_t len, struct WtSpectrum **out);

/*
 Reduce the unitary `matrix` with `m` inputs, `k` outputs to Bob and `l`
 to Eve into parallel single-mode channels. `residual` may be null.

 # Safety
 `matrix` must come from this library; `out` must be valid for writing one
 pointer and `residual` for one double if non-null.
 */
enum WtStatus wt_mode_decompose(const struct WtMatrix *matrix,
                                uintptr_t m,
                                uintptr_t k,
                                uintptr_t l,
                                struct WtSpectrum **out,
                                double *residual);

/*
 Number of modes, or 0 for a null handle.

 # Safety
 `spectrum` must be null or come from this library.
 */
uintptr_t wt_spectrum_len(const struct WtSpectrum *spectrum);

/*
 Copy the transmissivities, descending, into `buf` of length `len`.

 # Safety
 `spectrum` must come from this library; `buf` must be valid for writing
 `len` doubles.
 */
enum WtStatus wt_spectrum_values(const struct WtSpectrum *spectrum, double *buf, uintptr_t len);

/*
 # Safety
 `spectrum` must be null or come from this library, and not be used afterwards.
 */
void wt_spectrum_free(struct WtSpectrum *spectrum);

/*
 Optimal split of `nbar` photons across the spectrum for bound `kind`.

 # Safety
 `spectrum` must come from this library; `out` must be valid for writing
 one pointer.
 */
enum WtStatus wt_allocate(const struct WtSpectrum *spectrum,
                          double nbar,
                          uint32_t kind,
                          double tol,
                          struct WtAllocation **out);

/*
 Total rate of the allocation in `unit`.

 # Safety
 `allocation` must come from this library; `out` must be valid for writing
 one double.
 */
enum WtStatus wt_allocation_value(const struct WtAllocation *allocation,
                                  uint32_t unit,
                                  double *out);

/*
 Copy the per-mode budgets (spectrum order) into `buf` of length `len`.

 # Safety
 `allocation` must come from this library; `buf` must be valid for writing
 `len` doubles.
 */
enum WtStatus wt_allocation_budgets(const struct WtAllocation *allocation,
                                    double *buf,
                                    uintptr_t len);

/*
 # Safety
 `allocation` must be null or come from this library, and not be used afterwards.
 */
void wt_allocation_free(struct WtAllocation *allocation);

/*
 Parse an ensemble from a nul-terminated JSON string.

 # Safety
 `json` must be a valid C string; `out` must be valid for writing one pointer.
 */
enum WtStatus wt_ensemble_from_json(const char *json, struct WtEnsemble **out);

/*
 Top-left `k x m` blocks of `n x n` Haar unitaries.

 # Safety
 `out` must be valid for writing one pointer.
 */
enum WtStatus wt_ensemble_haar_subblock(uintptr_t n,
                                        uintptr_t m,
                                        uintptr_t k,
                                        uint64_t seed,
                                        struct WtEnsemble **out);

/*
 Monte Carlo estimate of the expected allocated lower bound, in nats.

 # Safety
 `ensemble` must come from this library; `out` must be valid for writing
 one `WtEstimate`.
 */
enum WtStatus wt_monte_carlo_lower(const struct WtEnsemble *ensemble,
                                   double nbar,
                                   uint64_t n_samples,
                                   struct WtEstimate *out);

/*
 # Safety
 `ensemble` must be null or come from this library, and not be used afterwards.
 */
void wt_ensemble_free(struct WtEnsemble *ensemble);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIRETAP_BOUNDS_H */
