#ifndef OPRENEWAL_H
#define OPRENEWAL_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum OprStatus {
  OPR_STATUS_OK = 0,
  OPR_STATUS_NULL_POINTER = 1,
  OPR_STATUS_INVALID_ARGUMENT = 2,
  OPR_STATUS_BUFFER_TOO_SMALL = 3,
  OPR_STATUS_NO_CONVERGENCE = 4,
  OPR_STATUS_NUMERIC = 5,
  OPR_STATUS_PANIC = 6,
} OprStatus;

// Map family selector.
typedef enum OprFamily {
  OPR_FAMILY_LSV = 0,
  OPR_FAMILY_LSV0 = 1,
} OprFamily;

// Induced transfer operator on `Y = [1/2, 1]` with its invariant density.
typedef struct OprOperator OprOperator;

// Operator renewal sums `T_n v` and `S_n v` for one observable.
typedef struct OprRenewal OprRenewal;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *opr_last_error(void);

// Static description of a status code.
const char *opr_status_message(enum OprStatus status);

// Builds the induced operator for `family` on `grid` cells with branches up to
// `ntrunc`, and its invariant density.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum OprStatus opr_operator_new(enum OprFamily family,
                                double alpha,
                                uintptr_t grid,
                                uintptr_t ntrunc,
                                struct OprOperator **out);

// # Safety
// `op` must be null or a handle from [`opr_operator_new`] not yet freed.
void opr_operator_free(struct OprOperator *op);

// Number of grid cells, or 0 for a null handle.
//
// # Safety
// `op` must be null or a live operator handle.
uintptr_t opr_operator_cells(const struct OprOperator *op);

// Lebesgue measure of the returns beyond the truncation.
//
// # Safety
// `op` must be a live operator handle and `out` writable.
enum OprStatus opr_operator_mass_deficit(const struct OprOperator *op, double *out);

// Copies the cell values of the invariant density (normalized to `∫_Y h dx = 1`).
//
// # Safety
// `op` must be a live operator handle and `buf` must hold `len` doubles.
enum OprStatus opr_operator_density(const struct OprOperator *op, double *buf, uintptr_t len);

// Computes `T_n v` for `n ≤ nmax` where `v` has one value per cell.
//
// # Safety
// `op` must be a live operator handle, `v` must hold `len` doubles and `out` be writable.
enum OprStatus opr_renewal_new(const struct OprOperator *op,
                               const double *v,
                               uintptr_t len,
                               uintptr_t nmax,
                               struct OprRenewal **out);

// # Safety
// `r` must be null or a handle from [`opr_renewal_new`] not yet freed.
void opr_renewal_free(struct OprRenewal *r);

// Copies `T_n v` on the grid.
//
// # Safety
// `r` must be a live renewal handle and `buf` must hold `len` doubles.
enum OprStatus opr_renewal_tn(const struct OprRenewal *r, uintptr_t n, double *buf, uintptr_t len);

// Copies `S_n v = Σ_{j≤n} T_j v` on the grid.
//
// # Safety
// `r` must be a live renewal handle and `buf` must hold `len` doubles.
enum OprStatus opr_renewal_partial_sum(const struct OprRenewal *r,
                                       uintptr_t n,
                                       double *buf,
                                       uintptr_t len);

// Scalar renewal sequence `u_0..u_nmax` for return probabilities `f_1..f_len`.
//
// # Safety
// `probs` must hold `len` doubles and `u_out` must hold `nmax + 1` doubles.
enum OprStatus opr_scalar_renewal(const double *probs,
                                  uintptr_t len,
                                  uintptr_t nmax,
                                  double *u_out);

// `∫_ℝ (1−iσ)^{-(β+1)} e^{-iσ} dσ` with its error bar.
//
// # Safety
// `value` and `error_bar` must be writable.
enum OprStatus opr_contour_b2(double beta, double *value, double *error_bar);

// Kernel estimate of `Σ_{j ≤ n−4} c_j` for the polynomial `Σ c_j z^j` with window
// exponent `gamma`; `u_bound` (or a negative value if unknown) bounds `|c_j|`.
//
// # Safety
// `coeffs` must hold `len` doubles; `estimate` and `error_bar` must be writable.
enum OprStatus opr_kernel_extract(const double *coeffs,
                                  uintptr_t len,
                                  uintptr_t n,
                                  double gamma,
                                  double u_bound,
                                  double *estimate,
                                  double *error_bar);

// `Γ(x)`.
//
// # Safety
// `out` must be writable.
enum OprStatus opr_gamma(double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPRENEWAL_H */
