#ifndef MAXMEAN_H
#define MAXMEAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdint.h>

// Result codes of the C interface.
typedef enum MaxmeanStatus {
  MAXMEAN_STATUS_OK = 0,
  // An argument lies outside the function's domain.
  MAXMEAN_STATUS_DOMAIN = 1,
  // An iteration did not converge or a result is not representable.
  MAXMEAN_STATUS_CONVERGENCE = 2,
  // A series could not be certified to the requested tolerance.
  MAXMEAN_STATUS_TRUNCATION = 3,
  // The risk model has a non-positive safety loading.
  MAXMEAN_STATUS_SOLVENCY = 4,
  // A simulation depth was too small.
  MAXMEAN_STATUS_DEPTH = 5,
  // A required pointer argument was null.
  MAXMEAN_STATUS_NULL_POINTER = 6,
  // A Rust panic was caught at the boundary.
  MAXMEAN_STATUS_INTERNAL = 7,
} MaxmeanStatus;

// Numerical policies shared by the series and Lambert W routines.
typedef struct MaxmeanContext MaxmeanContext;

// Polynomial in `x` and `t` with exact rational coefficients.
typedef struct MaxmeanPoly MaxmeanPoly;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last error on this thread, or an empty string. Owned
// by the library.
const char *maxmean_last_error_message(void);

// New context with the given series tolerance and term budget and default
// branch-point settings. Returns null when the arguments are invalid.
struct MaxmeanContext *maxmean_context_new(double abs_tol, uint64_t max_terms);

// Replaces the branch-point settings of `ctx`.
enum MaxmeanStatus maxmean_context_set_branch_policy(struct MaxmeanContext *ctx,
                                                     double switch_radius,
                                                     double newton_tol,
                                                     uint32_t max_iters);

void maxmean_context_free(struct MaxmeanContext *ctx);

enum MaxmeanStatus maxmean_lambert_w0(const struct MaxmeanContext *ctx, double y, double *out);

enum MaxmeanStatus maxmean_conjugate_t(const struct MaxmeanContext *ctx, double x, double *out);

enum MaxmeanStatus maxmean_cdf_inf(double x, double *out);

enum MaxmeanStatus maxmean_cdf_inf_series(const struct MaxmeanContext *ctx, double x, double *out);

// Density of the limit law. `right_limit` (optional) is set to 1 at `x = 1`,
// where the value is the right-hand limit.
enum MaxmeanStatus maxmean_pdf_inf(double x, double *out, int32_t *right_limit);

enum MaxmeanStatus maxmean_quantile_inf(double u, double *out);

enum MaxmeanStatus maxmean_upper_percentage_point(double alpha, double *out);

enum MaxmeanStatus maxmean_cdf_finite(double x, uint64_t n, double *out);

enum MaxmeanStatus maxmean_cdf_shifted(double x, uint64_t n, double lambda, double *out);

enum MaxmeanStatus maxmean_cdf_shifted_inf(double x, double lambda, double *out);

enum MaxmeanStatus maxmean_quantile_shifted_inf(double u, double lambda, double *out);

enum MaxmeanStatus maxmean_cdf_m2(double x, double *out);

// `E Z_n^alpha`; `n = 0` selects the limit `n = ∞`.
enum MaxmeanStatus maxmean_moment(uint64_t n, double alpha, double *out);

enum MaxmeanStatus maxmean_ruin_probability(double theta, double u, double *out);

enum MaxmeanStatus maxmean_min_capital(double alpha, double theta, double *out);

enum MaxmeanStatus maxmean_genpoisson_pmf(uint64_t k, double alpha, double theta, double *out);

enum MaxmeanStatus maxmean_genpoisson_cdf(uint64_t k, double alpha, double theta, double *out);

// Writes `count` variates into `buffer`, which must hold `count` values.
enum MaxmeanStatus maxmean_genpoisson_sample(double alpha,
                                             double theta,
                                             uint64_t count,
                                             uint64_t seed,
                                             uint64_t *buffer);

// `V_n` expanded in closed form. Never returns null.
struct MaxmeanPoly *maxmean_poly_closed_form(uint32_t n);

// `V_n` built by iterating the integral recursion. Never returns null.
struct MaxmeanPoly *maxmean_poly_by_recursion(uint32_t n);

// One recursion step applied to `p`; null if `p` is null.
struct MaxmeanPoly *maxmean_poly_recursion_step(const struct MaxmeanPoly *p);

// 1 if both polynomials have identical coefficient maps, 0 otherwise or on null.
int32_t maxmean_poly_equal(const struct MaxmeanPoly *a, const struct MaxmeanPoly *b);

// Number of stored (nonzero) coefficients.
uint64_t maxmean_poly_term_count(const struct MaxmeanPoly *p);

enum MaxmeanStatus maxmean_poly_evaluate(const struct MaxmeanPoly *p,
                                         double x,
                                         double t,
                                         double *out);

void maxmean_poly_free(struct MaxmeanPoly *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAXMEAN_H */
