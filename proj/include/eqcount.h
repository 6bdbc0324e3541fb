#ifndef EQCOUNT_H
#define EQCOUNT_H

/* C interface to the equilibrium-counting library. Every call returns a
 * status code; on failure eqc_last_error() describes what went wrong for the
 * calling thread. Array arguments are caller-allocated, row-major. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    EQC_OK = 0,
    EQC_EINVAL = 1, /* precondition violated */
    EQC_EFAIL = 2   /* runtime failure (non-convergence, degenerate sample, ...) */
} eqc_status;

/* Message of the last failure on this thread; empty string if none. */
const char* eqc_last_error(void);

/* Build version (git describe at configure time). */
const char* eqc_version(void);

/* Worker pool width: EQCOUNT_THREADS if set, hardware concurrency otherwise.
 * Results never depend on it, only wall time does. */
int eqc_worker_count(void);

/* ---- complexity of the annealed counts -------------------------------- */

/* log-potential of the elliptic law with semi-axes 1 +- tau */
eqc_status eqc_log_potential(double tau, double u, double* out);

/* one-point complexity at radial speed u */
eqc_status eqc_annealed_complexity(int p, double tau, double u, double* out);

/* out = {e_inf, e_zero, tau_p, theta, u_th} */
eqc_status eqc_thresholds(int p, double tau, double out[5]);

/* two-point complexity at overlap r and speeds (u1, u2) */
eqc_status eqc_two_point_complexity(int p, double tau, double r, double u1,
                                    double u2, double* out);

/* interaction factor g(r) and diagonal rate Q(r, u) */
eqc_status eqc_g_factor(int p, double tau, double r, double* out);
eqc_status eqc_q_function(int p, double tau, double r, double u, double* out);

/* ---- conditional covariance structures -------------------------------- */

/* 4x4 covariance of the cross-derivative vector, row-major */
eqc_status eqc_sigma_z(int p, double tau, double r, double out[16]);

/* 2x2 corner covariance and the 2x2 mean weights, row-major */
eqc_status eqc_sigma_s_and_mean(int p, double tau, double r, double sigma_s[4],
                                double mean_w[4]);

/* unnormalized edge variances sigma1, sigma2 */
eqc_status eqc_sigma_edge_variances(int p, double tau, double r, double* s1,
                                    double* s2);

/* 2x2 covariance of the conditioned radial speed pair, row-major */
eqc_status eqc_sigma_u(int p, double tau, double r, double cov[4]);

/* overlap correlation of the radial fields (their covariance over p) */
eqc_status eqc_overlap_g(int p, double tau, double r, double* out);

/* ---- ensemble draws and spectra --------------------------------------- */

/* One matrix from GEE(n, tau): ascending singular values of (A - shift I)
 * into atoms[n], real eigenvalues of A into reals[0..*n_real). */
eqc_status eqc_sample_spectrum(int n, double tau, double shift, uint64_t seed,
                               double* atoms, double* reals, int* n_real);

/* ---- correlation kernel ------------------------------------------------ */

/* Frobenius residual between the finite-n kernel block and its bulk limit */
eqc_status eqc_kernel_residual(int n, double tau, double x, double y, double* out);

/* density of real eigenvalues: l-point correlation at l distinct points */
eqc_status eqc_real_correlation(int n, double tau, const double* points, int l,
                                double* out);

/* E prod_i |det(A_n - mus[i])| as (sign, log magnitude); mus strictly
 * descending, l <= 4 */
eqc_status eqc_moment_via_kernel(int n, double tau, const double* mus, int l,
                                 double* sign, double* log_mag);

/* ---- Monte Carlo estimators -------------------------------------------- */

/* log E|det(A_n - x I)|^ell with the stderr of the log */
eqc_status eqc_det_moment(int n, double tau, double x, int ell, int64_t samples,
                          uint64_t seed, double* log_mean, double* stderr_log);

/* second-vs-first moment ratio across sizes ns[0..count); per-size log
 * numerator, log denominator, log ratio and stderr, plus the fitted
 * log-log slope */
eqc_status eqc_moment_ratio_scan(const int* ns, int count, double tau, double x,
                                 int ell, int64_t samples, uint64_t seed,
                                 double* log_num, double* log_den,
                                 double* log_ratio, double* stderr_log,
                                 double* slope);

/* histogram of real eigenvalues over n_edges-1 bins: per-bin sampled mean,
 * stderr and kernel prediction, plus totals and the count of odd/even parity
 * violations */
eqc_status eqc_real_density(int n, double tau, const double* edges, int n_edges,
                            int64_t samples, uint64_t seed, double* mean,
                            double* se, double* predicted, double* mean_total,
                            double* stderr_total, double* predicted_total,
                            int64_t* parity_mismatches);

/* coupling strength of the conditional pair law against the independent
 * product at overlap r: log E[|det M1||det M2|] - 2 log-moments */
eqc_status eqc_delta_ratio(int p, double tau, int n, double r, double u1,
                           double u2, int64_t samples, uint64_t seed,
                           double* log_mean, double* stderr_log);

/* ---- sampled fields and equilibrium counts ----------------------------- */

typedef struct eqc_field eqc_field;

/* draw the coefficient tensors of one mixed field on |x|^2 = n */
eqc_status eqc_field_sample(int p, double tau, int n, uint64_t seed,
                            uint64_t stream, eqc_field** out);
void eqc_field_free(eqc_field* f);

eqc_status eqc_field_dims(const eqc_field* f, int* p, int* n);

/* f(x), lambda(x) and the tangential field F(x) = -lambda x + f at a point
 * with |x|^2 = n; fvec and bigf have length n, either may be NULL */
eqc_status eqc_field_eval(const eqc_field* f, const double* x, double* fvec,
                          double* lambda, double* bigf);

/* equilibrium count of an n=2 field (EQC_EFAIL on degenerate tangency) */
eqc_status eqc_field_count_circle(const eqc_field* f, int* count);

/* exact two-point covariance E[f_k(x) f_l(y)], n*n row-major */
eqc_status eqc_covariance_oracle(int p, double tau, int n, const double* x,
                                 const double* y, double* out);

/* mean equilibrium count over sampled n=2 fields; counts/stable may be NULL
 * or length `fields`: the first *retained entries are filled, in sample
 * order, with degenerate samples skipped and counted in *discarded */
eqc_status eqc_circle_batch(int p, double tau, int fields, uint64_t seed,
                            double* mean, double* se, double* mean_stable,
                            double* se_stable, int64_t* discarded,
                            int* counts, int* stable, int64_t* retained);

/* expected number of equilibria with radial speed in a union of k open
 * intervals, passed as [lo0, hi0, lo1, hi1, ...] */
eqc_status eqc_first_moment(int p, double tau, int n, const double* intervals,
                            int k, int64_t samples, uint64_t seed, double* out);

/* overlap density of equilibrium pairs with both speeds in the band */
eqc_status eqc_second_moment_integrand(int p, double tau, int n, double r,
                                       const double* intervals, int k,
                                       int64_t samples, uint64_t seed,
                                       double* value, double* stderr_value);

#ifdef __cplusplus
}
#endif

#endif /* EQCOUNT_H */
