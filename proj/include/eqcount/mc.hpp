#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "eqcount/params.hpp"
#include "eqcount/rng.hpp"

namespace eqc {

// Seeded log-domain Monte Carlo estimate. A pure function of (seed, samples):
// the worker count changes wall time only, never the bits.
struct McEstimate {
    double log_mean = 0.0;
    double stderr_of_log = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

// Worker threads for the sample loops: EQCOUNT_THREADS when set and >= 1,
// otherwise the hardware count.
int worker_count();

// log E[|det(A - x I)|^ell] over GEE(n, tau): log-sum-exp over per-sample
// log-determinants with a delta-method standard error on the log scale.
// ell = 0 returns exactly 0. Signals a (probability-zero) batch in which
// every sample came out singular.
McEstimate estimate_abs_det_moment(int n, double tau, double x, int ell,
                                   std::int64_t samples, std::uint64_t seed);

// Fraction of the same sample set (same seed, same substreams) whose smallest
// singular value of A - x I falls below the threshold. Guard statistic for
// the estimator above; expected to be exactly 0 at desk sizes.
double small_singular_fraction(int n, double tau, double x, std::int64_t samples,
                               std::uint64_t seed, double threshold = 1e-12);

// One scan row: the ell-th moment of |det| against the ell-th power of the
// first moment at a single size, both from the same sample set, so ell = 1
// gives an exact zero.
struct MomentRatioRow {
    int n = 0;
    double log_num = 0.0;        // log E[|det(A - xI)|^ell]
    double log_den = 0.0;        // log E[|det(A - xI)|]
    double log_ratio = 0.0;      // log_num - ell * log_den
    double stderr_of_log = 0.0;  // numerator and denominator errors in quadrature
};

struct MomentRatioScan {
    std::vector<MomentRatioRow> rows;
    double slope = 0.0;          // least-squares slope of log_ratio against log n
    double tau = 0.0, x = 0.0;
    int ell = 0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

MomentRatioScan moment_ratio_scan(const std::vector<int>& n_list, double tau, double x,
                                  int ell, std::int64_t samples, std::uint64_t seed);

struct DensityBin {
    double lo = 0.0, hi = 0.0;
    double mean_count = 0.0;    // empirical mean real-eigenvalue count in [lo, hi)
    double stderr_count = 0.0;
    double predicted = 0.0;     // integral of the real correlation density over the bin
};

struct RealDensity {
    std::vector<DensityBin> bins;
    double mean_total = 0.0;        // every real eigenvalue, binned or not
    double stderr_total = 0.0;
    double predicted_total = 0.0;   // density integrated across the widened bulk
    std::int64_t parity_mismatches = 0;  // real-count parity must match n
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

// Histogram of real eigenvalues of GEE(n, tau) against the exact finite-n
// density. edges are ascending bin boundaries; the totals cover the whole
// line regardless of the binned window.
RealDensity real_eigenvalue_density(int n, double tau, const std::vector<double>& edges,
                                    std::int64_t samples, std::uint64_t seed);

// Speed grid mapping: the conditional Jacobians at radial speed u are
// compared against GEE(n-1) shifted by u_hat = sqrt(n/((n-1)p(p-1))) u.
double u_hat(const ModelParams& mp, int n, double u);

// Pair of (n-1)x(n-1) conditional Jacobians at overlap r and radial speeds
// (u1, u2): correlated GEE top block scaled by sqrt((n-2)/(n-1)), last
// row/column pairs drawn with covariance sigma_z(r)/(n-1), corner with the
// conditional mean sum_l mean_w(k,l) u_hat_l and covariance sigma_s(r)/(n-1),
// then minus u_hat_k I.
struct ConditionalJacobianPair {
    double r = 0.0, u1 = 0.0, u2 = 0.0;
    Eigen::MatrixXd m1, m2;
};

ConditionalJacobianPair conditional_pair_sample(const ModelParams& mp, int n, double r,
                                                double u1, double u2, Rng& rng);

// log of the two-point/one-point determinant ratio: log-mean of
// |det m1 det m2| over conditional pairs minus the two marginal moments
// at the mapped shifts, errors combined in quadrature.
McEstimate delta_ratio_estimate(const ModelParams& mp, int n, double r, double u1,
                                double u2, std::int64_t samples, std::uint64_t seed);

// Rewrite of the conditional pair as a correlated GEE pair plus corrections
// supported on the last row and column (rank <= 2), built from the same
// underlying matrices: a_k + e_k - u_hat_k I has the conditional_pair_sample
// law. At r = 0 and p >= 5 the corrections vanish identically.
struct PerturbationPair {
    Eigen::MatrixXd a1, a2;   // the correlated pair at overlap r
    Eigen::MatrixXd e1, e2;   // corrections, before the -u_hat_k I shift
};

PerturbationPair perturbation_decomposition(const ModelParams& mp, int n, double r,
                                            double u1, double u2, Rng& rng);

} // namespace eqc
