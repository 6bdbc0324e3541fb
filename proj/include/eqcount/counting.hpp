#pragma once

#include <cstdint>
#include <vector>

#include "eqcount/field.hpp"
#include "eqcount/params.hpp"

namespace eqc {

// Zeros of the tangential component
//   g(t) = (F(sqrt(2)(cos t, sin t)), (-sin t, cos t))
// over one period, located by a sign-change scan on a uniform grid followed
// by bisection to 1e-12 in t. slopes[k] is the crossing direction at
// zeros[k]: +1 ascending, -1 descending; the descending ones are the stable
// equilibria (the 1x1 Jacobian of the flow is negative there). degenerate
// marks an exact zero on the grid, where the crossing cannot be classified
// and the sample should be discarded.
struct CircleScan {
    std::vector<double> zeros;
    std::vector<int> slopes;
    bool degenerate = false;
};
CircleScan scan_equilibria_circle(const SphericalPSpinField& field, int grid = 4096);

// Equilibrium count of an n=2 field; throws std::runtime_error on a
// degenerate tangency.
int count_equilibria_circle(const SphericalPSpinField& field);

// Mean equilibrium count over independently sampled n=2 fields, parallel
// over field indices with per-index substreams. Degenerate samples are
// dropped and counted in discarded; stable_counts records the descending
// crossings of each retained field.
struct CircleBatch {
    double mean_count = 0.0;
    double stderr_count = 0.0;
    double mean_stable = 0.0;
    double stderr_stable = 0.0;
    std::vector<int> counts;
    std::vector<int> stable_counts;
    long long discarded = 0;
    std::uint64_t seed = 0;
};
CircleBatch mean_circle_count(int p, double tau, int fields, std::uint64_t seed);

// Open interval (lo, hi); a band of radial speeds is a finite union of such
// intervals, with infinite endpoints allowed. An empty vector is the empty
// band.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};
using Band = std::vector<Interval>;

bool band_contains(const Band& b, double u);

// log of vol(S^{l-1}) = 2 pi^{l/2} / Gamma(l/2)
double log_sphere_volume(int l);

// Expected number of equilibria with radial speed in the band:
//   vol(S^{n-1}) ((n-1)(p-1)/(2 pi))^{(n-1)/2}
//     * int_B E|det(A_{n-1} - u_hat(u) I)| gauss(u; p alpha / n) du
// with A_{n-1} from GEE(n-1, tau). The inner expectation is the folded
// normal mean at n = 2, the correlation-kernel moment formula for
// 3 <= n-1 <= 9, and a fixed-grid Monte Carlo fallback above that
// (samples/seed only matter on that route).
double expected_crit_first_moment(const ModelParams& mp, int n, const Band& b,
                                  std::int64_t samples = 20000,
                                  std::uint64_t seed = 1);

// Overlap density factor of the pair integrand,
//   ((1-r^2)/(1-r^{2p-2}))^{(n-2)/2} / sqrt((1-r^2)(1-g(r)^2)),
// with g the overlap correlation of the radial fields; equals 1 at r = 0.
double pair_overlap_prefactor(const ModelParams& mp, int n, double r);

// Density in overlap r of the expected number of equilibrium pairs with both
// radial speeds in the band:
//   C_n * pair_overlap_prefactor(r) * E[|det M1||det M2| 1{U1, U2 in band}],
//   C_n = vol(S^{n-1}) vol(S^{n-2}) ((n-1)(p-1)/(2 pi))^{n-1}.
// Per sample the two speeds (U1, U2) ~ N(0, Sigma_U(r)/n) are drawn first
// (two gaussians), then the conditional Jacobian pair at those speeds; at
// r = 0 this factorizes into the squared first moment times the uniform
// overlap density vol(S^{n-2})/vol(S^{n-1}).
struct IntegrandEstimate {
    double value = 0.0;
    double stderr_value = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};
IntegrandEstimate second_moment_integrand(const ModelParams& mp, int n, double r,
                                          const Band& b, std::int64_t samples,
                                          std::uint64_t seed);

} // namespace eqc
