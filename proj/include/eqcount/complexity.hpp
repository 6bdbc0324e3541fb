#pragma once

#include <array>

#include "eqcount/params.hpp"

namespace eqc {

// log-potential of the elliptic law: logarithmic energy of the limiting
// spectral measure against |u - .|, evaluated for the ellipse with
// semi-axes 1 + tau and 1 - tau. Piecewise: quadratic inside |u| <= 1 + tau,
// quadratic minus an explicit correction outside.
double log_potential(double tau, double u);

// First-moment (annealed) complexity of critical points at speed u on the
// lambda axis.
double annealed_complexity(const ModelParams& mp, double u);

struct Thresholds {
    double e_inf;   // edge speed: below it exponentially many critical points persist
    double e_zero;  // zero of the annealed complexity
    double tau_p;   // tau at which e_inf and e_zero cross
    double theta;   // value of the complexity at -e_inf
    double u_th;    // speed where the two-point rate at r = +-1 changes sign
};

Thresholds thresholds(const ModelParams& mp);

// Entropy of the overlap constraint: (1/2) log((1-r^2)/(1-r^{2p-2})),
// continued to r = +-1 by its limit -(1/2) log(p-1).
double overlap_entropy(int p, double r);

// Covariance of the pair of radial speeds conditioned on criticality at
// overlap r. inverse() is exact: Sigma_U^{-1} = [[k1,k2],[k2,k1]]/(p alpha b).
struct SigmaU {
    double k1, k2, b;
    double p_alpha;
    std::array<double, 4> inverse() const;  // row-major 2x2
    std::array<double, 4> cov() const;
};

SigmaU sigma_u(const ModelParams& mp, double r);

// Second-moment complexity of pairs of critical points at overlap r and
// speeds (u1, u2). At r = 0 it splits exactly into the sum of one-point
// complexities.
double two_point_complexity(const ModelParams& mp, double r, double u1, double u2);

// Interaction factor g and the diagonal rate Q(r,u) = h(r) + u^2 g(r)/(p alpha);
// Q(1, u) = -(1/2) log(p-1) (1 - u^2/u_th^2).
double g_factor(const ModelParams& mp, double r);
double q_function(const ModelParams& mp, double r, double u);

} // namespace eqc
