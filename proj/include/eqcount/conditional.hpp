#pragma once

#include <Eigen/Dense>

#include "eqcount/params.hpp"

namespace eqc {

// Covariance of the tangential cross-derivative 4-vector
//   (E_iG_{N-1}(n), E_{N-1}G_i(n), E_iG_{N-1}(n(r)), E_{N-1}G_i(n(r))) / sqrt(p(p-1)),
// i < N-1, conditioned on G_i vanishing at both points. N-free. Components
// (1,3) feed the last column of the two conditional Jacobians, (2,4) the
// last row.
Eigen::Matrix4d sigma_z(const ModelParams& mp, double r);

// Law of the two corner entries (the E_{N-1}G_{N-1} + zeta combination at each
// point) given the conditioning data (zeta, G_{N-1} at both points):
// sigma_s is the conditional covariance normalized by p(p-1); the conditional
// mean of corner k is sum_l mean_w(k,l) * u_l over the two radial speeds.
struct CornerLaw {
    Eigen::Matrix2d sigma_s;
    Eigen::Matrix2d mean_w;
};
CornerLaw sigma_s_and_mean(const ModelParams& mp, double r);

// Scalar conditional variances of the cross-derivatives: sigma1 for
// E_{N-1}G_i given the G_i pair (equals p(p-1) [sigma_z]_22), sigma2 for
// E_{N-1}G_{N-1} given the G_{N-1} pair. Unnormalized.
struct EdgeVariances {
    double sigma1;
    double sigma2;
};
EdgeVariances sigma_edge_variances(const ModelParams& mp, double r);

// Correlation/p of the G_{N-1} values across the two points:
// r^p - tau (p-1) r^{p-2} (1 - r^2).
double overlap_g(const ModelParams& mp, double r);

// Symmetric PSD square root via eigendecomposition. Eigenvalues below
// -1e-10 * scale are rejected as non-PSD, small negatives are clipped to 0.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

} // namespace eqc
