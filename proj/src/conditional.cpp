#include "eqcount/conditional.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace eqc {

namespace {

double ipow(double x, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= x;
    return v;
}

void check_overlap(const ModelParams& mp, double r) {
    mp.require_valid();
    if (!(std::fabs(r) < 1.0))
        throw std::invalid_argument("conditional: need |r| < 1, got r=" + std::to_string(r));
}

// cross-point covariance of E_{N-1}G_{N-1} with G_{N-1}
double a1_func(int p, double alpha, double tau, double r) {
    double rstar = std::sqrt(1.0 - r * r);
    return p * rstar * ipow(r, p - 3) * (p * alpha * r * r - (p - 1) * (p - 2) * tau);
}

// cross-point covariance of E_{N-1}G_{N-1} with itself; the quartic term
// drops out identically at p = 3
double a2_func(int p, double tau, double r) {
    double rs2 = 1.0 - r * r;
    double quartic =
        p >= 4 ? ipow(r, p - 4) * rs2 * rs2 * p * (p - 1) * (p - 2) * (p - 3) * tau : 0.0;
    return quartic - ipow(r, p - 2) * rs2 * p * (p - 1) * (p + 5 * p * tau - 8 * tau) +
           ipow(r, p) * p * (p + 2 * (p - 1) * tau);
}

} // namespace

double overlap_g(const ModelParams& mp, double r) {
    check_overlap(mp, r);
    return ipow(r, mp.p) - mp.tau * (mp.p - 1) * ipow(r, mp.p - 2) * (1.0 - r * r);
}

Eigen::Matrix4d sigma_z(const ModelParams& mp, double r) {
    check_overlap(mp, r);
    int p = mp.p;
    double tau = mp.tau;
    double pp = p * (p - 1.0);
    double rs2 = 1.0 - r * r;
    double rstar = std::sqrt(rs2);

    // cross-point covariances of the derivative pairs; the same-point blocks
    // are pp on the diagonal with transpose-coupling tau * pp
    double c_col = pp * ipow(r, p - 3) * (r * r - tau * (p - 2) * rs2);
    double c_row = pp * ipow(r, p - 3) * (r * r - (p - 2) * rs2);
    double c_mix = tau * pp * ipow(r, p - 3) * (r * r - (p - 2) * rs2);
    Eigen::Matrix4d cov_x;
    cov_x << pp, tau * pp, c_col, c_mix,
        tau * pp, pp, c_mix, c_row,
        c_col, c_mix, pp, tau * pp,
        c_mix, c_row, tau * pp, pp;

    // covariance with the conditioned pair (G_i(n), G_i(n(r)))
    double phi1p = pp * ipow(r, p - 2);
    double phi2 = tau * pp * ipow(r, p - 2);
    Eigen::Matrix<double, 4, 2> cov_xy;
    cov_xy << 0.0, rstar * phi2,
        0.0, rstar * phi1p,
        -rstar * phi2, 0.0,
        -rstar * phi1p, 0.0;

    Eigen::Matrix2d cov_y;
    double rp1 = ipow(r, p - 1);
    cov_y << p, p * rp1, p * rp1, p;

    Eigen::Matrix4d z = cov_x - cov_xy * cov_y.inverse() * cov_xy.transpose();
    return z / pp;
}

CornerLaw sigma_s_and_mean(const ModelParams& mp, double r) {
    check_overlap(mp, r);
    int p = mp.p;
    double tau = mp.tau;
    double al = mp.alpha();
    double pp = p * (p - 1.0);
    double rs2 = 1.0 - r * r;
    double rstar = std::sqrt(rs2);

    double ghat = overlap_g(mp, r);
    double a1 = a1_func(p, al, tau, r);
    double a2 = a2_func(p, tau, r);

    // covariance of the conditioning vector (zeta(n), zeta(n(r)), G_{N-1}(n), G_{N-1}(n(r)))
    double zz = p * al * ipow(r, p);
    double zg = p * al * rstar * ipow(r, p - 1);
    Eigen::Matrix4d cov_c;
    cov_c << p * al, zz, 0.0, -zg,
        zz, p * al, zg, 0.0,
        0.0, zg, p, p * ghat,
        -zg, 0.0, p * ghat, p;

    // covariance of the corner pair with the conditioning vector; adding zeta
    // to the second radial derivative cancels the same-point coupling exactly
    double t_zeta = p * al * (p - 1) * ipow(r, p - 2) * rs2;
    double a1t = a1 - zg;
    Eigen::Matrix<double, 2, 4> cov_ty;
    cov_ty << 0.0, t_zeta, 0.0, a1t,
        t_zeta, 0.0, -a1t, 0.0;

    Eigen::Matrix2d cov_t;
    double t_cross = a2 - 2.0 * p * al * ipow(r, p - 2) * (1.0 - p * rs2) + p * al * ipow(r, p);
    cov_t << pp * (1.0 + tau), t_cross, t_cross, pp * (1.0 + tau);

    Eigen::Matrix<double, 2, 4> w = cov_ty * cov_c.inverse();
    CornerLaw out;
    out.sigma_s = (cov_t - w * cov_ty.transpose()) / pp;
    out.mean_w = w.leftCols<2>();
    return out;
}

EdgeVariances sigma_edge_variances(const ModelParams& mp, double r) {
    check_overlap(mp, r);
    int p = mp.p;
    double tau = mp.tau;
    double al = mp.alpha();
    double pp = p * (p - 1.0);
    double rs2 = 1.0 - r * r;

    EdgeVariances out;
    out.sigma1 = pp * (1.0 - (p - 1) * ipow(r, 2 * p - 4) * rs2 / (1.0 - ipow(r, 2 * p - 2)));
    double ghat = overlap_g(mp, r);
    double a1 = a1_func(p, al, tau, r);
    out.sigma2 = p * (p + 2.0 * tau * (p - 1)) - a1 * a1 / (p * (1.0 - ghat * ghat));
    return out;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("psd_sqrt: square matrix required");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw std::invalid_argument("psd_sqrt: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    double scale = std::fmax(ev.cwiseAbs().maxCoeff(), 1.0);
    Eigen::VectorXd root(ev.size());
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-10 * scale)
            throw std::invalid_argument("psd_sqrt: matrix is not positive semi-definite");
        root[i] = std::sqrt(std::fmax(ev[i], 0.0));
    }
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace eqc
