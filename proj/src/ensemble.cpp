#include "eqcount/ensemble.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eqc {

GeeMatrix sample_gee(int n, double tau, Rng& rng) {
    if (n < 1 || std::fabs(tau) > 1.0)
        throw std::invalid_argument("sample_gee: need n >= 1 and |tau| <= 1");
    Eigen::MatrixXd g(n, n);
    double rn = 1.0 / std::sqrt(double(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.next_gauss() * rn;
    GeeMatrix out{n, tau, {}};
    if (tau == 1.0) {
        // bivariate construction is degenerate here; symmetrize explicitly
        out.entries = (g + g.transpose()) * (std::sqrt(2.0) / 2.0);
        return out;
    }
    double x = 0.5 * (std::sqrt(1.0 + tau) + std::sqrt(1.0 - tau));
    double y = 0.5 * (std::sqrt(1.0 + tau) - std::sqrt(1.0 - tau));
    out.entries = x * g + y * g.transpose();
    return out;
}

CorrelatedPair sample_correlated_pair(int n, double tau, int p, double r, Rng& rng) {
    if (std::fabs(r) >= 1.0 || p < 3)
        throw std::invalid_argument("sample_correlated_pair: need |r| < 1 and p >= 3");
    CorrelatedPair out;
    out.r = r;
    out.shared = sample_gee(n, tau, rng);
    out.a1 = sample_gee(n, tau, rng);
    out.a2 = sample_gee(n, tau, rng);
    double w = std::pow(std::fabs(r), p - 2.0);
    double ci = std::sqrt(1.0 - w), cs = std::sqrt(w);
    // sign(r)^{pk}: alternating only when p is odd and r negative, k = 1
    double s1 = (r < 0.0 && p % 2 == 1) ? -1.0 : 1.0;
    out.pair[0] = ci * out.a1.entries + s1 * cs * out.shared.entries;
    out.pair[1] = ci * out.a2.entries + cs * out.shared.entries;
    return out;
}

static Eigen::VectorXd singvals(const Eigen::MatrixXd& m) {
    if (m.rows() <= 32) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        return svd.singularValues();
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues();
}

EmpiricalMeasure singular_spectrum(const Eigen::MatrixXd& A, double z) {
    if (A.rows() != A.cols()) throw std::invalid_argument("singular_spectrum: matrix must be square");
    Eigen::MatrixXd m = A;
    m.diagonal().array() -= z;
    Eigen::VectorXd s = singvals(m);
    EmpiricalMeasure em;
    em.atoms.assign(s.data(), s.data() + s.size());
    std::sort(em.atoms.begin(), em.atoms.end());
    em.weight = 1.0 / double(A.rows());
    return em;
}

double log_det_abs(const Eigen::MatrixXd& A, double z) {
    EmpiricalMeasure em = singular_spectrum(A, z);
    // numerically singular below the usual rank tolerance
    double tol = em.atoms.back() * double(em.atoms.size()) *
                 std::numeric_limits<double>::epsilon();
    double acc = 0.0;
    for (double s : em.atoms) {
        if (s <= tol) return -std::numeric_limits<double>::infinity();
        acc += std::log(s);
    }
    return acc;
}

double regularized_log_statistic(const Eigen::MatrixXd& A, double z, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("regularized_log_statistic: eps must be positive");
    EmpiricalMeasure em = singular_spectrum(A, z);
    double acc = 0.0;
    for (double s : em.atoms) acc += std::log(std::fmax(s, eps));
    return acc / double(em.atoms.size());
}

std::vector<std::complex<double>> eigen_spectrum(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("eigen_spectrum: matrix must be square");
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigen_spectrum: eigenvalue iteration failed");
    std::vector<std::complex<double>> out(A.rows());
    for (int i = 0; i < A.rows(); ++i) out[i] = es.eigenvalues()[i];
    return out;
}

std::vector<double> real_eigenvalues(const Eigen::MatrixXd& A) {
    double s1 = singvals(A).maxCoeff();
    double thr = 1e-8 * std::fmax(1.0, s1);
    std::vector<double> out;
    for (const auto& lam : eigen_spectrum(A))
        if (std::fabs(lam.imag()) <= thr) out.push_back(lam.real());
    std::sort(out.begin(), out.end());
    return out;
}

double ellipse_coverage(const std::vector<std::complex<double>>& atoms, double tau, double margin) {
    if (margin < 0.0) throw std::invalid_argument("ellipse_coverage: margin must be nonnegative");
    if (atoms.empty()) return 0.0;
    double a = 1.0 + tau + margin, b = 1.0 - tau + margin;
    std::size_t inside = 0;
    for (const auto& z : atoms) {
        double x = z.real() / a, y = z.imag() / b;
        if (x * x + y * y <= 1.0) ++inside;
    }
    return double(inside) / double(atoms.size());
}

} // namespace eqc
