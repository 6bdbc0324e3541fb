#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "eqcount/rng.hpp"

namespace eqc {

// Real elliptic ensemble: (A_ij, A_ji) bivariate Gaussian with covariance
// [[1, tau], [tau, 1]]/n, diagonal variance (1+tau)/n.
struct GeeMatrix {
    int n;
    double tau;
    Eigen::MatrixXd entries;
};

GeeMatrix sample_gee(int n, double tau, Rng& rng);

// Pair coupled through a shared matrix: A^k(r) = sqrt(1-|r|^{p-2}) a_k +
// sign(r)^{pk} sqrt(|r|^{p-2}) shared. Both marginals stay elliptic.
struct CorrelatedPair {
    double r;
    GeeMatrix shared, a1, a2;
    Eigen::MatrixXd pair[2];
};

CorrelatedPair sample_correlated_pair(int n, double tau, int p, double r, Rng& rng);

struct EmpiricalMeasure {
    std::vector<double> atoms; // ascending
    double weight;             // 1/count
};

// Singular values of A - zI, ascending.
EmpiricalMeasure singular_spectrum(const Eigen::MatrixXd& A, double z);

// log|det(A - zI)| as the sum of log singular values; -inf when singular.
double log_det_abs(const Eigen::MatrixXd& A, double z);

// (1/n) sum_i log max(s_i(A - zI), eps).
double regularized_log_statistic(const Eigen::MatrixXd& A, double z, double eps);

// All n eigenvalues; complex ones come in conjugate pairs.
std::vector<std::complex<double>> eigen_spectrum(const Eigen::MatrixXd& A);

// Eigenvalues deemed real: |Im| <= 1e-8 max(1, s_1(A)). The real Schur form
// produces exact zeros for 1x1 blocks; the threshold guards against backend
// variation.
std::vector<double> real_eigenvalues(const Eigen::MatrixXd& A);

// Fraction of atoms inside the ellipse with semi-axes (1+tau+margin,
// 1-tau+margin).
double ellipse_coverage(const std::vector<std::complex<double>>& atoms, double tau, double margin);

} // namespace eqc
