#pragma once

#include <vector>

#include <Eigen/Dense>

#include "eqcount/rng.hpp"

namespace eqc {

// Pointwise covariance contractions of the mixed field:
// phi1(x) = p x^{p-1}, phi2(x) = tau p (p-1) x^{p-2}, phi3 = phi1 + x phi2,
// so phi3(1) = p (1 + (p-1) tau).
struct CovarianceSpec {
    int p = 3;
    double tau = 0.5;
    double phi1(double x) const;
    double phi2(double x) const;
    double phi3(double x) const;
};

// One draw of the mixed field f = c_s grad H + c_a f^a on the sphere
// |x|^2 = n. H is a pure p-spin polynomial; each A_ij with i < j is an
// independent (p-2)-spin polynomial, extended by A_ji = -A_ij, and
// f^a_i = (1/n) sum_j A_ij(x) x_j.
//
// Coefficients are stored one per sorted index tuple in lexicographic order;
// the entry for a tuple with d distinct orderings has variance d, which is
// the orbit sum of iid unit Gaussians and reproduces the l-spin covariance
// n ((x,y)/n)^l after the n^{-(l-1)/2} scaling.
struct SphericalPSpinField {
    int p = 0;
    int n = 0;
    double tau = 0.0;
    double c_s = 0.0;  // sqrt((1 + (p-1) tau) / p)
    double c_a = 0.0;  // sqrt((p-1) (1 - tau))
    std::vector<double> h_coeffs;
    std::vector<std::vector<double>> a_coeffs;  // pair (i<j), row-major
};

// Draws h_coeffs first, then the pair blocks in row-major order. tau = 1 is
// allowed (c_a = 0); so is tau = -1/(p-1) (c_s = 0).
SphericalPSpinField sample_field(int p, double tau, int n, Rng& rng);

// Raw components, defined for any x (not just on the sphere): the p-spin
// value H(x), its Euclidean gradient, one antisymmetric entry A_ij(x)
// (sign-extended to i > j, zero at i = j), and the rotational drift f^a(x).
double eval_h(const SphericalPSpinField& field, const Eigen::VectorXd& x);
Eigen::VectorXd eval_grad_h(const SphericalPSpinField& field, const Eigen::VectorXd& x);
double eval_a(const SphericalPSpinField& field, int i, int j, const Eigen::VectorXd& x);
Eigen::VectorXd eval_antisym(const SphericalPSpinField& field, const Eigen::VectorXd& x);

// Full field at a point with |x|^2 = n (off-sphere input rejected):
// f = c_s grad H + c_a f^a, lambda = (x, f)_n, F = -lambda x + f.
// lambda equals c_s p H(x) / n: the gradient part by homogeneity, while the
// antisymmetric part is orthogonal to x.
struct FieldValue {
    Eigen::VectorXd f;
    double lambda = 0.0;
    Eigen::VectorXd F;
};
FieldValue eval_field(const SphericalPSpinField& field, const Eigen::VectorXd& x);

// Exact covariance of the mixed field for x, y on the sphere of radius
// sqrt(n): M_kl = E[f_k(x) f_l(y)]
//             = delta_kl p o^{p-1} + tau p (p-1) (x_l y_k / n) o^{p-2},
// with o = (x,y)_n.
Eigen::MatrixXd covariance_oracle(int p, double tau, int n,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y);

} // namespace eqc
