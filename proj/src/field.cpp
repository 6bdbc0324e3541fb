#include "eqcount/field.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqc {

double CovarianceSpec::phi1(double x) const { return p * std::pow(x, p - 1); }

double CovarianceSpec::phi2(double x) const {
    return tau * p * (p - 1) * std::pow(x, p - 2);
}

double CovarianceSpec::phi3(double x) const { return phi1(x) + x * phi2(x); }

namespace {

// Sorted index tuples of length ord over {0..n-1} in lexicographic order,
// together with the number of distinct orderings of each tuple.
struct MonomialBasis {
    int ord = 0;
    std::vector<int> idx;       // count * ord
    std::vector<double> orbit;  // ord! / prod(multiplicity!)
};

MonomialBasis monomial_basis(int n, int ord) {
    MonomialBasis b;
    b.ord = ord;
    double fact = 1.0;
    for (int k = 2; k <= ord; ++k) fact *= k;
    std::vector<int> t(std::size_t(ord), 0);
    for (;;) {
        b.idx.insert(b.idx.end(), t.begin(), t.end());
        double denom = 1.0;
        int run = 1;
        for (std::size_t k = 1; k < t.size(); ++k) {
            if (t[k] == t[k - 1]) denom *= ++run;
            else run = 1;
        }
        b.orbit.push_back(fact / denom);
        int k = ord - 1;
        while (k >= 0 && t[std::size_t(k)] == n - 1) --k;
        if (k < 0) break;
        int v = ++t[std::size_t(k)];
        for (int j = k + 1; j < ord; ++j) t[std::size_t(j)] = v;
    }
    return b;
}

std::size_t pair_index(int i, int j, int n) {
    // (i, j) with i < j packed row-major over the strict upper triangle
    return std::size_t(i) * n - std::size_t(i) * (i + 1) / 2 + std::size_t(j - i - 1);
}

void check_point(const SphericalPSpinField& field, const Eigen::VectorXd& x,
                 const char* op) {
    if (field.p < 3 || field.n < 2)
        throw std::invalid_argument(std::string(op) + ": field is not initialized");
    if (x.size() != field.n)
        throw std::invalid_argument(std::string(op) + ": point has dimension " +
                                    std::to_string(x.size()) + ", field has n=" +
                                    std::to_string(field.n));
}

double spin_scale(int n, int ord) { return std::pow(double(n), -0.5 * (ord - 1)); }

// Values of all stored pairs A_ij(x), i < j, in storage order.
std::vector<double> pair_values(const SphericalPSpinField& field, const Eigen::VectorXd& x) {
    MonomialBasis b = monomial_basis(field.n, field.p - 2);
    double scale = spin_scale(field.n, field.p - 2);
    std::vector<double> vals(field.a_coeffs.size());
    for (std::size_t q = 0; q < vals.size(); ++q) {
        const std::vector<double>& c = field.a_coeffs[q];
        double acc = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            double m = c[k];
            for (int j = 0; j < b.ord; ++j) m *= x[b.idx[k * b.ord + j]];
            acc += m;
        }
        vals[q] = scale * acc;
    }
    return vals;
}

} // namespace

SphericalPSpinField sample_field(int p, double tau, int n, Rng& rng) {
    if (p < 3 || n < 2)
        throw std::invalid_argument("sample_field: need p >= 3 and n >= 2");
    if (!(tau <= 1.0) || 1.0 + (p - 1) * tau < 0.0)
        throw std::invalid_argument("sample_field: need -1/(p-1) <= tau <= 1");
    SphericalPSpinField f;
    f.p = p;
    f.n = n;
    f.tau = tau;
    f.c_s = std::sqrt((1.0 + (p - 1) * tau) / p);
    f.c_a = std::sqrt((p - 1) * (1.0 - tau));
    MonomialBasis hb = monomial_basis(n, p);
    f.h_coeffs.resize(hb.orbit.size());
    for (std::size_t k = 0; k < f.h_coeffs.size(); ++k)
        f.h_coeffs[k] = rng.next_gauss() * std::sqrt(hb.orbit[k]);
    MonomialBasis ab = monomial_basis(n, p - 2);
    f.a_coeffs.assign(std::size_t(n) * (n - 1) / 2, {});
    for (std::vector<double>& block : f.a_coeffs) {
        block.resize(ab.orbit.size());
        for (std::size_t k = 0; k < block.size(); ++k)
            block[k] = rng.next_gauss() * std::sqrt(ab.orbit[k]);
    }
    return f;
}

double eval_h(const SphericalPSpinField& field, const Eigen::VectorXd& x) {
    check_point(field, x, "eval_h");
    MonomialBasis b = monomial_basis(field.n, field.p);
    double acc = 0.0;
    for (std::size_t k = 0; k < field.h_coeffs.size(); ++k) {
        double m = field.h_coeffs[k];
        for (int j = 0; j < b.ord; ++j) m *= x[b.idx[k * b.ord + j]];
        acc += m;
    }
    return spin_scale(field.n, field.p) * acc;
}

Eigen::VectorXd eval_grad_h(const SphericalPSpinField& field, const Eigen::VectorXd& x) {
    check_point(field, x, "eval_grad_h");
    MonomialBasis b = monomial_basis(field.n, field.p);
    const int ord = b.ord;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(field.n);
    std::array<double, 8> pre, suf;
    for (std::size_t k = 0; k < field.h_coeffs.size(); ++k) {
        const int* t = &b.idx[k * std::size_t(ord)];
        pre[0] = 1.0;
        for (int j = 0; j < ord; ++j) pre[std::size_t(j) + 1] = pre[std::size_t(j)] * x[t[j]];
        suf[std::size_t(ord)] = 1.0;
        for (int j = ord - 1; j >= 0; --j) suf[std::size_t(j)] = suf[std::size_t(j) + 1] * x[t[j]];
        double c = field.h_coeffs[k];
        for (int q = 0; q < ord; ++q)
            g[t[q]] += c * pre[std::size_t(q)] * suf[std::size_t(q) + 1];
    }
    return spin_scale(field.n, field.p) * g;
}

double eval_a(const SphericalPSpinField& field, int i, int j, const Eigen::VectorXd& x) {
    check_point(field, x, "eval_a");
    if (i < 0 || j < 0 || i >= field.n || j >= field.n)
        throw std::invalid_argument("eval_a: pair index out of range");
    if (i == j) return 0.0;
    if (i > j) return -eval_a(field, j, i, x);
    MonomialBasis b = monomial_basis(field.n, field.p - 2);
    const std::vector<double>& c = field.a_coeffs[pair_index(i, j, field.n)];
    double acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        double m = c[k];
        for (int q = 0; q < b.ord; ++q) m *= x[b.idx[k * std::size_t(b.ord) + q]];
        acc += m;
    }
    return spin_scale(field.n, field.p - 2) * acc;
}

Eigen::VectorXd eval_antisym(const SphericalPSpinField& field, const Eigen::VectorXd& x) {
    check_point(field, x, "eval_antisym");
    std::vector<double> vals = pair_values(field, x);
    Eigen::VectorXd fa = Eigen::VectorXd::Zero(field.n);
    std::size_t q = 0;
    for (int i = 0; i < field.n; ++i) {
        for (int j = i + 1; j < field.n; ++j, ++q) {
            fa[i] += vals[q] * x[j];
            fa[j] -= vals[q] * x[i];
        }
    }
    return fa / double(field.n);
}

FieldValue eval_field(const SphericalPSpinField& field, const Eigen::VectorXd& x) {
    check_point(field, x, "eval_field");
    double nn = double(field.n);
    if (std::abs(x.squaredNorm() - nn) >= 1e-9 * nn)
        throw std::invalid_argument("eval_field: x is off the sphere of radius sqrt(n)");
    FieldValue out;
    out.f = field.c_s * eval_grad_h(field, x);
    if (field.c_a != 0.0) out.f += field.c_a * eval_antisym(field, x);
    out.lambda = x.dot(out.f) / nn;
    out.F = out.f - out.lambda * x;
    return out;
}

Eigen::MatrixXd covariance_oracle(int p, double tau, int n, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) {
    if (p < 3 || n < 1)
        throw std::invalid_argument("covariance_oracle: need p >= 3 and n >= 1");
    if (x.size() != n || y.size() != n)
        throw std::invalid_argument("covariance_oracle: points must have dimension n");
    double o = x.dot(y) / n;
    double diag = p * std::pow(o, p - 1);
    double cross = tau * p * (p - 1) * std::pow(o, p - 2) / n;
    Eigen::MatrixXd m(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            m(k, l) = (k == l ? diag : 0.0) + cross * x[l] * y[k];
    return m;
}

} // namespace eqc
