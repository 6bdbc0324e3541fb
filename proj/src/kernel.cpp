#include "eqcount/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "eqcount/quadrature.hpp"

namespace eqc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kSqrt2Pi = 2.5066282746310005024;

void check_kernel_args(int n, double tau, const char* who) {
    if (n < 3)
        throw std::invalid_argument(std::string(who) + ": need n >= 3");
    if (!(tau >= 0.0 && tau < 1.0))
        throw std::invalid_argument(std::string(who) + ": need 0 <= tau < 1");
}

// log c_m = log Phi_m(+inf), m even
double log_c_const(int m, double tau) {
    return 0.5 * (kLog2Pi + std::log1p(tau)) + std::lgamma(m + 1.0) -
           0.5 * m * std::log(2.0) - std::lgamma(0.5 * m + 1.0);
}

// One-argument state of the S-channel: everything that depends on the first
// (derivative-carrying) argument X, so that sweeps over the second argument
// cost one u_k recurrence each. The per-order constants fold the factorials
// of the raw kernel display into the normalized u_k basis through lgamma.
struct SCache {
    int n;
    double tau;
    double X;
    bool even;
    std::vector<double> u, du;     // u_k(X), u_k'(X), k = 0..n-1
    double phi_lo = 0.0;           // even: Phi-hat_{n-2}(X); odd: Phi-hat_{n-3}(X)
    double phi_hi = 0.0;           // odd: Phi-hat_{n-1}(X)
    double a_even = 0.0;           // even Phi-term constant
    double b2 = 0.0, b3 = 0.0;     // odd Phi-pair constants
    double b4 = 0.0, b5 = 0.0;     // odd Hermite-sum / constant-term constants
    double t4 = 0.0, dt4 = 0.0;    // odd: sum_j u_{2j}(X) r_j and its X-derivative
};

SCache make_scache(int n, double tau, double X) {
    SCache c;
    c.n = n;
    c.tau = tau;
    c.X = X;
    c.even = (n % 2 == 0);
    weighted_hermite_seq(n - 1, tau, X, c.u, &c.du);
    double lt = std::log1p(tau);
    if (c.even) {
        c.phi_lo = phi_big_normalized(n - 2, tau, X);
        c.a_even = std::exp(0.5 * std::lgamma(n) + log_c_const(n - 2, tau) -
                            std::log(2.0) - 0.5 * kLog2Pi - lt - std::lgamma(n - 1.0));
    } else {
        int m = (n - 1) / 2;
        c.phi_lo = phi_big_normalized(n - 3, tau, X);
        c.phi_hi = phi_big_normalized(n - 1, tau, X);
        c.b2 = std::exp(0.5 * std::lgamma(n - 1.0) + log_c_const(n - 3, tau) -
                        std::log(2.0) - 0.5 * kLog2Pi - lt - std::lgamma(n - 2.0));
        c.b3 = std::exp(0.5 * std::lgamma(n - 1.0) + log_c_const(n - 1, tau) -
                        std::log(2.0) - 0.5 * kLog2Pi - lt - std::lgamma(n - 1.0));
        c.b4 = std::exp(std::lgamma(m + 1.0) + m * std::log(2.0) -
                        0.5 * kLog2Pi - 0.5 * std::lgamma(n));
        c.b5 = std::exp(std::lgamma(m + 1.0) + m * std::log(2.0) -
                        0.5 * (kLog2Pi + lt) - 0.5 * std::lgamma(n));
        for (int j = 0; 2 * j <= n - 3; ++j) {
            double rj = std::exp(0.5 * std::lgamma(2.0 * j + 1.0) -
                                 std::lgamma(j + 1.0) - j * std::log(2.0));
            c.t4 += c.u[2 * j] * rj;
            c.dt4 += c.du[2 * j] * rj;
        }
    }
    return c;
}

// S(X, Y) with the X side cached; uy is scratch for the Y-side recurrence.
double sbar_eval(const SCache& c, double Y, std::vector<double>& uy) {
    weighted_hermite_seq(c.n - 1, c.tau, Y, uy);
    int top = c.even ? c.n - 2 : c.n - 3;
    double s = 0.0;
    for (int k = 0; k <= top; ++k) s += c.u[k] * uy[k];
    s /= kSqrt2Pi;
    if (c.even) return s + c.a_even * c.phi_lo * uy[c.n - 1];
    return s + uy[c.n - 2] * (c.b2 * c.phi_lo - c.b3 * c.phi_hi) +
           uy[c.n - 1] * (c.b5 - c.b4 * c.t4);
}

// dS/dX; the Phi derivatives collapse to single u products.
double dbar_eval(const SCache& c, double Y, std::vector<double>& uy) {
    weighted_hermite_seq(c.n - 1, c.tau, Y, uy);
    int n = c.n;
    int top = c.even ? n - 2 : n - 3;
    double s = 0.0;
    for (int k = 0; k <= top; ++k) s += c.du[k] * uy[k];
    double opt = 1.0 + c.tau;
    if (c.even)
        return (s + std::sqrt(n - 1.0) / opt * c.u[n - 2] * uy[n - 1]) / kSqrt2Pi;
    return (s + (std::sqrt(n - 2.0) * c.u[n - 3] - std::sqrt(n - 1.0) * c.u[n - 1]) / opt * uy[n - 2]) /
               kSqrt2Pi -
           c.b4 * c.dt4 * uy[n - 1];
}

double ibar_eval(const SCache& c, double Y) {
    if (Y == c.X) return 0.0;
    std::vector<double> scratch;
    double integral = integrate([&](double z) { return sbar_eval(c, z, scratch); },
                                c.X, Y, 1e-13, 1e-11);
    return (Y > c.X ? 0.5 : -0.5) - integral;
}

int sign_factor(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

SignLog pf_expand(const std::vector<double>& m, int dim, std::vector<int>& idx) {
    if (idx.empty()) return SignLog::one();
    if (idx.size() == 2) return SignLog::from_value(m[idx[0] * dim + idx[1]]);
    SignLog total = SignLog::zero();
    double sgn = 1.0;
    std::vector<int> rest(idx.size() - 2);
    for (std::size_t t = 1; t < idx.size(); ++t) {
        double a = m[idx[0] * dim + idx[t]];
        if (a != 0.0) {
            std::size_t w = 0;
            for (std::size_t r = 1; r < idx.size(); ++r)
                if (r != t) rest[w++] = idx[r];
            total = total + SignLog::from_value(sgn * a) * pf_expand(m, dim, rest);
        }
        sgn = -sgn;
    }
    return total;
}

} // namespace

SignLog hermite_c(int k, double tau, double x) {
    if (k < 0 || !(tau >= 0.0 && tau <= 1.0))
        throw std::invalid_argument("hermite_c: need k >= 0 and 0 <= tau <= 1");
    // run the recurrence on C~_k with the weight carried as a log offset and
    // a running rescale, so any (k, x) stays representable
    double off = -x * x / (2.0 * (1.0 + tau));
    if (k == 0) return {1.0, off};
    double a = 1.0, b = x;
    for (int j = 1; j < k; ++j) {
        double c = (x * b - tau * std::sqrt(double(j)) * a) / std::sqrt(j + 1.0);
        a = b;
        b = c;
        double mag = std::fmax(std::fabs(a), std::fabs(b));
        if (mag > 1e150 || (mag > 0.0 && mag < 1e-150)) {
            a /= mag;
            b /= mag;
            off += std::log(mag);
        }
    }
    if (b == 0.0) return SignLog::zero();
    return {b > 0 ? 1.0 : -1.0, std::log(std::fabs(b)) + off};
}

void weighted_hermite_seq(int kmax, double tau, double x,
                          std::vector<double>& u, std::vector<double>* deriv) {
    if (kmax < 0) throw std::invalid_argument("weighted_hermite_seq: need kmax >= 0");
    u.resize(kmax + 1);
    double opt = 1.0 + tau;
    u[0] = std::exp(-x * x / (2.0 * opt));
    if (kmax >= 1) u[1] = x * u[0];
    for (int k = 1; k < kmax; ++k)
        u[k + 1] = (x * u[k] - tau * std::sqrt(double(k)) * u[k - 1]) / std::sqrt(k + 1.0);
    if (deriv) {
        deriv->resize(kmax + 1);
        (*deriv)[0] = -x / opt * u[0];
        for (int k = 1; k <= kmax; ++k)
            (*deriv)[k] = std::sqrt(double(k)) * u[k - 1] - x / opt * u[k];
    }
}

double mehler_sum(double rho, double x, double y, int kmax) {
    if (kmax < 0 || std::fabs(rho) >= 1.0)
        throw std::invalid_argument("mehler_sum: need kmax >= 0 and |rho| < 1");
    // normalized h_k = H_k / sqrt(2^k k!):
    // h_{k+1} = (sqrt(2) x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)
    std::vector<double> terms(kmax + 1);
    double hx0 = 1.0, hy0 = 1.0;
    double hx1 = std::sqrt(2.0) * x, hy1 = std::sqrt(2.0) * y;
    double rp = 1.0;
    terms[0] = 1.0;
    for (int k = 1; k <= kmax; ++k) {
        rp *= rho;
        terms[k] = rp * hx1 * hy1;
        double hx2 = (std::sqrt(2.0) * x * hx1 - std::sqrt(double(k)) * hx0) / std::sqrt(k + 1.0);
        double hy2 = (std::sqrt(2.0) * y * hy1 - std::sqrt(double(k)) * hy0) / std::sqrt(k + 1.0);
        hx0 = hx1;
        hx1 = hx2;
        hy0 = hy1;
        hy1 = hy2;
    }
    return pairwise_sum(terms);
}

double mehler_closed(double rho, double x, double y) {
    double v = 1.0 - rho * rho;
    return std::exp(-(rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / v) / std::sqrt(v);
}

double phi_big_normalized(int n, double tau, double x) {
    if (n < 0 || n % 2 != 0)
        throw std::invalid_argument("phi_big: even n >= 0 required");
    if (!(tau >= 0.0 && tau < 1.0))
        throw std::invalid_argument("phi_big: need 0 <= tau < 1");
    if (x == 0.0) return 0.0;
    // Phi_n / c_n = (2 sqrt(n!) / c_n) int_0^x u_n(t) dt: odd in x, in [-1,1],
    // no cancellation against the limit constant
    double g = std::exp(0.5 * std::lgamma(n + 1.0) + std::log(2.0) - log_c_const(n, tau));
    std::vector<double> scratch;
    double v = integrate(
        [&](double t) {
            weighted_hermite_seq(n, tau, t, scratch);
            return g * scratch[n];
        },
        0.0, x, 5e-14, 1e-12);
    return v;
}

double log_phi_big_limit(int n, double tau) {
    if (n < 0 || n % 2 != 0)
        throw std::invalid_argument("phi_big: even n >= 0 required");
    return log_c_const(n, tau);
}

SignLog phi_big(int n, double tau, double x) {
    double r = phi_big_normalized(n, tau, x);
    if (r == 0.0) return SignLog::zero();
    return {r > 0 ? 1.0 : -1.0, std::log(std::fabs(r)) + log_c_const(n, tau)};
}

double kernel_s_unscaled(int n, double tau, double X, double Y) {
    check_kernel_args(n, tau, "kernel_s");
    SCache c = make_scache(n, tau, X);
    std::vector<double> scratch;
    return sbar_eval(c, Y, scratch);
}

double kernel_d_unscaled(int n, double tau, double X, double Y) {
    check_kernel_args(n, tau, "kernel_d");
    SCache c = make_scache(n, tau, X);
    std::vector<double> scratch;
    return dbar_eval(c, Y, scratch);
}

double kernel_i_unscaled(int n, double tau, double X, double Y) {
    check_kernel_args(n, tau, "kernel_i");
    SCache c = make_scache(n, tau, X);
    return ibar_eval(c, Y);
}

double kernel_s(int n, double tau, double x, double y) {
    double rt = std::sqrt(double(n));
    return kernel_s_unscaled(n, tau, rt * x, rt * y);
}

KernelBlock kernel_block(int n, double tau, double x, double y) {
    check_kernel_args(n, tau, "kernel_block");
    double rt = std::sqrt(double(n));
    double X = rt * x, Y = rt * y;
    SCache cx = make_scache(n, tau, X);
    SCache cy = make_scache(n, tau, Y);
    std::vector<double> scratch;
    KernelBlock b;
    b.s = sbar_eval(cx, Y, scratch);
    b.st = sbar_eval(cy, X, scratch);
    b.d = rt * dbar_eval(cx, Y, scratch);
    b.i = ibar_eval(cx, Y) / rt;
    return b;
}

KernelBlock kernel_asymptotic(double tau, double xi, double eta) {
    if (!(tau >= 0.0 && tau < 1.0))
        throw std::invalid_argument("kernel_asymptotic: need 0 <= tau < 1");
    double v = 1.0 - tau * tau;
    double d = xi - eta;
    KernelBlock b;
    b.s = std::exp(-d * d / (2.0 * v)) / std::sqrt(2.0 * M_PI * v);
    b.st = b.s;
    b.d = -d / v * b.s;
    b.i = 0.5 * sign_factor(eta - xi) - 0.5 * std::erf((eta - xi) / std::sqrt(2.0 * v));
    return b;
}

double kernel_residual(int n, double tau, double x, double y) {
    check_kernel_args(n, tau, "kernel_residual");
    double rt = std::sqrt(double(n));
    double X = rt * x, Y = rt * y;
    SCache cx = make_scache(n, tau, X);
    SCache cy = make_scache(n, tau, Y);
    std::vector<double> scratch;
    KernelBlock lim = kernel_asymptotic(tau, X, Y);
    double es = sbar_eval(cx, Y, scratch) - lim.s;
    double est = sbar_eval(cy, X, scratch) - lim.st;
    double ed = dbar_eval(cx, Y, scratch) - lim.d;
    double ei = ibar_eval(cx, Y) - lim.i;
    return std::sqrt(es * es + est * est + ed * ed + ei * ei);
}

SignLog pfaffian(const std::vector<double>& a, int dim) {
    if (dim < 2 || dim % 2 != 0)
        throw std::invalid_argument("pfaffian: even dimension >= 2 required");
    if (a.size() != std::size_t(dim) * std::size_t(dim))
        throw std::invalid_argument("pfaffian: size mismatch");
    std::vector<double> m(a.size());
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            m[i * dim + j] = 0.5 * (a[i * dim + j] - a[j * dim + i]);
    std::vector<int> idx(dim);
    for (int i = 0; i < dim; ++i) idx[i] = i;
    return pf_expand(m, dim, idx);
}

SignLog real_correlation_sl(int n, double tau, const std::vector<double>& points) {
    int l = int(points.size());
    if (l < 1 || l > 6)
        throw std::invalid_argument("real_correlation: need 1 <= l <= 6 points");
    check_kernel_args(n, tau, "real_correlation");
    if (n < l + 3)
        throw std::invalid_argument("real_correlation: need n >= l + 3");
    for (int i = 0; i < l; ++i)
        for (int j = i + 1; j < l; ++j)
            if (points[i] == points[j])
                throw std::invalid_argument("real_correlation: points must be distinct");

    double rt = std::sqrt(double(n));
    std::vector<SCache> cache;
    cache.reserve(l);
    for (int i = 0; i < l; ++i) cache.push_back(make_scache(n, tau, rt * points[i]));

    int dim = 2 * l;
    std::vector<double> m(std::size_t(dim) * dim, 0.0);
    std::vector<double> scratch;
    for (int i = 0; i < l; ++i) {
        for (int j = i; j < l; ++j) {
            double Y = rt * points[j];
            double s = sbar_eval(cache[i], Y, scratch);
            double st = (i == j) ? s : sbar_eval(cache[j], cache[i].X, scratch);
            double d = dbar_eval(cache[i], Y, scratch);
            double iv = (i == j) ? 0.0 : ibar_eval(cache[i], Y);
            int r = 2 * i, c = 2 * j;
            m[r * dim + c] = -iv;
            m[r * dim + c + 1] = s;
            m[(r + 1) * dim + c] = -st;
            m[(r + 1) * dim + c + 1] = d;
            if (i != j) { // reflect: block(j,i) = -block(i,j)^T
                m[c * dim + r] = iv;
                m[c * dim + r + 1] = st;
                m[(c + 1) * dim + r] = -s;
                m[(c + 1) * dim + r + 1] = -d;
            }
        }
    }
    SignLog pf = pfaffian(m, dim);
    return pf * SignLog{1.0, 0.5 * l * std::log(double(n))};
}

double real_correlation(int n, double tau, const std::vector<double>& points) {
    return real_correlation_sl(n, tau, points).value();
}

MomentConstants ensemble_constants(int n, int ell, double tau) {
    if (n < 1 || ell < 1)
        throw std::invalid_argument("ensemble_constants: need n >= 1 and ell >= 1");
    auto log_k = [tau](int m) {
        double s = 0.0;
        for (int j = 1; j <= m; ++j) s += std::lgamma(0.5 * j);
        return -0.25 * m * (m + 1.0) * std::log(double(m)) + 0.5 * m * std::log1p(tau) +
               0.25 * m * (m + 1.0) * std::log(2.0) + s;
    };
    MomentConstants out;
    out.log_k = log_k(n);
    out.log_d = log_k(n + ell) - out.log_k +
                (0.5 * n + 0.25 * (n + ell) * (n + ell - 1.0)) * std::log((n + ell) / double(n));
    return out;
}

SignLog moment_via_kernel(int n, double tau, const std::vector<double>& mus) {
    int l = int(mus.size());
    if (l < 1 || l > 4)
        throw std::invalid_argument("moment_via_kernel: need 1 <= l <= 4 points");
    for (int i = 0; i + 1 < l; ++i)
        if (!(mus[i] > mus[i + 1]))
            throw std::invalid_argument("moment_via_kernel: mus must be strictly descending");
    MomentConstants mc = ensemble_constants(n, l, tau);
    double shrink = std::sqrt(n / double(n + l));
    std::vector<double> scaled(mus.size());
    for (int i = 0; i < l; ++i) scaled[i] = shrink * mus[i];
    SignLog rho = real_correlation_sl(n + l, tau, scaled);

    double sum_sq = 0.0, log_delta = 0.0;
    for (int i = 0; i < l; ++i) {
        sum_sq += mus[i] * mus[i];
        for (int j = i + 1; j < l; ++j) log_delta += std::log(std::fabs(mus[i] - mus[j]));
    }
    double log_factor = mc.log_d + n * sum_sq / (2.0 * (1.0 + tau)) - log_delta;
    return rho * SignLog{1.0, log_factor};
}

} // namespace eqc
