#include "eqcount/complexity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eqc {

double log_potential(double tau, double u) {
    if (tau < 0.0 || tau > 1.0)
        throw std::invalid_argument("log_potential: tau must lie in [0,1]");
    double au = std::fabs(u);
    double edge = 1.0 + tau;
    if (au <= edge)
        return u * u / (2.0 * edge) - 0.5;
    // Outside the ellipse. With s = sqrt(u^2 - 4 tau) the correction term
    // |u|(|u|-s)/(4 tau) reduces to |u|/(|u|+s), which is exact at tau = 0
    // and avoids the cancellation in |u| - s for small tau.
    double s = std::sqrt(std::fmax(au * au - 4.0 * tau, 0.0));
    return au / (au + s) + std::log(0.5 * (au + s)) - 0.5;
}

double annealed_complexity(const ModelParams& mp, double u) {
    mp.require_valid();
    if (mp.tau < 0.0)
        throw std::invalid_argument("annealed_complexity: tau must be nonnegative");
    double p = mp.p;
    double scale = std::sqrt(p * (p - 1.0));
    return 0.5 + 0.5 * std::log(p - 1.0) - u * u / (2.0 * p * mp.alpha()) +
           log_potential(mp.tau, u / scale);
}

Thresholds thresholds(const ModelParams& mp) {
    mp.require_valid();
    if (mp.tau <= 0.0)
        throw std::invalid_argument("thresholds: tau must be positive");
    double p = mp.p;
    double tau = mp.tau;
    double alpha = mp.alpha();
    double lp = std::log(p - 1.0);

    Thresholds t;
    t.e_inf = (1.0 + tau) * std::sqrt(p * (p - 1.0));
    t.theta = 0.5 * lp - (p - 2.0) * (1.0 + tau) / (2.0 * alpha);
    t.tau_p = ((p - 2.0) - lp) / ((p - 1.0) * lp - (p - 2.0));
    t.u_th = std::sqrt((1.0 + tau) * lp * (p - 1.0) * p * alpha / (p - 2.0));

    // The annealed complexity is strictly decreasing on u > 0 from
    // (1/2) log(p-1) > 0 to -inf, so its positive zero is found by bisection.
    double lo = 0.0, hi = t.e_inf;
    while (annealed_complexity(mp, hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (annealed_complexity(mp, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    t.e_zero = 0.5 * (lo + hi);
    return t;
}

double overlap_entropy(int p, double r) {
    if (p < 3 || std::fabs(r) > 1.0)
        throw std::invalid_argument("overlap_entropy: need p >= 3 and |r| <= 1");
    // (1-r^2)/(1-r^{2p-2}) = 1 / sum_{j=0}^{p-2} r^{2j}; the sum form is exact
    // at r = +-1 where the ratio degenerates to 0/0.
    double q = r * r, qj = 1.0, s = 1.0;
    for (int j = 1; j <= p - 2; ++j) {
        qj *= q;
        s += qj;
    }
    return -0.5 * std::log(s);
}

std::array<double, 4> SigmaU::inverse() const {
    double c = 1.0 / (p_alpha * b);
    return {k1 * c, k2 * c, k2 * c, k1 * c};
}

std::array<double, 4> SigmaU::cov() const {
    double c = p_alpha * b / (k1 * k1 - k2 * k2);
    return {k1 * c, -k2 * c, -k2 * c, k1 * c};
}

SigmaU sigma_u(const ModelParams& mp, double r) {
    mp.require_valid();
    if (std::fabs(r) >= 1.0)
        throw std::invalid_argument("sigma_u: need |r| < 1");
    double p = mp.p, tau = mp.tau;
    double rp = std::pow(r, p);
    double rp2 = std::pow(r, p - 2.0); // r^{p-2}; p >= 3 so exponent >= 1
    double r2p2 = rp * rp2;            // r^{2p-2}
    double w = 1.0 - r * r;
    double d = 1.0 - r2p2;

    SigmaU s;
    s.p_alpha = p * mp.alpha();
    s.b = d * d - (p - 1.0) * (p - 1.0) * tau * tau * rp2 * rp2 * w * w;
    s.k1 = s.b + r2p2 * (d + tau * (p - 1.0) * w);
    s.k2 = -rp * d - tau * (p - 1.0) * rp * rp2 * rp2 * w; // r^{3p-4} = r^p r^{2p-4}
    return s;
}

double two_point_complexity(const ModelParams& mp, double r, double u1, double u2) {
    SigmaU s = sigma_u(mp, r);
    double p = mp.p;
    double scale = std::sqrt(p * (p - 1.0));
    double quad = (s.k1 * (u1 * u1 + u2 * u2) + 2.0 * s.k2 * u1 * u2) / (s.p_alpha * s.b);
    return 1.0 + std::log(p - 1.0) + overlap_entropy(mp.p, r) - 0.5 * quad +
           log_potential(mp.tau, u1 / scale) + log_potential(mp.tau, u2 / scale);
}

double g_factor(const ModelParams& mp, double r) {
    mp.require_valid();
    if (std::fabs(r) > 1.0)
        throw std::invalid_argument("g_factor: need |r| <= 1");
    double p = mp.p, tau = mp.tau;
    if (std::fabs(r) == 1.0) {
        // 0/0 at the endpoints; the limit below exists unless p is odd and
        // r = -1, where g diverges to -inf.
        if (r > 0.0 || mp.p % 2 == 0)
            return (p - 2.0) / (2.0 * (p - 1.0) * (1.0 + tau));
        return -std::numeric_limits<double>::infinity();
    }
    double rp2 = std::pow(r, p - 2.0);
    double rp = rp2 * r * r;
    double r2p2 = rp * rp2;
    return rp * (1.0 - rp2) / (1.0 - r2p2 + (p - 1.0) * tau * rp2 * (1.0 - r * r));
}

double q_function(const ModelParams& mp, double r, double u) {
    return overlap_entropy(mp.p, r) + u * u / (mp.p * mp.alpha()) * g_factor(mp, r);
}

} // namespace eqc
