#include "eqcount/counting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "eqcount/complexity.hpp"
#include "eqcount/conditional.hpp"
#include "eqcount/ensemble.hpp"
#include "eqcount/kernel.hpp"
#include "eqcount/mc.hpp"
#include "eqcount/numeric.hpp"
#include "eqcount/parallel.hpp"
#include "eqcount/quadrature.hpp"

namespace eqc {

namespace {

constexpr std::uint64_t kStreamCircle = 15;
constexpr std::uint64_t kStreamPair = 16;

double circle_g(const SphericalPSpinField& field, double theta) {
    Eigen::VectorXd x(2);
    x << std::sqrt(2.0) * std::cos(theta), std::sqrt(2.0) * std::sin(theta);
    FieldValue ev = eval_field(field, x);
    return std::cos(theta) * ev.F[1] - std::sin(theta) * ev.F[0];
}

// E|Z - shift| for Z ~ N(0, sigma^2)
double folded_abs_mean(double shift, double sigma) {
    double t = shift / sigma;
    double pdf = std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
    return sigma * (2.0 * pdf + t * std::erf(t / std::sqrt(2.0)));
}

// E|det(A_m - shift I)|, A_m from GEE(m, tau)
double abs_det_mean(const ModelParams& mp, int m, double shift, std::int64_t samples,
                    std::uint64_t seed) {
    if (m == 1) return folded_abs_mean(shift, std::sqrt(1.0 + mp.tau));
    if (m >= 3 && m <= 9) {
        SignLog sl = moment_via_kernel(m, mp.tau, {shift});
        return sl.sign * std::exp(sl.log_mag);
    }
    McEstimate est = estimate_abs_det_moment(m, mp.tau, shift, 1, samples, seed);
    return std::exp(est.log_mean);
}

} // namespace

CircleScan scan_equilibria_circle(const SphericalPSpinField& field, int grid) {
    if (field.n != 2)
        throw std::invalid_argument("scan_equilibria_circle: needs an n=2 field");
    if (grid < 16)
        throw std::invalid_argument("scan_equilibria_circle: grid is too coarse");
    const double two_pi = 2.0 * M_PI;
    CircleScan out;
    std::vector<double> g(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        g[std::size_t(i)] = circle_g(field, two_pi * i / grid);
        if (g[std::size_t(i)] == 0.0) {
            out.degenerate = true;
            return out;
        }
    }
    for (int i = 0; i < grid; ++i) {
        double fa = g[std::size_t(i)];
        double fb = (i + 1 < grid) ? g[std::size_t(i) + 1] : g[0];
        if ((fa < 0.0) == (fb < 0.0)) continue;
        double lo = two_pi * i / grid, hi = two_pi * (i + 1) / grid;
        double flo = fa;
        while (hi - lo > 1e-12) {
            double mid = 0.5 * (lo + hi);
            double fm = circle_g(field, mid);
            if (fm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.zeros.push_back(0.5 * (lo + hi));
        out.slopes.push_back(fa < 0.0 ? 1 : -1);
    }
    return out;
}

int count_equilibria_circle(const SphericalPSpinField& field) {
    CircleScan s = scan_equilibria_circle(field);
    if (s.degenerate)
        throw std::runtime_error(
            "count_equilibria_circle: degenerate tangency, sample must be discarded");
    return int(s.zeros.size());
}

CircleBatch mean_circle_count(int p, double tau, int fields, std::uint64_t seed) {
    if (fields < 2)
        throw std::invalid_argument("mean_circle_count: need at least 2 fields");
    struct Row {
        int count = 0;
        int stable = 0;
        bool degenerate = false;
    };
    Rng base(seed, kStreamCircle);
    std::vector<Row> rows =
        detail::sample_map<Row>(fields, base, [&](std::int64_t, Rng& r) {
            SphericalPSpinField f = sample_field(p, tau, 2, r);
            CircleScan s = scan_equilibria_circle(f);
            Row row;
            row.degenerate = s.degenerate;
            if (!s.degenerate) {
                row.count = int(s.zeros.size());
                for (int sl : s.slopes)
                    if (sl < 0) ++row.stable;
            }
            return row;
        });
    CircleBatch out;
    out.seed = seed;
    for (const Row& row : rows) {
        if (row.degenerate) {
            ++out.discarded;
            continue;
        }
        out.counts.push_back(row.count);
        out.stable_counts.push_back(row.stable);
    }
    if (out.counts.size() < 2)
        throw std::runtime_error("mean_circle_count: too many degenerate samples");
    std::vector<double> c(out.counts.begin(), out.counts.end());
    MeanVar mc = mean_var(c);
    out.mean_count = mc.mean;
    out.stderr_count = mc.stderr_mean;
    std::vector<double> st(out.stable_counts.begin(), out.stable_counts.end());
    MeanVar ms = mean_var(st);
    out.mean_stable = ms.mean;
    out.stderr_stable = ms.stderr_mean;
    return out;
}

bool band_contains(const Band& b, double u) {
    for (const Interval& iv : b)
        if (iv.lo < u && u < iv.hi) return true;
    return false;
}

double log_sphere_volume(int l) {
    if (l < 1) throw std::invalid_argument("log_sphere_volume: need l >= 1");
    return std::log(2.0) + 0.5 * l * std::log(M_PI) - std::lgamma(0.5 * l);
}

double expected_crit_first_moment(const ModelParams& mp, int n, const Band& b,
                                  std::int64_t samples, std::uint64_t seed) {
    mp.require_valid();
    if (n < 2)
        throw std::invalid_argument("expected_crit_first_moment: need n >= 2");
    for (const Interval& iv : b)
        if (!(iv.lo <= iv.hi))
            throw std::invalid_argument("expected_crit_first_moment: interval with lo > hi");
    if (b.empty()) return 0.0;

    const int m = n - 1;
    const double var = mp.p * mp.alpha() / n;
    const double cut = 10.0 * std::sqrt(var);
    const double log_cbar =
        log_sphere_volume(n) +
        0.5 * (n - 1) * std::log((n - 1) * (mp.p - 1) / (2.0 * M_PI));
    auto density = [&](double u) {
        return std::exp(-0.5 * u * u / var) / std::sqrt(2.0 * M_PI * var);
    };

    double total = 0.0;
    const bool exact_inner = (m == 1) || (m >= 3 && m <= 9);
    for (std::size_t k = 0; k < b.size(); ++k) {
        double lo = std::max(b[k].lo, -cut);
        double hi = std::min(b[k].hi, cut);
        if (!(lo < hi)) continue;
        if (exact_inner) {
            total += integrate(
                [&](double u) {
                    return abs_det_mean(mp, m, u_hat(mp, n, u), samples, 0) * density(u);
                },
                lo, hi, 1e-10, 1e-8);
        } else {
            // the inner expectation is stochastic here, so adaptive panels
            // would chase noise: fixed composite Simpson with one substream
            // per node keeps the result deterministic
            const int panels = 64;
            const double h = (hi - lo) / panels;
            double acc = 0.0;
            for (int j = 0; j <= 2 * panels; ++j) {
                double u = lo + 0.5 * h * j;
                double w = (j == 0 || j == 2 * panels) ? 1.0 : (j % 2 ? 4.0 : 2.0);
                std::uint64_t node =
                    seed ^ (0x6a09e667f3bcc909ULL + (std::uint64_t(k) << 32) +
                            std::uint64_t(j) * 0x100000001b3ULL);
                acc += w * abs_det_mean(mp, m, u_hat(mp, n, u), samples, node) * density(u);
            }
            total += acc * h / 6.0;
        }
    }
    return std::exp(log_cbar) * total;
}

double pair_overlap_prefactor(const ModelParams& mp, int n, double r) {
    mp.require_valid();
    if (!(std::abs(r) < 1.0))
        throw std::invalid_argument("pair_overlap_prefactor: need |r| < 1");
    double g = overlap_g(mp, r);
    double w = std::exp((n - 2) * overlap_entropy(mp.p, r));
    return w / std::sqrt((1.0 - r * r) * (1.0 - g * g));
}

IntegrandEstimate second_moment_integrand(const ModelParams& mp, int n, double r,
                                          const Band& b, std::int64_t samples,
                                          std::uint64_t seed) {
    mp.require_valid();
    if (n < 3 || n > 20)
        throw std::invalid_argument("second_moment_integrand: need 3 <= n <= 20");
    if (!(std::abs(r) < 1.0))
        throw std::invalid_argument("second_moment_integrand: need |r| < 1");
    if (samples < 100)
        throw std::invalid_argument("second_moment_integrand: need samples >= 100");
    for (const Interval& iv : b)
        if (!(iv.lo <= iv.hi))
            throw std::invalid_argument("second_moment_integrand: interval with lo > hi");

    IntegrandEstimate out;
    out.samples = samples;
    out.seed = seed;
    if (b.empty()) return out;

    const double log_c =
        log_sphere_volume(n) + log_sphere_volume(n - 1) +
        (n - 1) * std::log((n - 1) * (mp.p - 1) / (2.0 * M_PI));
    const double pref = std::exp(log_c) * pair_overlap_prefactor(mp, n, r);

    Eigen::Matrix2d su;
    {
        std::array<double, 4> c = sigma_u(mp, r).cov();
        su << c[0], c[1], c[2], c[3];
    }
    Eigen::MatrixXd root = psd_sqrt(Eigen::MatrixXd(su / double(n)));

    Rng base(seed, kStreamPair);
    std::vector<double> logs =
        detail::sample_map<double>(samples, base, [&](std::int64_t, Rng& rg) {
            double g1 = rg.next_gauss(), g2 = rg.next_gauss();
            double u1 = root(0, 0) * g1 + root(0, 1) * g2;
            double u2 = root(1, 0) * g1 + root(1, 1) * g2;
            if (!band_contains(b, u1) || !band_contains(b, u2))
                return -std::numeric_limits<double>::infinity();
            ConditionalJacobianPair pr = conditional_pair_sample(mp, n, r, u1, u2, rg);
            return log_det_abs(pr.m1, 0.0) + log_det_abs(pr.m2, 0.0);
        });

    double mx = -std::numeric_limits<double>::infinity();
    for (double l : logs) mx = std::max(mx, l);
    if (!std::isfinite(mx)) return out;  // nothing landed in the band
    std::vector<double> vals(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i)
        vals[i] = std::isfinite(logs[i]) ? std::exp(logs[i] - mx) : 0.0;
    MeanVar mv = mean_var(vals);
    double scale = pref * std::exp(mx);
    out.value = scale * mv.mean;
    out.stderr_value = scale * mv.stderr_mean;
    return out;
}

} // namespace eqc
