#include "eqcount/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "eqcount/conditional.hpp"
#include "eqcount/ensemble.hpp"
#include "eqcount/kernel.hpp"
#include "eqcount/numeric.hpp"
#include "eqcount/parallel.hpp"
#include "eqcount/quadrature.hpp"

namespace eqc {

int worker_count() {
    const char* s = std::getenv("EQCOUNT_THREADS");
    if (s && *s) {
        int v = std::atoi(s);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 1;
}

namespace {

// Disjoint base streams per estimator, so one seed never aliases across ops.
constexpr std::uint64_t kStreamDet = 11;
constexpr std::uint64_t kStreamRatio = 12;
constexpr std::uint64_t kStreamDensity = 13;
constexpr std::uint64_t kStreamDelta = 14;

using detail::sample_map;

struct DetSample {
    double log_det;
    double s_min;
};

DetSample det_sample(int n, double tau, double x, Rng& rng) {
    GeeMatrix a = sample_gee(n, tau, rng);
    EmpiricalMeasure em = singular_spectrum(a.entries, x);
    double tol = em.atoms.back() * double(em.atoms.size()) *
                 std::numeric_limits<double>::epsilon();
    double acc = 0.0;
    for (double s : em.atoms) {
        if (s <= tol)
            return {-std::numeric_limits<double>::infinity(), em.atoms.front()};
        acc += std::log(s);
    }
    return {acc, em.atoms.front()};
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double xm = pairwise_sum(xs) / double(n);
    double ym = pairwise_sum(ys) / double(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - xm) * (ys[i] - ym);
        sxx += (xs[i] - xm) * (xs[i] - xm);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

} // namespace

McEstimate estimate_abs_det_moment(int n, double tau, double x, int ell,
                                   std::int64_t samples, std::uint64_t seed) {
    if (n < 1 || ell < 0 || samples < 100)
        throw std::invalid_argument(
            "estimate_abs_det_moment: need n >= 1, ell >= 0, samples >= 100");
    McEstimate out;
    out.samples = samples;
    out.seed = seed;
    if (ell == 0) return out;  // |det|^0 == 1 exactly
    Rng base(seed, kStreamDet);
    std::vector<double> logs = sample_map<double>(samples, base, [&](std::int64_t, Rng& r) {
        return double(ell) * det_sample(n, tau, x, r).log_det;
    });
    bool any_finite = false;
    for (double v : logs)
        if (std::isfinite(v)) {
            any_finite = true;
            break;
        }
    if (!any_finite)
        throw std::runtime_error("estimate_abs_det_moment: every sample was singular");
    LogMeanEstimate lm = log_mean_exp(logs);
    out.log_mean = lm.log_mean;
    out.stderr_of_log = lm.stderr_log;
    return out;
}

double small_singular_fraction(int n, double tau, double x, std::int64_t samples,
                               std::uint64_t seed, double threshold) {
    if (n < 1 || samples < 1)
        throw std::invalid_argument("small_singular_fraction: need n >= 1 and samples >= 1");
    Rng base(seed, kStreamDet);
    std::vector<double> flags = sample_map<double>(samples, base, [&](std::int64_t, Rng& r) {
        return det_sample(n, tau, x, r).s_min < threshold ? 1.0 : 0.0;
    });
    return pairwise_sum(flags) / double(samples);
}

MomentRatioScan moment_ratio_scan(const std::vector<int>& n_list, double tau, double x,
                                  int ell, std::int64_t samples, std::uint64_t seed) {
    if (n_list.empty() || ell < 1 || samples < 100)
        throw std::invalid_argument(
            "moment_ratio_scan: need a nonempty size list, ell >= 1, samples >= 100");
    if (x == 1.0 + tau || x == -(1.0 + tau))
        throw std::invalid_argument("moment_ratio_scan: x at the spectral edge is excluded");
    MomentRatioScan out;
    out.tau = tau;
    out.x = x;
    out.ell = ell;
    out.samples = samples;
    out.seed = seed;
    Rng root(seed, kStreamRatio);
    std::vector<double> log_ns, ratios;
    for (int n : n_list) {
        if (n < 1) throw std::invalid_argument("moment_ratio_scan: sizes must be positive");
        Rng base = root.fork(std::uint64_t(n));
        std::vector<double> logs = sample_map<double>(samples, base, [&](std::int64_t, Rng& r) {
            return det_sample(n, tau, x, r).log_det;
        });
        std::vector<double> scaled(logs.size());
        for (std::size_t i = 0; i < logs.size(); ++i) scaled[i] = double(ell) * logs[i];
        LogMeanEstimate num = log_mean_exp(scaled);
        LogMeanEstimate den = log_mean_exp(logs);
        MomentRatioRow row;
        row.n = n;
        row.log_num = num.log_mean;
        row.log_den = den.log_mean;
        row.log_ratio = num.log_mean - double(ell) * den.log_mean;
        row.stderr_of_log = std::sqrt(num.stderr_log * num.stderr_log +
                                      double(ell) * double(ell) * den.stderr_log * den.stderr_log);
        out.rows.push_back(row);
        log_ns.push_back(std::log(double(n)));
        ratios.push_back(row.log_ratio);
    }
    out.slope = ols_slope(log_ns, ratios);
    return out;
}

RealDensity real_eigenvalue_density(int n, double tau, const std::vector<double>& edges,
                                    std::int64_t samples, std::uint64_t seed) {
    if (n < 1 || n > 60)
        throw std::invalid_argument("real_eigenvalue_density: need 1 <= n <= 60");
    if (samples < 2)
        throw std::invalid_argument("real_eigenvalue_density: need samples >= 2");
    if (edges.size() < 2)
        throw std::invalid_argument("real_eigenvalue_density: need at least two bin edges");
    for (std::size_t j = 0; j + 1 < edges.size(); ++j)
        if (!(edges[j] < edges[j + 1]))
            throw std::invalid_argument("real_eigenvalue_density: bin edges must be ascending");

    std::size_t nb = edges.size() - 1;
    Rng base(seed, kStreamDensity);
    // per sample: nb bin counts, then total count, then parity flag
    std::vector<std::vector<double>> rows =
        sample_map<std::vector<double>>(samples, base, [&](std::int64_t, Rng& r) {
            GeeMatrix a = sample_gee(n, tau, r);
            std::vector<double> row(nb + 2, 0.0);
            std::vector<double> re = real_eigenvalues(a.entries);
            for (double lam : re) {
                auto it = std::upper_bound(edges.begin(), edges.end(), lam);
                if (it != edges.begin() && it != edges.end())
                    row[std::size_t(it - edges.begin()) - 1] += 1.0;
            }
            row[nb] = double(re.size());
            row[nb + 1] = (std::int64_t(re.size()) % 2 != n % 2) ? 1.0 : 0.0;
            return row;
        });

    RealDensity out;
    out.samples = samples;
    out.seed = seed;
    std::vector<double> col(static_cast<std::size_t>(samples));
    for (std::size_t j = 0; j < nb; ++j) {
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = rows[i][j];
        MeanVar mv = mean_var(col);
        DensityBin bin;
        bin.lo = edges[j];
        bin.hi = edges[j + 1];
        bin.mean_count = mv.mean;
        bin.stderr_count = mv.stderr_mean;
        bin.predicted = integrate([&](double t) { return real_correlation(n, tau, {t}); },
                                  edges[j], edges[j + 1], 1e-10, 1e-8);
        out.bins.push_back(bin);
    }
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = rows[i][nb];
    MeanVar tot = mean_var(col);
    out.mean_total = tot.mean;
    out.stderr_total = tot.stderr_mean;
    double reach = 1.0 + tau + 2.0;  // the density is Gaussian-small past the bulk edge
    out.predicted_total = integrate([&](double t) { return real_correlation(n, tau, {t}); },
                                    -reach, reach, 1e-10, 1e-8);
    double bad = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) bad += rows[i][nb + 1];
    out.parity_mismatches = std::int64_t(bad);
    return out;
}

double u_hat(const ModelParams& mp, int n, double u) {
    mp.require_valid();
    if (n < 2) throw std::invalid_argument("u_hat: need n >= 2");
    double pp = double(mp.p) * (mp.p - 1.0);
    return std::sqrt(double(n) / (double(n - 1) * pp)) * u;
}

ConditionalJacobianPair conditional_pair_sample(const ModelParams& mp, int n, double r,
                                                double u1, double u2, Rng& rng) {
    mp.require_valid();
    if (n < 3) throw std::invalid_argument("conditional_pair_sample: need n >= 3");
    if (!(std::fabs(r) < 1.0))
        throw std::invalid_argument("conditional_pair_sample: need |r| < 1");

    int m = n - 1;
    Eigen::MatrixXd zroot = psd_sqrt(sigma_z(mp, r));
    CornerLaw law = sigma_s_and_mean(mp, r);
    Eigen::MatrixXd sroot = psd_sqrt(law.sigma_s);
    double uh[2] = {u_hat(mp, n, u1), u_hat(mp, n, u2)};

    ConditionalJacobianPair out;
    out.r = r;
    out.u1 = u1;
    out.u2 = u2;
    out.m1.setZero(m, m);
    out.m2.setZero(m, m);

    CorrelatedPair top = sample_correlated_pair(n - 2, mp.tau, mp.p, r, rng);
    double shrink = std::sqrt(double(n - 2) / double(n - 1));
    out.m1.topLeftCorner(m - 1, m - 1) = shrink * top.pair[0];
    out.m2.topLeftCorner(m - 1, m - 1) = shrink * top.pair[1];

    double es = 1.0 / std::sqrt(double(n - 1));
    for (int i = 0; i + 1 < m; ++i) {
        Eigen::Vector4d g(rng.next_gauss(), rng.next_gauss(), rng.next_gauss(),
                          rng.next_gauss());
        Eigen::Vector4d z = es * (zroot * g);
        out.m1(i, m - 1) = z(0);
        out.m1(m - 1, i) = z(1);
        out.m2(i, m - 1) = z(2);
        out.m2(m - 1, i) = z(3);
    }
    Eigen::Vector2d gc(rng.next_gauss(), rng.next_gauss());
    Eigen::Vector2d corner = es * (sroot * gc);
    Eigen::MatrixXd* mk[2] = {&out.m1, &out.m2};
    for (int k = 0; k < 2; ++k) {
        double mean = law.mean_w(k, 0) * uh[0] + law.mean_w(k, 1) * uh[1];
        (*mk[k])(m - 1, m - 1) = mean + corner(k);
        mk[k]->diagonal().array() -= uh[k];
    }
    return out;
}

McEstimate delta_ratio_estimate(const ModelParams& mp, int n, double r, double u1,
                                double u2, std::int64_t samples, std::uint64_t seed) {
    mp.require_valid();
    if (n < 3 || samples < 100)
        throw std::invalid_argument("delta_ratio_estimate: need n >= 3 and samples >= 100");
    if (!(std::fabs(r) < 1.0))
        throw std::invalid_argument("delta_ratio_estimate: need |r| < 1");

    Rng base(seed, kStreamDelta);
    std::vector<double> logs = sample_map<double>(samples, base, [&](std::int64_t, Rng& rg) {
        ConditionalJacobianPair pr = conditional_pair_sample(mp, n, r, u1, u2, rg);
        return log_det_abs(pr.m1, 0.0) + log_det_abs(pr.m2, 0.0);
    });
    LogMeanEstimate num = log_mean_exp(logs);
    McEstimate d1 = estimate_abs_det_moment(n - 1, mp.tau, u_hat(mp, n, u1), 1, samples,
                                            detail::mix64(seed ^ 0x5851f42d4c957f2dULL));
    McEstimate d2 = estimate_abs_det_moment(n - 1, mp.tau, u_hat(mp, n, u2), 1, samples,
                                            detail::mix64(seed ^ 0x14057b7ef767814fULL));
    McEstimate out;
    out.samples = samples;
    out.seed = seed;
    out.log_mean = num.log_mean - d1.log_mean - d2.log_mean;
    out.stderr_of_log =
        std::sqrt(num.stderr_log * num.stderr_log + d1.stderr_of_log * d1.stderr_of_log +
                  d2.stderr_of_log * d2.stderr_of_log);
    return out;
}

PerturbationPair perturbation_decomposition(const ModelParams& mp, int n, double r,
                                            double u1, double u2, Rng& rng) {
    mp.require_valid();
    if (n < 3) throw std::invalid_argument("perturbation_decomposition: need n >= 3");
    if (!(std::fabs(r) < 1.0))
        throw std::invalid_argument("perturbation_decomposition: need |r| < 1");

    int m = n - 1;
    CorrelatedPair cp = sample_correlated_pair(m, mp.tau, mp.p, r, rng);

    // T^{-1/2} for the entry/transpose covariance T = [[1, tau], [tau, 1]]
    double tau = mp.tau;
    double ap = 1.0 / std::sqrt(1.0 + tau), am = 1.0 / std::sqrt(1.0 - tau);
    Eigen::Matrix2d tinv;
    tinv << 0.5 * (ap + am), 0.5 * (ap - am), 0.5 * (ap - am), 0.5 * (ap + am);

    Eigen::Matrix4d sz = sigma_z(mp, r);
    Eigen::Matrix2d s11 = sz.topLeftCorner<2, 2>();
    Eigen::Matrix2d s12 = sz.topRightCorner<2, 2>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s12);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("perturbation_decomposition: cross-block eigensolve failed");
    Eigen::Matrix2d u = es.eigenvectors();
    Eigen::Vector2d d = es.eigenvalues();
    Eigen::Vector2d droot = d.cwiseAbs().cwiseSqrt();
    Eigen::Vector2d dsgn(d(0) < 0.0 ? -1.0 : 1.0, d(1) < 0.0 ? -1.0 : 1.0);
    // shared-part loadings: the k = 1 branch carries the sign of the cross
    // block so the product of the two recovers it exactly
    Eigen::Matrix2d b[2];
    b[0] = u * (dsgn.cwiseProduct(droot)).asDiagonal() * u.transpose() * tinv;
    b[1] = u * droot.asDiagonal() * u.transpose() * tinv;
    Eigen::Matrix2d habs = u * d.cwiseAbs().asDiagonal() * u.transpose();
    Eigen::Matrix2d c = psd_sqrt(s11 - habs) * tinv;

    double w = std::pow(std::fabs(r), mp.p - 2.0);
    double ci = std::sqrt(1.0 - w), cs = std::sqrt(w);
    double sgn[2] = {(r < 0.0 && mp.p % 2 == 1) ? -1.0 : 1.0, 1.0};
    Eigen::Matrix2d bshift[2] = {b[0] - sgn[0] * cs * Eigen::Matrix2d::Identity(),
                                 b[1] - sgn[1] * cs * Eigen::Matrix2d::Identity()};
    Eigen::Matrix2d cshift = c - ci * Eigen::Matrix2d::Identity();

    PerturbationPair out;
    out.a1 = cp.pair[0];
    out.a2 = cp.pair[1];
    out.e1.setZero(m, m);
    out.e2.setZero(m, m);
    const Eigen::MatrixXd* own[2] = {&cp.a1.entries, &cp.a2.entries};
    Eigen::MatrixXd* ek[2] = {&out.e1, &out.e2};
    for (int i = 0; i + 1 < m; ++i) {
        Eigen::Vector2d sh(cp.shared.entries(i, m - 1), cp.shared.entries(m - 1, i));
        for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d ow((*own[k])(i, m - 1), (*own[k])(m - 1, i));
            Eigen::Vector2d z = bshift[k] * sh + cshift * ow;
            (*ek[k])(i, m - 1) = z(0);
            (*ek[k])(m - 1, i) = z(1);
        }
    }

    // corner: same shared/individual split against the (1+tau)-variance
    // diagonal entries, plus the conditional mean
    CornerLaw law = sigma_s_and_mean(mp, r);
    double s11c = law.sigma_s(0, 0), s12c = law.sigma_s(0, 1);
    double sh_mag = std::sqrt(std::fabs(s12c) / (1.0 + tau));
    double in_mag = std::sqrt(std::fmax(0.0, s11c - std::fabs(s12c)) / (1.0 + tau));
    double sgn12 = s12c < 0.0 ? -1.0 : 1.0;
    double uh[2] = {u_hat(mp, n, u1), u_hat(mp, n, u2)};
    double shc = cp.shared.entries(m - 1, m - 1);
    for (int k = 0; k < 2; ++k) {
        double a_coef = (k == 0 ? sgn12 : 1.0) * sh_mag - sgn[k] * cs;
        double b_coef = in_mag - ci;
        double mean = law.mean_w(k, 0) * uh[0] + law.mean_w(k, 1) * uh[1];
        (*ek[k])(m - 1, m - 1) = mean + a_coef * shc + b_coef * (*own[k])(m - 1, m - 1);
    }
    return out;
}

} // namespace eqc
