#include "eqcount.h"

#include <array>
#include <cstring>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eqcount/complexity.hpp"
#include "eqcount/conditional.hpp"
#include "eqcount/counting.hpp"
#include "eqcount/ensemble.hpp"
#include "eqcount/field.hpp"
#include "eqcount/kernel.hpp"
#include "eqcount/mc.hpp"
#include "eqcount/params.hpp"
#include "eqcount/rng.hpp"

#ifndef EQC_VERSION
#define EQC_VERSION "unknown"
#endif

struct eqc_field {
    eqc::SphericalPSpinField impl;
};

namespace {

thread_local std::string t_last_error;

template <class F>
eqc_status guard(F&& fn) {
    try {
        fn();
        return EQC_OK;
    } catch (const std::invalid_argument& e) {
        t_last_error = e.what();
        return EQC_EINVAL;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return EQC_EFAIL;
    } catch (...) {
        t_last_error = "unknown error";
        return EQC_EFAIL;
    }
}

void need(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("null argument: ") + what);
}

eqc::Band make_band(const double* intervals, int k) {
    if (k < 0) throw std::invalid_argument("band: negative interval count");
    if (k > 0 && !intervals) throw std::invalid_argument("band: null interval array");
    eqc::Band b;
    b.reserve(std::size_t(k));
    for (int i = 0; i < k; ++i)
        b.push_back({intervals[2 * i], intervals[2 * i + 1]});
    return b;
}

constexpr std::uint64_t kStreamSpectrum = 18;

} // namespace

extern "C" {

const char* eqc_last_error(void) { return t_last_error.c_str(); }

const char* eqc_version(void) { return EQC_VERSION; }

int eqc_worker_count(void) { return eqc::worker_count(); }

eqc_status eqc_log_potential(double tau, double u, double* out) {
    return guard([&] {
        need(out, "out");
        *out = eqc::log_potential(tau, u);
    });
}

eqc_status eqc_annealed_complexity(int p, double tau, double u, double* out) {
    return guard([&] {
        need(out, "out");
        *out = eqc::annealed_complexity({p, tau}, u);
    });
}

eqc_status eqc_thresholds(int p, double tau, double out[5]) {
    return guard([&] {
        need(out, "out");
        eqc::Thresholds t = eqc::thresholds({p, tau});
        out[0] = t.e_inf;
        out[1] = t.e_zero;
        out[2] = t.tau_p;
        out[3] = t.theta;
        out[4] = t.u_th;
    });
}

eqc_status eqc_two_point_complexity(int p, double tau, double r, double u1, double u2,
                                    double* out) {
    return guard([&] {
        need(out, "out");
        *out = eqc::two_point_complexity({p, tau}, r, u1, u2);
    });
}

eqc_status eqc_g_factor(int p, double tau, double r, double* out) {
    return guard([&] {
        need(out, "out");
        *out = eqc::g_factor({p, tau}, r);
    });
}

eqc_status eqc_q_function(int p, double tau, double r, double u, double* out) {
    return guard([&] {
        need(out, "out");
        *out = eqc::q_function({p, tau}, r, u);
    });
}

eqc_status eqc_sigma_z(int p, double tau, double r, double out[16]) {
    return guard([&] {
        need(out, "out");
        Eigen::Matrix4d m = eqc::sigma_z({p, tau}, r);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out[4 * i + j] = m(i, j);
    });
}

eqc_status eqc_sigma_s_and_mean(int p, double tau, double r, double sigma_s[4],
                                double mean_w[4]) {
    return guard([&] {
        need(sigma_s, "sigma_s");
        need(mean_w, "mean_w");
        eqc::CornerLaw law = eqc::sigma_s_and_mean({p, tau}, r);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                sigma_s[2 * i + j] = law.sigma_s(i, j);
                mean_w[2 * i + j] = law.mean_w(i, j);
            }
        }
    });
}

eqc_status eqc_sigma_edge_variances(int p, double tau, double r, double* s1, double* s2) {
    return guard([&] {
        need(s1, "s1");
        need(s2, "s2");
        eqc::EdgeVariances ev = eqc::sigma_edge_variances({p, tau}, r);
        *s1 = ev.sigma1;
        *s2 = ev.sigma2;
    });
}

eqc_status eqc_sigma_u(int p, double tau, double r, double cov[4]) {
    return guard([&] {
        need(cov, "cov");
        std::array<double, 4> c = eqc::sigma_u({p, tau}, r).cov();
        for (int i = 0; i < 4; ++i) cov[i] = c[i];
    });
}

eqc_status eqc_overlap_g(int p, double tau, double r, double* out) {
    return guard([&] {
        need(out, "out");
        *out = eqc::overlap_g({p, tau}, r);
    });
}

eqc_status eqc_sample_spectrum(int n, double tau, double shift, uint64_t seed,
                               double* atoms, double* reals, int* n_real) {
    return guard([&] {
        need(atoms, "atoms");
        need(reals, "reals");
        need(n_real, "n_real");
        eqc::Rng rng(seed, kStreamSpectrum);
        eqc::GeeMatrix a = eqc::sample_gee(n, tau, rng);
        eqc::EmpiricalMeasure em = eqc::singular_spectrum(a.entries, shift);
        for (int i = 0; i < n; ++i) atoms[i] = em.atoms[std::size_t(i)];
        std::vector<double> re = eqc::real_eigenvalues(a.entries);
        *n_real = int(re.size());
        for (std::size_t i = 0; i < re.size(); ++i) reals[i] = re[i];
    });
}

eqc_status eqc_kernel_residual(int n, double tau, double x, double y, double* out) {
    return guard([&] {
        need(out, "out");
        *out = eqc::kernel_residual(n, tau, x, y);
    });
}

eqc_status eqc_real_correlation(int n, double tau, const double* points, int l,
                                double* out) {
    return guard([&] {
        need(points, "points");
        need(out, "out");
        if (l < 1) throw std::invalid_argument("eqc_real_correlation: need l >= 1");
        *out = eqc::real_correlation(n, tau, std::vector<double>(points, points + l));
    });
}

eqc_status eqc_moment_via_kernel(int n, double tau, const double* mus, int l,
                                 double* sign, double* log_mag) {
    return guard([&] {
        need(mus, "mus");
        need(sign, "sign");
        need(log_mag, "log_mag");
        if (l < 1) throw std::invalid_argument("eqc_moment_via_kernel: need l >= 1");
        eqc::SignLog sl = eqc::moment_via_kernel(n, tau, std::vector<double>(mus, mus + l));
        *sign = sl.sign;
        *log_mag = sl.log_mag;
    });
}

eqc_status eqc_det_moment(int n, double tau, double x, int ell, int64_t samples,
                          uint64_t seed, double* log_mean, double* stderr_log) {
    return guard([&] {
        need(log_mean, "log_mean");
        need(stderr_log, "stderr_log");
        eqc::McEstimate est = eqc::estimate_abs_det_moment(n, tau, x, ell, samples, seed);
        *log_mean = est.log_mean;
        *stderr_log = est.stderr_of_log;
    });
}

eqc_status eqc_moment_ratio_scan(const int* ns, int count, double tau, double x, int ell,
                                 int64_t samples, uint64_t seed, double* log_num,
                                 double* log_den, double* log_ratio, double* stderr_log,
                                 double* slope) {
    return guard([&] {
        need(ns, "ns");
        need(log_num, "log_num");
        need(log_den, "log_den");
        need(log_ratio, "log_ratio");
        need(stderr_log, "stderr_log");
        need(slope, "slope");
        if (count < 1) throw std::invalid_argument("eqc_moment_ratio_scan: need count >= 1");
        eqc::MomentRatioScan scan = eqc::moment_ratio_scan(
            std::vector<int>(ns, ns + count), tau, x, ell, samples, seed);
        for (int i = 0; i < count; ++i) {
            log_num[i] = scan.rows[std::size_t(i)].log_num;
            log_den[i] = scan.rows[std::size_t(i)].log_den;
            log_ratio[i] = scan.rows[std::size_t(i)].log_ratio;
            stderr_log[i] = scan.rows[std::size_t(i)].stderr_of_log;
        }
        *slope = scan.slope;
    });
}

eqc_status eqc_real_density(int n, double tau, const double* edges, int n_edges,
                            int64_t samples, uint64_t seed, double* mean, double* se,
                            double* predicted, double* mean_total, double* stderr_total,
                            double* predicted_total, int64_t* parity_mismatches) {
    return guard([&] {
        need(edges, "edges");
        need(mean, "mean");
        need(se, "se");
        need(predicted, "predicted");
        need(mean_total, "mean_total");
        need(stderr_total, "stderr_total");
        need(predicted_total, "predicted_total");
        need(parity_mismatches, "parity_mismatches");
        if (n_edges < 2)
            throw std::invalid_argument("eqc_real_density: need at least two edges");
        eqc::RealDensity d = eqc::real_eigenvalue_density(
            n, tau, std::vector<double>(edges, edges + n_edges), samples, seed);
        for (std::size_t i = 0; i < d.bins.size(); ++i) {
            mean[i] = d.bins[i].mean_count;
            se[i] = d.bins[i].stderr_count;
            predicted[i] = d.bins[i].predicted;
        }
        *mean_total = d.mean_total;
        *stderr_total = d.stderr_total;
        *predicted_total = d.predicted_total;
        *parity_mismatches = d.parity_mismatches;
    });
}

eqc_status eqc_delta_ratio(int p, double tau, int n, double r, double u1, double u2,
                           int64_t samples, uint64_t seed, double* log_mean,
                           double* stderr_log) {
    return guard([&] {
        need(log_mean, "log_mean");
        need(stderr_log, "stderr_log");
        eqc::McEstimate est =
            eqc::delta_ratio_estimate({p, tau}, n, r, u1, u2, samples, seed);
        *log_mean = est.log_mean;
        *stderr_log = est.stderr_of_log;
    });
}

eqc_status eqc_field_sample(int p, double tau, int n, uint64_t seed, uint64_t stream,
                            eqc_field** out) {
    return guard([&] {
        need(out, "out");
        eqc::Rng rng(seed, stream);
        eqc_field* f = new eqc_field{eqc::sample_field(p, tau, n, rng)};
        *out = f;
    });
}

void eqc_field_free(eqc_field* f) { delete f; }

eqc_status eqc_field_dims(const eqc_field* f, int* p, int* n) {
    return guard([&] {
        need(f, "field");
        need(p, "p");
        need(n, "n");
        *p = f->impl.p;
        *n = f->impl.n;
    });
}

eqc_status eqc_field_eval(const eqc_field* f, const double* x, double* fvec,
                          double* lambda, double* bigf) {
    return guard([&] {
        need(f, "field");
        need(x, "x");
        Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x, f->impl.n);
        eqc::FieldValue ev = eqc::eval_field(f->impl, xv);
        if (fvec)
            for (int i = 0; i < f->impl.n; ++i) fvec[i] = ev.f[i];
        if (lambda) *lambda = ev.lambda;
        if (bigf)
            for (int i = 0; i < f->impl.n; ++i) bigf[i] = ev.F[i];
    });
}

eqc_status eqc_field_count_circle(const eqc_field* f, int* count) {
    return guard([&] {
        need(f, "field");
        need(count, "count");
        *count = eqc::count_equilibria_circle(f->impl);
    });
}

eqc_status eqc_covariance_oracle(int p, double tau, int n, const double* x,
                                 const double* y, double* out) {
    return guard([&] {
        need(x, "x");
        need(y, "y");
        need(out, "out");
        Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x, n);
        Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y, n);
        Eigen::MatrixXd m = eqc::covariance_oracle(p, tau, n, xv, yv);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out[n * i + j] = m(i, j);
    });
}

eqc_status eqc_circle_batch(int p, double tau, int fields, uint64_t seed, double* mean,
                            double* se, double* mean_stable, double* se_stable,
                            int64_t* discarded, int* counts, int* stable,
                            int64_t* retained) {
    return guard([&] {
        need(mean, "mean");
        need(se, "se");
        eqc::CircleBatch cb = eqc::mean_circle_count(p, tau, fields, seed);
        *mean = cb.mean_count;
        *se = cb.stderr_count;
        if (mean_stable) *mean_stable = cb.mean_stable;
        if (se_stable) *se_stable = cb.stderr_stable;
        if (discarded) *discarded = cb.discarded;
        if (retained) *retained = int64_t(cb.counts.size());
        if (counts)
            for (std::size_t i = 0; i < cb.counts.size(); ++i) counts[i] = cb.counts[i];
        if (stable)
            for (std::size_t i = 0; i < cb.stable_counts.size(); ++i)
                stable[i] = cb.stable_counts[i];
    });
}

eqc_status eqc_first_moment(int p, double tau, int n, const double* intervals, int k,
                            int64_t samples, uint64_t seed, double* out) {
    return guard([&] {
        need(out, "out");
        *out = eqc::expected_crit_first_moment({p, tau}, n, make_band(intervals, k),
                                               samples, seed);
    });
}

eqc_status eqc_second_moment_integrand(int p, double tau, int n, double r,
                                       const double* intervals, int k, int64_t samples,
                                       uint64_t seed, double* value,
                                       double* stderr_value) {
    return guard([&] {
        need(value, "value");
        need(stderr_value, "stderr_value");
        eqc::IntegrandEstimate est = eqc::second_moment_integrand(
            {p, tau}, n, r, make_band(intervals, k), samples, seed);
        *value = est.value;
        *stderr_value = est.stderr_value;
    });
}

} // extern "C"
