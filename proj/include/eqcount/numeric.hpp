#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace eqc {

// Value stored as sign * exp(log_mag). Zero is sign == 0 (log_mag ignored,
// kept at -inf). Keeps products of hundreds of singular values or Hermite
// factors representable far beyond double range.
struct SignLog {
    double sign = 0.0;    // -1, 0, +1
    double log_mag = -std::numeric_limits<double>::infinity();

    static SignLog from_value(double v) {
        if (v == 0.0 || std::isnan(v)) return {v == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN(),
                                               -std::numeric_limits<double>::infinity()};
        return {v > 0 ? 1.0 : -1.0, std::log(std::fabs(v))};
    }
    static SignLog zero() { return {}; }
    static SignLog one() { return {1.0, 0.0}; }

    double value() const { return sign == 0.0 ? 0.0 : sign * std::exp(log_mag); }
    bool is_zero() const { return sign == 0.0; }

    SignLog operator*(const SignLog& o) const {
        if (sign == 0.0 || o.sign == 0.0) return zero();
        return {sign * o.sign, log_mag + o.log_mag};
    }
    SignLog operator/(const SignLog& o) const {
        return {sign * o.sign, log_mag - o.log_mag};
    }
    SignLog operator+(const SignLog& o) const {
        if (sign == 0.0) return o;
        if (o.sign == 0.0) return *this;
        double hi = std::fmax(log_mag, o.log_mag);
        double t = sign * std::exp(log_mag - hi) + o.sign * std::exp(o.log_mag - hi);
        if (t == 0.0) return zero();
        return {t > 0 ? 1.0 : -1.0, hi + std::log(std::fabs(t))};
    }
    SignLog operator-() const { return {-sign, log_mag}; }
    SignLog abs() const { return {sign == 0.0 ? 0.0 : 1.0, log_mag}; }
    SignLog pow(double e) const { return {sign, log_mag * e}; } // sign must be >= 0 or e integral-odd handled by caller
};

inline SignLog sl_mul_value(SignLog a, double v) { return a * SignLog::from_value(v); }

// log(sum_i exp(x[i])), tolerant of -inf entries. Deterministic: plain
// left-to-right accumulation after a single max scan.
inline double log_sum_exp(const std::vector<double>& x) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : x) hi = std::fmax(hi, v);
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (double v : x) s += std::exp(v - hi);
    return hi + std::log(s);
}

// Pairwise summation over a fixed index range; order depends only on the
// range, never on thread layout.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;     // population variance of the samples
    double stderr_mean = 0.0;
    std::size_t n = 0;
};

// Mean / variance / standard error from a sample vector, deterministic order.
inline MeanVar mean_var(const std::vector<double>& x) {
    MeanVar out;
    out.n = x.size();
    if (x.empty()) return out;
    out.mean = pairwise_sum(x) / double(x.size());
    std::vector<double> d2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - out.mean;
        d2[i] = d * d;
    }
    out.var = pairwise_sum(d2) / double(x.size());
    if (x.size() > 1)
        out.stderr_mean = std::sqrt(out.var / double(x.size() - 1));
    return out;
}

// Estimate of log E[exp(L)] from samples of L, with a delta-method standard
// error for the log-mean: se(log m) ~= se(m)/m, computed in shifted space so
// huge |L| stays finite.
struct LogMeanEstimate {
    double log_mean;
    double stderr_log;
    std::size_t n;
};

inline LogMeanEstimate log_mean_exp(const std::vector<double>& logs) {
    LogMeanEstimate out{-std::numeric_limits<double>::infinity(), 0.0, logs.size()};
    if (logs.empty()) return out;
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : logs) hi = std::fmax(hi, v);
    if (!std::isfinite(hi)) { out.log_mean = hi; return out; }
    std::vector<double> w(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) w[i] = std::exp(logs[i] - hi);
    MeanVar mv = mean_var(w);
    out.log_mean = hi + std::log(mv.mean);
    out.stderr_log = mv.mean > 0 ? mv.stderr_mean / mv.mean : std::numeric_limits<double>::infinity();
    return out;
}

} // namespace eqc
