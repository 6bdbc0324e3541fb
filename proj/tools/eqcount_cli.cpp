// Command line front end. Links the C API only; all numerics live behind
// eqcount.h. Every subcommand writes a data file plus a JSON summary and
// is byte-identical across reruns and thread counts for a fixed config
// and seed (wall time appears only in the summary).
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eqcount.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct Fail {
    int code;
    std::string message;
};

void check(eqc_status st) {
    if (st != EQC_OK) throw Fail{st == EQC_EINVAL ? 1 : 2, eqc_last_error()};
}

// 17 significant digits: doubles survive a round trip through the CSV
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

struct Csv {
    std::string text;
    explicit Csv(const std::string& header) : text(header + "\n") {}
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text += ',';
            text += cells[i];
        }
        text += '\n';
    }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Fail{2, "cannot open output file: " + path};
    out << text;
    out.flush();
    if (!out) throw Fail{2, "write failed: " + path};
}

std::vector<double> grid(double lo, double hi, int steps) {
    if (steps < 1) throw Fail{1, "steps must be positive"};
    std::vector<double> g(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        g[std::size_t(i)] =
            steps == 1 ? lo : lo + (hi - lo) * double(i) / double(steps - 1);
    return g;
}

// One run in flight per process; the active command owns these.
struct Run {
    std::string command;
    std::string out;
    std::string summary;
    json config;
    json results;
    bool stochastic = false;
    std::uint64_t seed = 0;
    std::chrono::steady_clock::time_point t0;

    void start(const std::string& name) {
        command = name;
        t0 = std::chrono::steady_clock::now();
    }
    std::string summary_path() const {
        if (!summary.empty()) return summary;
        return std::filesystem::path(out)
            .replace_extension(".summary.json")
            .string();
    }
    void finish(const std::string& data_text) {
        write_file(out, data_text);
        json s;
        s["command"] = command;
        s["config"] = config;
        s["seed"] = stochastic ? json(seed) : json(nullptr);
        s["version"] = eqc_version();
        if (!results.is_null()) s["results"] = results;
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        s["wall_time_seconds"] = dt.count();
        write_file(summary_path(), s.dump(2) + "\n");
        std::puts(s.dump(2).c_str());
    }
};

json matrix_json(const double* m, int rows, int cols) {
    json out = json::array();
    for (int i = 0; i < rows; ++i) {
        json row = json::array();
        for (int j = 0; j < cols; ++j) row.push_back(m[i * cols + j]);
        out.push_back(row);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"equilibrium counting experiments"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads,
                   "worker threads (default: EQCOUNT_THREADS or all cores)");

    Run run;
    app.add_option("--out", run.out, "data file path (default per command)");
    app.add_option("--summary", run.summary,
                   "summary path (default: data file with .summary.json)");

    int p = 3, n = 0, ell = 1, steps = 0, bins = 10;
    double tau = 0.5, r = 0.0, u1 = 0.0, u2 = 0.0, x = 0.0, y = 0.0,
           shift = 0.0;
    double u_min = 0.0, u_max = 0.0, r_min = 0.0, r_max = 0.0, lo = -2.0,
           hi = 2.0;
    int u_steps = 0, r_steps = 0, fields = 0;
    std::int64_t samples = 0;
    std::vector<int> ns;

    auto* table = app.add_subcommand(
        "complexity-table", "annealed complexity on a radial speed grid");
    table->add_option("--p", p)->required();
    table->add_option("--tau", tau)->required();
    table->add_option("--u-min", u_min)->required();
    table->add_option("--u-max", u_max)->required();
    table->add_option("--steps", steps)->required();
    table->callback([&] {
        run.start("complexity-table");
        if (run.out.empty()) run.out = "complexity-table.csv";
        run.config = {{"p", p}, {"tau", tau}, {"u_min", u_min},
                      {"u_max", u_max}, {"steps", steps}};
        Csv csv("u,phi_tau,sigma");
        for (double u : grid(u_min, u_max, steps)) {
            double phi = 0.0, sigma = 0.0;
            check(eqc_log_potential(tau, u, &phi));
            check(eqc_annealed_complexity(p, tau, u, &sigma));
            csv.row({fmt(u), fmt(phi), fmt(sigma)});
        }
        run.finish(csv.text);
    });

    auto* two = app.add_subcommand(
        "two-point", "pair complexity and overlap factors on an r x u grid");
    two->add_option("--p", p)->required();
    two->add_option("--tau", tau)->required();
    two->add_option("--r-min", r_min)->required();
    two->add_option("--r-max", r_max)->required();
    two->add_option("--r-steps", r_steps)->required();
    two->add_option("--u-min", u_min)->required();
    two->add_option("--u-max", u_max)->required();
    two->add_option("--u-steps", u_steps)->required();
    two->callback([&] {
        run.start("two-point");
        if (run.out.empty()) run.out = "two-point.csv";
        run.config = {{"p", p}, {"tau", tau},
                      {"r_min", r_min}, {"r_max", r_max}, {"r_steps", r_steps},
                      {"u_min", u_min}, {"u_max", u_max}, {"u_steps", u_steps}};
        Csv csv("r,u,sigma2,g,q");
        for (double rv : grid(r_min, r_max, r_steps)) {
            double g = 0.0;
            check(eqc_g_factor(p, tau, rv, &g));
            for (double u : grid(u_min, u_max, u_steps)) {
                double s2 = 0.0, q = 0.0;
                check(eqc_two_point_complexity(p, tau, rv, u, u, &s2));
                check(eqc_q_function(p, tau, rv, u, &q));
                csv.row({fmt(rv), fmt(u), fmt(s2), fmt(g), fmt(q)});
            }
        }
        run.finish(csv.text);
    });

    auto* thr = app.add_subcommand("thresholds",
                                   "spectral and complexity thresholds");
    thr->add_option("--p", p)->required();
    thr->add_option("--tau", tau)->required();
    thr->callback([&] {
        run.start("thresholds");
        if (run.out.empty()) run.out = "thresholds.json";
        run.config = {{"p", p}, {"tau", tau}};
        double t[5];
        check(eqc_thresholds(p, tau, t));
        json data = {{"e_inf", t[0]}, {"e_zero", t[1]}, {"tau_p", t[2]},
                     {"theta", t[3]}, {"u_th", t[4]}};
        run.finish(data.dump(2) + "\n");
    });

    auto* spec = app.add_subcommand(
        "sample-spectrum", "singular and real eigenvalue atoms of one draw");
    spec->add_option("--n", n)->required();
    spec->add_option("--tau", tau)->required();
    spec->add_option("--shift", shift);
    spec->add_option("--seed", run.seed)->required();
    spec->callback([&] {
        run.start("sample-spectrum");
        run.stochastic = true;
        if (run.out.empty()) run.out = "sample-spectrum.csv";
        run.config = {{"n", n}, {"tau", tau}, {"shift", shift}};
        std::vector<double> atoms(static_cast<std::size_t>(n));
        std::vector<double> reals(static_cast<std::size_t>(n));
        int n_real = 0;
        check(eqc_sample_spectrum(n, tau, shift, run.seed, atoms.data(),
                                  reals.data(), &n_real));
        Csv csv("kind,index,value");
        for (int i = 0; i < n; ++i)
            csv.row({"singular", std::to_string(i), fmt(atoms[std::size_t(i)])});
        for (int i = 0; i < n_real; ++i)
            csv.row({"real", std::to_string(i), fmt(reals[std::size_t(i)])});
        run.results = {{"real_eigenvalues", n_real}};
        run.finish(csv.text);
    });

    auto* det = app.add_subcommand(
        "det-moments", "sampled absolute determinant moment, kernel overlay");
    det->add_option("--n", n)->required();
    det->add_option("--tau", tau)->required();
    det->add_option("--x", x);
    det->add_option("--ell", ell);
    det->add_option("--samples", samples)->required();
    det->add_option("--seed", run.seed)->required();
    det->callback([&] {
        run.start("det-moments");
        run.stochastic = true;
        if (run.out.empty()) run.out = "det-moments.csv";
        run.config = {{"n", n}, {"tau", tau}, {"x", x}, {"ell", ell},
                      {"samples", samples}};
        double lm = 0.0, se = 0.0;
        check(eqc_det_moment(n, tau, x, ell, samples, run.seed, &lm, &se));
        // the kernel closed form covers a single shift; higher powers repeat
        // the point and fall outside its domain, so the overlay stays blank
        std::string ksgn, klog;
        if (ell == 1) {
            double sgn = 0.0, lmag = 0.0;
            if (eqc_moment_via_kernel(n, tau, &x, 1, &sgn, &lmag) == EQC_OK) {
                ksgn = fmt(sgn);
                klog = fmt(lmag);
            }
        }
        Csv csv("n,tau,x,ell,samples,log_mean,stderr_log,kernel_sign,kernel_log");
        csv.row({std::to_string(n), fmt(tau), fmt(x), std::to_string(ell),
                 std::to_string(samples), fmt(lm), fmt(se), ksgn, klog});
        run.finish(csv.text);
    });

    auto* scan = app.add_subcommand(
        "moment-ratio-scan", "second-vs-first moment ratio across sizes");
    scan->add_option("--n-list", ns)->required()->delimiter(',');
    scan->add_option("--tau", tau)->required();
    scan->add_option("--x", x);
    scan->add_option("--ell", ell);
    scan->add_option("--samples", samples)->required();
    scan->add_option("--seed", run.seed)->required();
    scan->callback([&] {
        run.start("moment-ratio-scan");
        run.stochastic = true;
        if (run.out.empty()) run.out = "moment-ratio-scan.csv";
        run.config = {{"n_list", ns}, {"tau", tau}, {"x", x}, {"ell", ell},
                      {"samples", samples}};
        std::size_t count = ns.size();
        std::vector<double> ln(count), ld(count), lr(count), se(count);
        double slope = 0.0;
        check(eqc_moment_ratio_scan(ns.data(), int(count), tau, x, ell,
                                    samples, run.seed, ln.data(), ld.data(),
                                    lr.data(), se.data(), &slope));
        Csv csv("n,log_numerator,log_denominator,log_ratio,stderr_log_ratio");
        for (std::size_t i = 0; i < count; ++i)
            csv.row({std::to_string(ns[i]), fmt(ln[i]), fmt(ld[i]), fmt(lr[i]),
                     fmt(se[i])});
        run.results = {{"slope", slope}};
        run.finish(csv.text);
    });

    auto* dens = app.add_subcommand(
        "real-density", "real eigenvalue histogram against the kernel density");
    dens->add_option("--n", n)->required();
    dens->add_option("--tau", tau)->required();
    dens->add_option("--lo", lo);
    dens->add_option("--hi", hi);
    dens->add_option("--bins", bins);
    dens->add_option("--samples", samples)->required();
    dens->add_option("--seed", run.seed)->required();
    dens->callback([&] {
        run.start("real-density");
        run.stochastic = true;
        if (run.out.empty()) run.out = "real-density.csv";
        run.config = {{"n", n}, {"tau", tau}, {"lo", lo}, {"hi", hi},
                      {"bins", bins}, {"samples", samples}};
        if (bins < 1) throw Fail{1, "bins must be positive"};
        std::vector<double> edges = grid(lo, hi, bins + 1);
        std::size_t nb = std::size_t(bins);
        std::vector<double> mean(nb), se(nb), pred(nb);
        double mt = 0.0, st = 0.0, pt = 0.0;
        std::int64_t parity = 0;
        check(eqc_real_density(n, tau, edges.data(), bins + 1, samples,
                               run.seed, mean.data(), se.data(), pred.data(),
                               &mt, &st, &pt, &parity));
        Csv csv("bin_lo,bin_hi,mean_count,stderr_count,predicted");
        for (std::size_t i = 0; i < nb; ++i)
            csv.row({fmt(edges[i]), fmt(edges[i + 1]), fmt(mean[i]),
                     fmt(se[i]), fmt(pred[i])});
        run.results = {{"mean_total", mt}, {"stderr_total", st},
                       {"predicted_total", pt}, {"parity_mismatches", parity}};
        run.finish(csv.text);
    });

    auto* resid = app.add_subcommand(
        "kernel-residual", "distance of the finite-n kernel from its limit");
    resid->add_option("--n-list", ns)->required()->delimiter(',');
    resid->add_option("--tau", tau)->required();
    resid->add_option("--x", x);
    resid->add_option("--y", y);
    resid->callback([&] {
        run.start("kernel-residual");
        if (run.out.empty()) run.out = "kernel-residual.csv";
        run.config = {{"n_list", ns}, {"tau", tau}, {"x", x}, {"y", y}};
        Csv csv("n,x,y,residual");
        for (int nv : ns) {
            double res = 0.0;
            check(eqc_kernel_residual(nv, tau, x, y, &res));
            csv.row({std::to_string(nv), fmt(x), fmt(y), fmt(res)});
        }
        run.finish(csv.text);
    });

    auto* delta = app.add_subcommand(
        "delta-ratio", "pair determinant coupling against the product law");
    delta->add_option("--p", p)->required();
    delta->add_option("--tau", tau)->required();
    delta->add_option("--n-list", ns)->required()->delimiter(',');
    delta->add_option("--r", r);
    delta->add_option("--u1", u1);
    delta->add_option("--u2", u2);
    delta->add_option("--samples", samples)->required();
    delta->add_option("--seed", run.seed)->required();
    delta->callback([&] {
        run.start("delta-ratio");
        run.stochastic = true;
        if (run.out.empty()) run.out = "delta-ratio.csv";
        run.config = {{"p", p}, {"tau", tau}, {"n_list", ns}, {"r", r},
                      {"u1", u1}, {"u2", u2}, {"samples", samples}};
        Csv csv("n,sign,log_delta,stderr_log,delta");
        for (int nv : ns) {
            double lm = 0.0, se = 0.0;
            check(eqc_delta_ratio(p, tau, nv, r, u1, u2, samples, run.seed,
                                  &lm, &se));
            csv.row({std::to_string(nv), fmt(1.0), fmt(lm), fmt(se),
                     fmt(std::exp(lm))});
        }
        run.finish(csv.text);
    });

    auto* kac = app.add_subcommand(
        "kacrice-count", "direct equilibrium counts of sampled circle fields");
    kac->add_option("--p", p)->required();
    kac->add_option("--tau", tau)->required();
    kac->add_option("--fields", fields)->required();
    kac->add_option("--seed", run.seed)->required();
    kac->callback([&] {
        run.start("kacrice-count");
        run.stochastic = true;
        if (run.out.empty()) run.out = "kacrice-count.csv";
        run.config = {{"p", p}, {"tau", tau}, {"fields", fields}};
        std::vector<int> counts(static_cast<std::size_t>(fields));
        std::vector<int> stable(static_cast<std::size_t>(fields));
        double mean = 0.0, se = 0.0, ms = 0.0, mss = 0.0;
        std::int64_t discarded = 0, retained = 0;
        check(eqc_circle_batch(p, tau, fields, run.seed, &mean, &se, &ms, &mss,
                               &discarded, counts.data(), stable.data(),
                               &retained));
        Csv csv("index,count,stable_count");
        for (std::int64_t i = 0; i < retained; ++i)
            csv.row({std::to_string(i), std::to_string(counts[std::size_t(i)]),
                     std::to_string(stable[std::size_t(i)])});
        run.results = {{"mean_count", mean}, {"stderr_count", se},
                       {"mean_stable_count", ms}, {"stderr_stable_count", mss},
                       {"discarded", discarded}, {"retained", retained}};
        run.finish(csv.text);
    });

    auto* cov = app.add_subcommand(
        "covcheck", "conditional covariance blocks at one overlap");
    cov->add_option("--p", p)->required();
    cov->add_option("--tau", tau)->required();
    cov->add_option("--r", r);
    cov->callback([&] {
        run.start("covcheck");
        if (run.out.empty()) run.out = "covcheck.json";
        run.config = {{"p", p}, {"tau", tau}, {"r", r}};
        double z[16], ss[4], mw[4], su[4];
        double s1 = 0.0, s2 = 0.0, g = 0.0;
        check(eqc_sigma_z(p, tau, r, z));
        check(eqc_sigma_s_and_mean(p, tau, r, ss, mw));
        check(eqc_sigma_edge_variances(p, tau, r, &s1, &s2));
        check(eqc_sigma_u(p, tau, r, su));
        check(eqc_overlap_g(p, tau, r, &g));
        json data = {{"sigma_z", matrix_json(z, 4, 4)},
                     {"sigma_s", matrix_json(ss, 2, 2)},
                     {"mean_w", matrix_json(mw, 2, 2)},
                     {"sigma1", s1},
                     {"sigma2", s2},
                     {"sigma_u", matrix_json(su, 2, 2)},
                     {"g_hat", g}};
        run.finish(data.dump(2) + "\n");
    });

    app.parse_complete_callback([&] {
        if (threads > 0)
            setenv("EQCOUNT_THREADS", std::to_string(threads).c_str(), 1);
    });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const Fail& f) {
        json err = {{"error", {{"message", f.message}, {"status", f.code}}}};
        std::puts(err.dump(2).c_str());
        return f.code;
    } catch (const std::exception& e) {
        json err = {{"error", {{"message", e.what()}, {"status", 2}}}};
        std::puts(err.dump(2).c_str());
        return 2;
    }
    return 0;
}
