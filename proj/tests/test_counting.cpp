#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "eqcount/counting.hpp"
#include "eqcount/field.hpp"
#include "eqcount/params.hpp"
#include "eqcount/rng.hpp"

using namespace eqc;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Band whole() { return {{-kInf, kInf}}; }

// closed form for the n=2 mean count: 2 sqrt(2 (1 + tau + alpha/(p-1)))
double mean_count_target(int p, double tau) {
    double alpha = 1.0 + (p - 1) * tau;
    return 2.0 * std::sqrt(2.0 * (1.0 + tau + alpha / (p - 1)));
}

} // namespace

TEST_CASE("circle scan: parity, alternation, refinement") {
    Rng rng(41, 1);
    for (int rep = 0; rep < 50; ++rep) {
        SphericalPSpinField f = sample_field(3, 0.5, 2, rng);
        CircleScan s = scan_equilibria_circle(f);
        REQUIRE(!s.degenerate);
        CHECK(s.zeros.size() % 2 == 0);
        CHECK(s.zeros.size() >= 2);
        CHECK(s.slopes.size() == s.zeros.size());
        int up = 0, down = 0;
        for (std::size_t k = 0; k < s.zeros.size(); ++k) {
            if (k) CHECK(s.zeros[k] > s.zeros[k - 1]);
            (s.slopes[k] > 0 ? up : down)++;
            double theta = s.zeros[k];
            Eigen::VectorXd x(2);
            x << std::sqrt(2.0) * std::cos(theta), std::sqrt(2.0) * std::sin(theta);
            FieldValue ev = eval_field(f, x);
            double g = std::cos(theta) * ev.F[1] - std::sin(theta) * ev.F[0];
            CHECK(std::abs(g) < 1e-9);
        }
        CHECK(up == down);
    }
}

TEST_CASE("an identically zero field is flagged degenerate") {
    Rng rng(42, 2);
    SphericalPSpinField f = sample_field(3, 0.5, 2, rng);
    for (double& c : f.h_coeffs) c = 0.0;
    for (std::vector<double>& blk : f.a_coeffs)
        for (double& c : blk) c = 0.0;
    CHECK(scan_equilibria_circle(f).degenerate);
    CHECK_THROWS_AS((void)count_equilibria_circle(f), std::runtime_error);

    Rng rng2(42, 3);
    SphericalPSpinField g = sample_field(3, 0.5, 2, rng2);
    CHECK_NOTHROW((void)count_equilibria_circle(g));
    CHECK_THROWS_AS((void)scan_equilibria_circle(g, 8), std::invalid_argument);
    Rng rng3(42, 4);
    SphericalPSpinField h3 = sample_field(3, 0.5, 3, rng3);
    CHECK_THROWS_AS((void)scan_equilibria_circle(h3), std::invalid_argument);
}

TEST_CASE("grid doubling does not move any count") {
    Rng base(2028, 3);
    for (int i = 0; i < 500; ++i) {
        Rng r = base.fork(std::uint64_t(i));
        SphericalPSpinField f = sample_field(3, 0.5, 2, r);
        CircleScan a = scan_equilibria_circle(f, 4096);
        CircleScan b = scan_equilibria_circle(f, 8192);
        REQUIRE(!a.degenerate);
        REQUIRE(!b.degenerate);
        CHECK(a.zeros.size() == b.zeros.size());
    }
}

TEST_CASE("mean circle count matches the folded normal closed form") {
    CircleBatch cb = mean_circle_count(3, 0.5, 2000, 2029);
    CHECK(cb.discarded == 0);
    CHECK(cb.counts.size() == 2000);
    double target = mean_count_target(3, 0.5);
    CHECK(target == doctest::Approx(2.0 * std::sqrt(5.0)).epsilon(1e-15));
    CHECK(std::abs(cb.mean_count - target) < 3.0 * cb.stderr_count);
    int at_least_two = 0;
    for (std::size_t k = 0; k < cb.counts.size(); ++k) {
        CHECK(cb.counts[k] % 2 == 0);
        if (cb.counts[k] >= 2) ++at_least_two;
        CHECK(2 * cb.stable_counts[k] == cb.counts[k]);
    }
    CHECK(at_least_two == 2000);
}

TEST_CASE("mean circle count covers the pure gradient flow") {
    // tau = 1 shuts the rotational part off; the count law is still the
    // folded normal one, now with alpha = p
    CircleBatch cb = mean_circle_count(3, 1.0, 600, 2030);
    CHECK(std::abs(cb.mean_count - mean_count_target(3, 1.0)) < 3.0 * cb.stderr_count);
}

TEST_CASE("circle batch is identical across worker counts") {
    setenv("EQCOUNT_THREADS", "3", 1);
    CircleBatch a = mean_circle_count(4, 0.3, 200, 7);
    setenv("EQCOUNT_THREADS", "1", 1);
    CircleBatch b = mean_circle_count(4, 0.3, 200, 7);
    unsetenv("EQCOUNT_THREADS");
    CHECK(a.counts == b.counts);
    CHECK(a.stable_counts == b.stable_counts);
    CHECK(a.mean_count == b.mean_count);
    CHECK(a.stderr_count == b.stderr_count);
}

TEST_CASE("first moment closed form at the smallest size") {
    ModelParams mp{3, 0.5};
    double v = expected_crit_first_moment(mp, 2, whole());
    CHECK(v == doctest::Approx(2.0 * std::sqrt(5.0)).epsilon(1e-8));
    CHECK(expected_crit_first_moment(mp, 2, {}) == 0.0);
    double half = expected_crit_first_moment(mp, 2, {{0.0, kInf}});
    CHECK(half == doctest::Approx(0.5 * v).epsilon(1e-8));
    double split = expected_crit_first_moment(mp, 2, {{-kInf, 0.0}, {0.0, kInf}});
    CHECK(split == doctest::Approx(v).epsilon(1e-8));
}

TEST_CASE("first moment grows at the annealed rate") {
    ModelParams mp{3, 0.5};
    double v6 = expected_crit_first_moment(mp, 6, whole());
    CHECK(std::abs(std::log(v6) / 6.0 - 0.5 * std::log(2.0)) < 0.35);
}

TEST_CASE("first moment monte carlo fallback is stable") {
    // n = 3 puts the inner expectation on the sampling route
    ModelParams mp{4, 0.4};
    double a = expected_crit_first_moment(mp, 3, whole(), 4000, 11);
    double b = expected_crit_first_moment(mp, 3, whole(), 4000, 12);
    CHECK(a > 0.0);
    CHECK(std::abs(a - b) < 0.02 * a);
}

TEST_CASE("sphere volumes and band membership") {
    CHECK(log_sphere_volume(1) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(log_sphere_volume(2) == doctest::Approx(std::log(2.0 * M_PI)).epsilon(1e-14));
    CHECK(log_sphere_volume(3) == doctest::Approx(std::log(4.0 * M_PI)).epsilon(1e-14));
    CHECK(log_sphere_volume(4) == doctest::Approx(std::log(2.0 * M_PI * M_PI)).epsilon(1e-14));
    CHECK(band_contains(whole(), 1e300));
    CHECK(!band_contains({}, 0.0));
    CHECK(band_contains({{0.0, 1.0}}, 0.5));
    CHECK(!band_contains({{0.0, 1.0}}, 0.0));
    CHECK(!band_contains({{0.0, 1.0}}, 1.0));
}

TEST_CASE("pair integrand prefactor closed forms") {
    ModelParams mp{5, 0.5};
    CHECK(pair_overlap_prefactor(mp, 10, 0.0) == 1.0);
    ModelParams ev{4, 0.3};
    CHECK(pair_overlap_prefactor(ev, 8, 0.4) ==
          doctest::Approx(pair_overlap_prefactor(ev, 8, -0.4)).epsilon(1e-14));
    CHECK_THROWS_AS((void)pair_overlap_prefactor(mp, 8, 1.0), std::invalid_argument);
}

TEST_CASE("pair integrand factorizes at zero overlap") {
    // at r = 0 the integrand is the squared one-point moment times the
    // uniform overlap density vol(S^{n-2})/vol(S^{n-1}); this pins the
    // pair constant C_n against the one-point constant
    ModelParams mp{5, 0.5};
    int n = 10;
    IntegrandEstimate smi = second_moment_integrand(mp, n, 0.0, whole(), 20000, 2030);
    double fm = expected_crit_first_moment(mp, n, whole());
    double ratio = smi.value / (fm * fm);
    double target = std::exp(log_sphere_volume(n - 1) - log_sphere_volume(n));
    CHECK(std::abs(ratio - target) < 3.0 * smi.stderr_value / (fm * fm));
}

TEST_CASE("pair integrand is even in the overlap for even p") {
    ModelParams mp{4, 0.5};
    IntegrandEstimate a = second_moment_integrand(mp, 6, 0.3, whole(), 20000, 2031);
    IntegrandEstimate b = second_moment_integrand(mp, 6, -0.3, whole(), 20000, 2032);
    double se = std::sqrt(a.stderr_value * a.stderr_value + b.stderr_value * b.stderr_value);
    CHECK(std::abs(a.value - b.value) < 3.0 * se);
}

TEST_CASE("band indicator prunes the pair integrand") {
    ModelParams mp{4, 0.5};
    IntegrandEstimate all = second_moment_integrand(mp, 6, 0.2, whole(), 5000, 2033);
    IntegrandEstimate mid = second_moment_integrand(mp, 6, 0.2, {{-0.5, 0.5}}, 5000, 2033);
    CHECK(mid.value > 0.0);
    CHECK(mid.value < all.value);
    IntegrandEstimate none = second_moment_integrand(mp, 6, 0.2, {{100.0, 101.0}}, 5000, 2033);
    CHECK(none.value == 0.0);
    CHECK(none.stderr_value == 0.0);
    CHECK(second_moment_integrand(mp, 6, 0.2, {}, 5000, 2033).value == 0.0);
}

TEST_CASE("pair integrand is deterministic") {
    ModelParams mp{4, 0.5};
    IntegrandEstimate a = second_moment_integrand(mp, 6, 0.25, whole(), 2000, 9);
    setenv("EQCOUNT_THREADS", "3", 1);
    IntegrandEstimate b = second_moment_integrand(mp, 6, 0.25, whole(), 2000, 9);
    unsetenv("EQCOUNT_THREADS");
    CHECK(a.value == b.value);
    CHECK(a.stderr_value == b.stderr_value);
}

TEST_CASE("counting argument checks") {
    ModelParams mp{4, 0.5};
    CHECK_THROWS_AS((void)expected_crit_first_moment(mp, 1, whole()), std::invalid_argument);
    CHECK_THROWS_AS((void)expected_crit_first_moment(mp, 4, {{2.0, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)second_moment_integrand(mp, 2, 0.0, whole(), 1000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)second_moment_integrand(mp, 21, 0.0, whole(), 1000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)second_moment_integrand(mp, 6, 1.0, whole(), 1000, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)second_moment_integrand(mp, 6, 0.0, whole(), 50, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)second_moment_integrand(mp, 6, 0.0, {{1.0, 0.0}}, 1000, 1),
                    std::invalid_argument);
    ModelParams bad{3, 1.0};
    CHECK_THROWS_AS((void)expected_crit_first_moment(bad, 4, whole()), std::invalid_argument);
}
