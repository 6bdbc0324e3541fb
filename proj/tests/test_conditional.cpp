#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "eqcount/complexity.hpp"
#include "eqcount/conditional.hpp"
#include "eqcount/rng.hpp"
#include "support/covariance_oracle.hpp"

using namespace eqc;
using cov_oracle::cov_matrix;
using cov_oracle::cov_entry;
using cov_oracle::make_jet;

namespace {

double ipw(double x, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= x;
    return v;
}

// conditional covariance of the leading block given the trailing one
Eigen::MatrixXd schur(const Eigen::MatrixXd& full, int keep) {
    int rest = static_cast<int>(full.rows()) - keep;
    Eigen::MatrixXd a = full.topLeftCorner(keep, keep);
    Eigen::MatrixXd b = full.topRightCorner(keep, rest);
    Eigen::MatrixXd c = full.bottomRightCorner(rest, rest);
    return a - b * c.inverse() * b.transpose();
}

} // namespace

TEST_CASE("derivative oracle entries do not depend on the ambient dimension") {
    for (double r : {-0.6, 0.2, 0.85}) {
        auto j5 = make_jet(5, r);
        auto j9 = make_jet(9, r);
        for (int p : {3, 5}) {
            double tau = 0.45;
            CHECK(cov_entry(p, tau, j5.zeta_a, j5.egg_b) ==
                  doctest::Approx(cov_entry(p, tau, j9.zeta_a, j9.egg_b)).epsilon(1e-12));
            CHECK(cov_entry(p, tau, j5.col_a, j5.row_b) ==
                  doctest::Approx(cov_entry(p, tau, j9.col_a, j9.row_b)).epsilon(1e-12));
            CHECK(cov_entry(p, tau, j5.g_a, j5.egg_b) ==
                  doctest::Approx(cov_entry(p, tau, j9.g_a, j9.egg_b)).epsilon(1e-12));
            CHECK(cov_entry(p, tau, j5.gi_b, j5.row_a) ==
                  doctest::Approx(cov_entry(p, tau, j9.gi_b, j9.row_a)).epsilon(1e-12));
        }
    }
}

TEST_CASE("oracle reproduces the closed-form covariance tables") {
    for (int p : {3, 4, 5, 6}) {
        for (double tau : {0.0, 0.45, 0.8}) {
            for (double r : {-0.7, -0.2, 0.35, 0.9}) {
                ModelParams mp{p, tau};
                auto jet = make_jet(7, r);
                double al = mp.alpha();
                double rs2 = 1.0 - r * r, rstar = std::sqrt(rs2);
                double pp = p * (p - 1.0);

                // same-point anchors
                CHECK(cov_entry(p, tau, jet.zeta_a, jet.zeta_a) == doctest::Approx(p * al).epsilon(1e-12));
                CHECK(cov_entry(p, tau, jet.g_a, jet.g_a) == doctest::Approx(double(p)).epsilon(1e-12));
                CHECK(std::fabs(cov_entry(p, tau, jet.zeta_a, jet.g_a)) < 1e-14);
                CHECK(cov_entry(p, tau, jet.zeta_a, jet.egg_a) == doctest::Approx(-p * al).epsilon(1e-12));
                CHECK(cov_entry(p, tau, jet.egg_a, jet.egg_a) ==
                      doctest::Approx(p * (p + 2 * (p - 1) * tau)).epsilon(1e-12));

                // cross-point anchors
                CHECK(cov_entry(p, tau, jet.zeta_a, jet.zeta_b) == doctest::Approx(p * al * ipw(r, p)).epsilon(1e-12));
                CHECK(cov_entry(p, tau, jet.g_a, jet.g_b) ==
                      doctest::Approx(p * overlap_g(mp, r)).epsilon(1e-12));
                CHECK(cov_entry(p, tau, jet.zeta_b, jet.g_a) ==
                      doctest::Approx(p * al * rstar * ipw(r, p - 1)).epsilon(1e-12));
                CHECK(cov_entry(p, tau, jet.zeta_a, jet.g_b) ==
                      doctest::Approx(-p * al * rstar * ipw(r, p - 1)).epsilon(1e-12));
                double a1 = p * rstar * ipw(r, p - 3) * (p * al * r * r - (p - 1) * (p - 2) * tau);
                CHECK(cov_entry(p, tau, jet.g_b, jet.egg_a) == doctest::Approx(a1).epsilon(1e-11).scale(pp));
                double a2q = p >= 4 ? ipw(r, p - 4) * rs2 * rs2 * p * (p - 1.0) * (p - 2) * (p - 3) * tau : 0.0;
                double a2 = a2q - ipw(r, p - 2) * rs2 * p * (p - 1.0) * (p + 5 * p * tau - 8 * tau) +
                            ipw(r, p) * p * (p + 2 * (p - 1.0) * tau);
                CHECK(cov_entry(p, tau, jet.egg_a, jet.egg_b) == doctest::Approx(a2).epsilon(1e-11).scale(pp));

                // edge cross-derivatives: the corrected quadratic forms
                CHECK(cov_entry(p, tau, jet.row_a, jet.row_b) ==
                      doctest::Approx(pp * ipw(r, p - 3) * (r * r - (p - 2) * rs2)).epsilon(1e-11).scale(pp));
                CHECK(cov_entry(p, tau, jet.col_a, jet.col_b) ==
                      doctest::Approx(pp * ipw(r, p - 3) * (r * r - tau * (p - 2) * rs2)).epsilon(1e-11).scale(pp));
                CHECK(cov_entry(p, tau, jet.col_a, jet.row_b) ==
                      doctest::Approx(tau * pp * ipw(r, p - 3) * (r * r - (p - 2) * rs2)).epsilon(1e-11).scale(pp));
                CHECK(cov_entry(p, tau, jet.col_a, jet.row_a) == doctest::Approx(tau * pp).epsilon(1e-12));
                CHECK(cov_entry(p, tau, jet.gi_b, jet.row_a) ==
                      doctest::Approx(pp * ipw(r, p - 2) * rstar).epsilon(1e-11).scale(pp));
                CHECK(cov_entry(p, tau, jet.gi_b, jet.col_a) ==
                      doctest::Approx(tau * pp * ipw(r, p - 2) * rstar).epsilon(1e-11).scale(pp));
                CHECK(cov_entry(p, tau, jet.gi_a, jet.row_b) ==
                      doctest::Approx(-pp * ipw(r, p - 2) * rstar).epsilon(1e-11).scale(pp));
            }
        }
    }
}

TEST_CASE("edge sector decouples from the conditioning sector") {
    auto jet = make_jet(6, 0.55);
    std::vector<cov_oracle::Element> edge = {jet.col_a, jet.row_a, jet.col_b, jet.row_b,
                                             jet.gi_a, jet.gi_b};
    std::vector<cov_oracle::Element> corner = {jet.zeta_a, jet.zeta_b, jet.g_a,
                                               jet.g_b,    jet.egg_a,  jet.egg_b};
    for (int p : {3, 5}) {
        for (const auto& e : edge)
            for (const auto& c : corner) CHECK(std::fabs(cov_entry(p, 0.6, e, c)) < 1e-12);
    }
}

TEST_CASE("conditional edge covariance matches a generic Schur reduction of the oracle") {
    for (int p : {3, 4, 5, 6}) {
        for (double tau : {0.0, 0.45, 0.8}) {
            for (double r : {-0.85, -0.4, 0.0, 0.15, 0.5, 0.9}) {
                ModelParams mp{p, tau};
                auto jet = make_jet(6, r);
                Eigen::MatrixXd full = cov_matrix(
                    p, tau, {jet.col_a, jet.row_a, jet.col_b, jet.row_b, jet.gi_a, jet.gi_b});
                Eigen::Matrix4d want = schur(full, 4) / (p * (p - 1.0));
                Eigen::Matrix4d got = sigma_z(mp, r);
                CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);
            }
        }
    }
}

TEST_CASE("corner law matches a generic Schur reduction of the oracle") {
    for (int p : {3, 4, 5, 6}) {
        for (double tau : {0.0, 0.45, 0.8}) {
            for (double r : {-0.85, -0.4, 0.0, 0.15, 0.5, 0.9}) {
                ModelParams mp{p, tau};
                auto jet = make_jet(6, r);
                // 6-vector (corner1, corner2, zeta1, zeta2, g1, g2) with
                // corner k = egg_k + zeta_k assembled by bilinearity
                std::vector<cov_oracle::Element> els = {jet.egg_a, jet.egg_b, jet.zeta_a,
                                                        jet.zeta_b, jet.g_a,  jet.g_b};
                Eigen::MatrixXd raw = cov_matrix(p, tau, els);
                Eigen::MatrixXd full(6, 6);
                Eigen::Matrix<double, 6, 6> lift = Eigen::Matrix<double, 6, 6>::Zero();
                lift(0, 0) = lift(1, 1) = 1.0;  // corner k = egg_k + zeta_k
                lift(0, 2) = lift(1, 3) = 1.0;
                lift(2, 2) = lift(3, 3) = lift(4, 4) = lift(5, 5) = 1.0;
                full = lift * raw * lift.transpose();

                CornerLaw law = sigma_s_and_mean(mp, r);
                Eigen::Matrix2d want_s = schur(full, 2) / (p * (p - 1.0));
                CHECK((law.sigma_s - want_s).cwiseAbs().maxCoeff() < 1e-9);

                Eigen::MatrixXd cross = full.topRightCorner(2, 4);
                Eigen::MatrixXd cond = full.bottomRightCorner(4, 4);
                Eigen::MatrixXd weights = cross * cond.inverse();
                CHECK((law.mean_w - weights.leftCols(2)).cwiseAbs().maxCoeff() < 1e-9);
            }
        }
    }
}

TEST_CASE("edge variances: closed forms, positivity, diagonal decay") {
    for (int p : {3, 4, 5, 6}) {
        for (double tau : {0.0, 0.45, 0.8}) {
            ModelParams mp{p, tau};
            double pp = p * (p - 1.0);

            EdgeVariances at0 = sigma_edge_variances(mp, 0.0);
            CHECK(at0.sigma1 == doctest::Approx(pp).epsilon(1e-14));

            double cal1 = 0.0, cal2 = 0.0;
            for (double r = -0.9; r <= 0.9001; r += 0.1) {
                EdgeVariances ev = sigma_edge_variances(mp, r);
                CHECK(ev.sigma1 > 0.0);
                CHECK(ev.sigma2 > 0.0);
                // definition consistency with the conditional edge covariance
                CHECK(ev.sigma1 == doctest::Approx(pp * sigma_z(mp, r)(1, 1)).epsilon(1e-10));
                // independent reduction for sigma2
                auto jet = make_jet(6, r);
                Eigen::MatrixXd full = cov_matrix(p, tau, {jet.egg_a, jet.g_a, jet.g_b});
                CHECK(ev.sigma2 == doctest::Approx(schur(full, 1)(0, 0)).epsilon(1e-9));
                cal1 = std::fmax(cal1, ev.sigma1 / (1.0 - r * r));
                cal2 = std::fmax(cal2, ev.sigma2 / (1.0 - r * r));
            }
            // the calibrated (1 - r^2) envelope keeps holding toward the diagonal
            for (double r : {0.99, 0.9999, -0.99, -0.9999}) {
                EdgeVariances ev = sigma_edge_variances(mp, r);
                CHECK(ev.sigma1 <= 1.25 * cal1 * (1.0 - r * r));
                CHECK(ev.sigma2 <= 1.25 * cal2 * (1.0 - r * r));
                CHECK(ev.sigma1 > 0.0);
                CHECK(ev.sigma2 > 0.0);
            }
        }
    }
    CHECK_THROWS_AS(sigma_edge_variances(ModelParams{4, 0.3}, 1.0), std::invalid_argument);
}

TEST_CASE("zero overlap decouples the two points once the order is high enough") {
    for (int p : {4, 5, 6}) {
        for (double tau : {0.0, 0.45, 0.8}) {
            ModelParams mp{p, tau};
            // the cross-point blocks vanish; each point keeps the within-matrix
            // transpose coupling tau between (i,last) and (last,i)
            Eigen::Matrix4d want = Eigen::Matrix4d::Identity();
            want(0, 1) = want(1, 0) = want(2, 3) = want(3, 2) = tau;
            CHECK((sigma_z(mp, 0.0) - want).cwiseAbs().maxCoeff() < 1e-14);
            CornerLaw law = sigma_s_and_mean(mp, 0.0);
            Eigen::Matrix2d want_s = (1.0 + tau) * Eigen::Matrix2d::Identity();
            if (p == 4) want_s(0, 1) = want_s(1, 0) = 2.0 * tau;  // quartic term survives
            CHECK((law.sigma_s - want_s).cwiseAbs().maxCoeff() < 1e-14);
            CHECK(law.mean_w.cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    // at p = 3 the transverse derivatives stay coupled across orthogonal points
    ModelParams mp3{3, 0.5};
    Eigen::Matrix4d z3 = sigma_z(mp3, 0.0);
    CHECK(z3(0, 2) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(z3(1, 3) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(z3(0, 3) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(sigma_s_and_mean(mp3, 0.0).sigma_s(0, 0) == doctest::Approx(1.0 + 0.5 - 2 * 0.25).epsilon(1e-12));
    // mean weights still vanish at zero overlap for every order
    CHECK(sigma_s_and_mean(mp3, 0.0).mean_w.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("conditional covariances stay positive semi-definite across overlaps") {
    for (int p : {3, 4, 5, 6}) {
        for (double tau : {0.0, 0.45, 0.8}) {
            ModelParams mp{p, tau};
            for (double r = -0.9; r <= 0.9001; r += 0.1) {
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> ez(sigma_z(mp, r));
                CHECK(ez.eigenvalues().minCoeff() > -1e-12);
                CornerLaw law = sigma_s_and_mean(mp, r);
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(law.sigma_s);
                CHECK(es.eigenvalues().minCoeff() > -1e-12);
                CHECK(law.sigma_s(0, 0) > 0.0);
                CHECK(law.sigma_s(1, 1) > 0.0);
                // symmetry of the assembled matrices
                CHECK((sigma_z(mp, r) - sigma_z(mp, r).transpose()).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
}

TEST_CASE("radial speed covariance agrees with the complexity module closed form") {
    Rng rng(4416);
    for (int rep = 0; rep < 10; ++rep) {
        int p = 3 + static_cast<int>(rng.next_unit() * 4);
        double tau = 0.05 + 0.9 * rng.next_unit();
        double r = -0.9 + 1.8 * rng.next_unit();
        ModelParams mp{p, tau};

        auto jet = make_jet(6, r);
        Eigen::MatrixXd full = cov_matrix(p, tau, {jet.zeta_a, jet.zeta_b, jet.g_a, jet.g_b});
        Eigen::Matrix2d cond = schur(full, 2);

        auto su = sigma_u(mp, r);
        auto inv = su.inverse();
        Eigen::Matrix2d inv_m;
        inv_m << inv[0], inv[1], inv[2], inv[3];
        CHECK((cond * inv_m - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        auto cov = su.cov();
        CHECK(cond(0, 0) == doctest::Approx(cov[0]).epsilon(1e-9));
        CHECK(cond(0, 1) == doctest::Approx(cov[1]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("psd square root: roundtrip, clipping, rejection") {
    Rng rng(907);
    Eigen::MatrixXd b(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) b(i, j) = rng.next_gauss();
    Eigen::MatrixXd m = b * b.transpose();
    Eigen::MatrixXd root = psd_sqrt(m);
    CHECK((root * root - m).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((root - root.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    // rank-deficient inputs come back with the negative dust clipped away
    Eigen::MatrixXd rank1 = Eigen::MatrixXd::Zero(3, 3);
    rank1(0, 0) = 4.0;
    Eigen::MatrixXd r1 = psd_sqrt(rank1);
    CHECK(r1(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK((r1 * r1 - rank1).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(psd_sqrt(-Eigen::MatrixXd::Identity(3, 3)), std::invalid_argument);

    // factors of the conditional covariances reproduce them on a grid
    ModelParams mp{5, 0.45};
    for (double r : {-0.8, 0.0, 0.6}) {
        Eigen::MatrixXd z = sigma_z(mp, r);
        Eigen::MatrixXd f = psd_sqrt(z);
        CHECK((f * f - z).cwiseAbs().maxCoeff() < 1e-12);
    }
}
