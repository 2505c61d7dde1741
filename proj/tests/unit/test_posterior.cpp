#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "ssar/posterior.hpp"
#include "ssar/armodel.hpp"
#include "test_util.hpp"

using namespace ssar;

namespace {

ARCoefficients no_ar() { return ARCoefficients(Eigen::VectorXd(0)); }

Eigen::MatrixXd standardized(Eigen::MatrixXd X) {
    for (Index j = 0; j < X.cols(); ++j) {
        X.col(j).array() -= X.col(j).mean();
        X.col(j) *= std::sqrt(static_cast<double>(X.rows())) / X.col(j).norm();
    }
    return X;
}

Eigen::VectorXd standardized(Eigen::VectorXd y) {
    y.array() -= y.mean();
    return y * std::sqrt(static_cast<double>(y.size())) / y.norm();
}

Eigen::MatrixXd drop_column(const Eigen::MatrixXd& X, Index j) {
    Eigen::MatrixXd out(X.rows(), X.cols() - 1);
    for (Index k = 0, c = 0; k < X.cols(); ++k)
        if (k != j) out.col(c++) = X.col(k);
    return out;
}

} // namespace

TEST(Shrinkage, EmptyNuisanceNoArIsIdentity) {
    const auto M = shrinkage_matrix(Eigen::MatrixXd(5, 0), no_ar(), 1.0);
    EXPECT_LE((M - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Shrinkage, DiffuseRidgeAnnihilatesNuisanceColumns) {
    const Eigen::MatrixXd W = testutil::randn(30, 3, 2);
    const auto M = shrinkage_matrix(W, no_ar(), 1e8);
    for (Index k = 0; k < 3; ++k) EXPECT_LE((M * W.col(k)).norm(), 1e-6);
}

TEST(Shrinkage, MatchesDenseInverseOracle) {
    const Eigen::MatrixXd X = testutil::randn(6, 2, 3);
    const ARCoefficients phi{0.5};
    const double tau_sq = 0.1;
    const auto M = shrinkage_matrix(X, phi, std::sqrt(tau_sq));
    const Eigen::MatrixXd A = build_A_matrix(phi, 6).dense();
    const Eigen::MatrixXd AtA_inv = (A.transpose() * A).inverse();
    // the covariance of the marginal for y is tau^2 X X' + (A'A)^{-1}
    const Eigen::MatrixXd oracle = (tau_sq * X * X.transpose() + AtA_inv).inverse();
    EXPECT_LE((M - oracle).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Shrinkage, RejectsNonStationaryPhi) {
    EXPECT_THROW(shrinkage_matrix(Eigen::MatrixXd(4, 0), ARCoefficients{1.2}, 1.0), std::invalid_argument);
}

TEST(BetaHat, ExactRatio) {
    const Eigen::VectorXd x = testutil::randn(10, 4);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(10, 10);
    EXPECT_NEAR(beta_hat(x, I, 2.0 * x), 2.0, 1e-14);
    Eigen::VectorXd y = testutil::randn(10, 5);
    y -= (x.dot(y) / x.squaredNorm()) * x;
    EXPECT_NEAR(beta_hat(x, I, y), 0.0, 1e-14);
}

TEST(BetaHat, EqualsGlsOracle) {
    const Eigen::VectorXd x = testutil::randn(20, 6);
    const Eigen::VectorXd y = testutil::randn(20, 7);
    const ARCoefficients phi{0.4, -0.2};
    const auto M = shrinkage_matrix(Eigen::MatrixXd(20, 0), phi, 1.0);
    const Eigen::MatrixXd A = build_A_matrix(phi, 20).dense();
    // ordinary least squares of A y on A x
    const Eigen::MatrixXd Ax = A * x;
    const double oracle = Ax.colPivHouseholderQr().solve(A * y)(0);
    EXPECT_NEAR(beta_hat(x, M, y), oracle, 1e-10);
}

TEST(BetaHat, DegenerateDenominator) {
    EXPECT_THROW(beta_hat(Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Ones(4)),
                 NumericError);
}

TEST(CoefficientPosterior, EqualScalesGivePriorProbability) {
    const Eigen::MatrixXd X = standardized(testutil::randn(40, 4, 8));
    const Eigen::VectorXd y = standardized(Eigen::VectorXd(X.col(0) + testutil::randn(40, 9)));
    ScreenConfig cfg = ScreenConfig::defaults(40, 4);
    cfg.tau0 = cfg.tau1 = 0.3;
    cfg.q_incl = 0.2;
    for (Index j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(coefficient_posterior(j, y, X, no_ar(), cfg).incl_prob, 0.2);
}

TEST(CoefficientPosterior, MatchesDenseShrinkageForms) {
    const Eigen::MatrixXd X = standardized(testutil::randn(50, 5, 10));
    const Eigen::VectorXd y = standardized(Eigen::VectorXd(2.0 * X.col(1) + testutil::randn(50, 11)));
    const ARCoefficients phi{0.5, -0.3};
    const ScreenConfig cfg = ScreenConfig::defaults(50, 5);
    const auto all = screen_all(y, X, phi, cfg);
    for (Index j = 0; j < 5; ++j) {
        const auto M = shrinkage_matrix(drop_column(X, j), phi, cfg.tau_ridge);
        const Eigen::VectorXd xj = X.col(j);
        const double s = xj.dot(M * xj), c = xj.dot(M * y), yMy = y.dot(M * y);
        const auto p = all[static_cast<std::size_t>(j)];
        EXPECT_NEAR(p.s, s, 1e-8 * std::abs(s));
        EXPECT_NEAR(p.c, c, 1e-8 * std::max(1.0, std::abs(c)));
        EXPECT_NEAR(p.yMy, yMy, 1e-8 * yMy);
        EXPECT_NEAR(p.beta_hat, beta_hat(xj, M, y), 1e-8);
        EXPECT_EQ(p.incl_prob, coefficient_posterior(j, y, X, phi, cfg).incl_prob);
        // spike and slab centres
        EXPECT_NEAR(p.mu1, c / (s + 1.0 / (cfg.tau1 * cfg.tau1)), 1e-8);
        EXPECT_NEAR(p.mu0, c / (s + 1.0 / (cfg.tau0 * cfg.tau0)), 1e-8);
    }
    EXPECT_GT(all[1].incl_prob, 0.99);
}

TEST(CoefficientPosterior, NoiseRarelyIncluded) {
    int below = 0;
    const Index n = 200, p = 10;
    for (unsigned rep = 0; rep < 100; ++rep) {
        const Eigen::MatrixXd X = standardized(testutil::randn(n, p, 1000 + rep));
        const Eigen::VectorXd y = standardized(testutil::randn(n, 5000 + rep));
        if (coefficient_posterior(0, y, X, no_ar(), ScreenConfig::defaults(n, p)).incl_prob < 0.5) ++below;
    }
    EXPECT_GE(below, 90);
}

TEST(CoefficientPosterior, StrongSignalIncluded) {
    const Index n = 200, p = 10;
    for (unsigned rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd Xr = testutil::randn(n, p, 200 + rep);
        const Eigen::VectorXd yr = 3.0 * Xr.col(0) + testutil::randn(n, 300 + rep);
        const Eigen::MatrixXd X = standardized(Xr);
        const Eigen::VectorXd y = standardized(yr);
        EXPECT_GT(coefficient_posterior(0, y, X, no_ar(), ScreenConfig::defaults(n, p)).incl_prob, 0.99);
    }
}

TEST(CoefficientPosterior, SpikeCentreShrinksWithSpikeVariance) {
    const Index n = 80, p = 4;
    const Eigen::MatrixXd X = standardized(testutil::randn(n, p, 41));
    const Eigen::VectorXd y = standardized(Eigen::VectorXd(X.col(0) + testutil::randn(n, 42)));
    ScreenConfig cfg = ScreenConfig::defaults(n, p);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 6; ++k) {
        const double mu0 = std::abs(coefficient_posterior(0, y, X, no_ar(), cfg).mu0);
        EXPECT_LE(mu0, prev);
        prev = mu0;
        cfg.tau0 /= std::sqrt(2.0);
    }
}

TEST(CoefficientPosterior, LargeSampleStaysFinite) {
    const Index n = 10000, p = 3;
    const Eigen::MatrixXd X = standardized(testutil::randn(n, p, 51));
    const Eigen::VectorXd y = standardized(Eigen::VectorXd(0.05 * X.col(0) + testutil::randn(n, 52)));
    for (const auto& post : screen_all(y, X, ARCoefficients{0.3}, ScreenConfig::defaults(n, p))) {
        EXPECT_TRUE(std::isfinite(post.logF0));
        EXPECT_TRUE(std::isfinite(post.logF1));
        EXPECT_GE(post.incl_prob, 0.0);
        EXPECT_LE(post.incl_prob, 1.0);
        EXPECT_GT(post.psi0, 0.0);
        EXPECT_GT(post.psi1, 0.0);
    }
}

TEST(InclusionOdds, Algebra) {
    EXPECT_DOUBLE_EQ(inclusion_odds(-3.0, -3.0, 0.5), 0.5);
    EXPECT_EQ(inclusion_odds(0.0, 5.0, 0.0), 0.0);
    EXPECT_EQ(inclusion_odds(5.0, 0.0, 1.0), 1.0);
    EXPECT_NEAR(inclusion_odds(0.0, std::log(3.0), 0.25), 0.5, 1e-15);
    EXPECT_NEAR(inclusion_odds(1000.0, 0.0, 0.5), 0.0, 1e-300);
    EXPECT_NEAR(inclusion_odds(0.0, 1000.0, 0.5), 1.0, 1e-15);
    double prev = 0.0;
    for (double d = -10; d <= 10; d += 0.5) {
        const double p = inclusion_odds(0.0, d, 0.3);
        EXPECT_GE(p, prev);
        prev = p;
    }
}

TEST(EigenDiagnostic, IdentityAndProjector) {
    const auto r = eigen_diagnostic(Eigen::MatrixXd::Identity(4, 4));
    EXPECT_NEAR(r.min, 1.0, 1e-15);
    EXPECT_NEAR(r.max, 1.0, 1e-15);
    const Eigen::MatrixXd W = testutil::randn(8, 2, 61);
    const Eigen::MatrixXd P = W * (W.transpose() * W).inverse() * W.transpose();
    const Eigen::MatrixXd IP = Eigen::MatrixXd::Identity(8, 8) - P;
    EXPECT_NEAR(eigen_diagnostic(0.5 * (IP + IP.transpose())).min, 0.0, 1e-12);
    Eigen::Matrix2d asym;
    asym << 1, 0.5, 0, 1;
    EXPECT_THROW(eigen_diagnostic(asym), std::invalid_argument);
}

TEST(EigenDiagnostic, ShrinkageIsPositiveSemidefinite) {
    for (unsigned rep = 0; rep < 5; ++rep) {
        const Eigen::MatrixXd X = testutil::randn(100, 19, 70 + rep);
        const ARCoefficients phi(testutil::random_stationary_phi(3, 80 + rep));
        const auto M = shrinkage_matrix(X, phi, std::sqrt(1.0 / 100.0));
        EXPECT_GE(eigen_diagnostic(M).min, -1e-10);
    }
}

TEST(MixtureDensity, ComponentsMatchNumericalMarginal) {
    const Index n = 25, p = 3;
    const Eigen::MatrixXd X = standardized(testutil::randn(n, p, 90));
    const Eigen::VectorXd y = standardized(Eigen::VectorXd(0.8 * X.col(0) + testutil::randn(n, 91)));
    const ScreenConfig cfg = ScreenConfig::defaults(n, p);
    const auto post = coefficient_posterior(0, y, X, ARCoefficients{0.2}, cfg);

    // beta | y, Z = 1 with sigma^2 integrated out has kernel
    // (b + (y'My - 2 c beta + (s + tau1^-2) beta^2) / 2)^-(a + (n + 1) / 2)
    const double d = post.s + 1.0 / (cfg.tau1 * cfg.tau1);
    auto kernel = [&](double b) {
        return std::pow(cfg.b + 0.5 * (post.yMy - 2.0 * post.c * b + d * b * b),
                        -(cfg.a + 0.5 * static_cast<double>(n + 1)));
    };
    const double lo = post.mu1 - 3.0, hi = post.mu1 + 3.0;
    const int steps = 20000;
    const double h = (hi - lo) / steps;
    double z = 0.0;
    for (int i = 0; i <= steps; ++i) z += (i == 0 || i == steps ? 0.5 : 1.0) * kernel(lo + i * h);
    z *= h;
    for (double b : {post.mu1 - 0.4, post.mu1, post.mu1 + 0.25}) {
        const double exact = kernel(b) / z;
        const double t = student_t_density(b, post.dof, post.mu1, 2.0 * post.psi1);
        EXPECT_NEAR(t, exact, 1e-6 * exact);
    }

    // the full mixture integrates to one
    double total = 0.0;
    const double a2 = std::min(post.mu0, post.mu1) - 4.0, b2 = std::max(post.mu0, post.mu1) + 4.0;
    const int m = 200000;
    const double h2 = (b2 - a2) / m;
    for (int i = 0; i <= m; ++i) total += (i == 0 || i == m ? 0.5 : 1.0) * mixture_density(post, a2 + i * h2);
    EXPECT_NEAR(total * h2, 1.0, 1e-6);
}

TEST(ScreenPriorResolve, DefaultsAndOverrides) {
    const auto c = ScreenPrior{}.resolve(100, 20);
    EXPECT_NEAR(c.tau0 * c.tau0, 1.0 / 2000.0, 1e-15);
    EXPECT_NEAR(c.tau_ridge * c.tau_ridge, 0.01, 1e-15);
    EXPECT_DOUBLE_EQ(c.q_incl, 0.05);
    EXPECT_DOUBLE_EQ(ScreenPrior{}.resolve(100, 1).q_incl, 0.5);
    ScreenPrior pr;
    pr.tau1_sq = 4.0;
    pr.b = 2.0;
    EXPECT_DOUBLE_EQ(pr.resolve(10, 2).tau1, 2.0);
    pr.tau0_sq = 9.0;
    EXPECT_THROW(pr.resolve(10, 2), std::invalid_argument);
}
