#pragma once

/** @file
 * Spike-and-slab Gibbs sampler for standardized linear regression, and an
 * exact 2^p enumeration of the same posterior for small p.
 *
 * Prior: beta_j | Z_j, sigma^2 ~ N(0, sigma^2 tau_{Z_j}^2), Z_j ~ Bern(q),
 * sigma^2 ~ IG(a, b). Each scan visits j = 1..p, drawing Z_j with beta_j
 * integrated out and then beta_j | Z_j, and finishes with sigma^2.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "ssar/posterior.hpp"
#include "ssar/rng.hpp"

namespace ssar {

struct GibbsConfig {
    int iterations = 5000; ///< total scans, burn-in included
    int burn_in = 1000;
    std::uint64_t seed = 1;
    ScreenPrior prior;

    void validate() const {
        if (iterations < 1 || burn_in < 0 || burn_in >= iterations)
            throw std::invalid_argument("GibbsConfig: need 0 <= burn_in < iterations");
    }
};

using IndicatorMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Kept draws, one row per retained scan.
struct PosteriorDraws {
    IndicatorMatrix Z;
    MatrixXd beta;
    VectorXd sigma_sq;

    Index kept() const noexcept { return beta.rows(); }
    Index p() const noexcept { return beta.cols(); }
};

struct PosteriorSummary {
    VectorXd incl_prob;
    VectorXd beta_mean;
    VectorXd beta_mean_given_incl;
    double sigma_sq_mean = 0.0;
    /// Monte Carlo standard error of beta_mean (naive, ignores autocorrelation)
    VectorXd beta_mean_se;
};

inline PosteriorDraws gibbs_spike_slab(const VectorXd& y, const MatrixXd& X, const GibbsConfig& cfg) {
    cfg.validate();
    const Index n = X.rows();
    const Index p = X.cols();
    if (p < 1) throw std::invalid_argument("gibbs_spike_slab: need at least one column");
    if (y.size() != n) throw std::invalid_argument("gibbs_spike_slab: X and y row counts differ");
    if (!y.allFinite() || !X.allFinite()) throw std::invalid_argument("gibbs_spike_slab: non-finite input");

    const ScreenConfig prior = cfg.prior.resolve(n, p);
    const double prec[2] = {1.0 / (prior.tau0 * prior.tau0), 1.0 / (prior.tau1 * prior.tau1)};
    const double half_log_prec[2] = {0.5 * std::log(prec[0]), 0.5 * std::log(prec[1])};
    const double prior_log_odds = std::log(prior.q_incl) - std::log1p(-prior.q_incl);

    const MatrixXd G = X.transpose() * X;
    const VectorXd Xty = X.transpose() * y;
    const double yty = y.squaredNorm();

    SplitMix64 rng(cfg.seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    boost::random::uniform_01<double> unif;

    VectorXd beta = VectorXd::Zero(p);
    VectorXd Gbeta = VectorXd::Zero(p);
    std::vector<std::uint8_t> z(static_cast<std::size_t>(p), 0);
    double sigma_sq = std::max(yty / static_cast<double>(n), 1e-12);

    const Index kept = cfg.iterations - cfg.burn_in;
    PosteriorDraws draws{IndicatorMatrix(kept, p), MatrixXd(kept, p), VectorXd(kept)};
    const double shape = prior.a + 0.5 * static_cast<double>(n + p);

    for (int it = 0; it < cfg.iterations; ++it) {
        for (Index j = 0; j < p; ++j) {
            const double s = G(j, j);
            // x_j' (y - X_{-j} beta_{-j})
            const double r = Xty(j) - Gbeta(j) + s * beta(j);
            double log_m[2];
            for (int k = 0; k < 2; ++k) {
                const double d = s + prec[k];
                log_m[k] = half_log_prec[k] - 0.5 * std::log(d) + 0.5 * r * r / (sigma_sq * d);
            }
            const double log_odds = prior_log_odds + log_m[1] - log_m[0];
            const double p1 = log_odds >= 0.0 ? 1.0 / (1.0 + std::exp(-log_odds))
                                              : std::exp(log_odds) / (1.0 + std::exp(log_odds));
            const int zk = unif(rng) < p1 ? 1 : 0;
            const double d = s + prec[zk];
            const double b_new = r / d + std::sqrt(sigma_sq / d) * normal(rng);
            const double delta = b_new - beta(j);
            if (delta != 0.0) Gbeta.noalias() += delta * G.col(j);
            beta(j) = b_new;
            z[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(zk);
        }
        double penalty = 0.0;
        for (Index j = 0; j < p; ++j) penalty += beta(j) * beta(j) * prec[z[static_cast<std::size_t>(j)]];
        const double rss = std::max(0.0, yty - 2.0 * beta.dot(Xty) + beta.dot(Gbeta));
        const double rate = prior.b + 0.5 * rss + 0.5 * penalty;
        boost::random::gamma_distribution<double> gamma(shape, 1.0 / rate);
        sigma_sq = 1.0 / gamma(rng);

        if (it >= cfg.burn_in) {
            const Index row = it - cfg.burn_in;
            for (Index j = 0; j < p; ++j) draws.Z(row, j) = z[static_cast<std::size_t>(j)];
            draws.beta.row(row) = beta.transpose();
            draws.sigma_sq(row) = sigma_sq;
        }
    }
    return draws;
}

inline PosteriorSummary summarize(const PosteriorDraws& draws) {
    const Index kept = draws.kept();
    const Index p = draws.p();
    if (kept < 1) throw std::invalid_argument("summarize: no kept draws");
    PosteriorSummary s;
    s.incl_prob = VectorXd::Zero(p);
    s.beta_mean = draws.beta.colwise().mean().transpose();
    s.beta_mean_given_incl = VectorXd::Zero(p);
    s.beta_mean_se = VectorXd::Zero(p);
    for (Index j = 0; j < p; ++j) {
        double included = 0.0;
        double sum_incl = 0.0;
        for (Index t = 0; t < kept; ++t) {
            if (draws.Z(t, j)) {
                included += 1.0;
                sum_incl += draws.beta(t, j);
            }
        }
        s.incl_prob(j) = included / static_cast<double>(kept);
        s.beta_mean_given_incl(j) = included > 0.0 ? sum_incl / included : 0.0;
        if (kept > 1) {
            const double var = (draws.beta.col(j).array() - s.beta_mean(j)).square().sum() /
                               static_cast<double>(kept - 1);
            s.beta_mean_se(j) = std::sqrt(var / static_cast<double>(kept));
        }
    }
    s.sigma_sq_mean = draws.sigma_sq.mean();
    return s;
}

inline constexpr Index kMaxEnumerationColumns = 12;

/**
 * Exact posterior inclusion probabilities by summing the normal-inverse-gamma
 * marginal likelihood over all 2^p inclusion patterns:
 *
 *   log p(y | Z) = -1/2 log|I + D^{1/2} X'X D^{1/2}|
 *                  - (a + n/2) log(b + 1/2 y'(I + X D X')^{-1} y) + const,
 *
 * with D = diag(tau_{Z_j}^2).
 */
inline VectorXd exact_enumeration_posterior(const VectorXd& y, const MatrixXd& X, const ScreenPrior& prior_spec) {
    const Index n = X.rows();
    const Index p = X.cols();
    if (p < 1) throw std::invalid_argument("exact_enumeration_posterior: need at least one column");
    if (p > kMaxEnumerationColumns)
        throw std::invalid_argument("exact_enumeration_posterior: p = " + std::to_string(p) + " exceeds 12");
    const ScreenConfig prior = prior_spec.resolve(n, p);
    const MatrixXd G = X.transpose() * X;
    const VectorXd Xty = X.transpose() * y;
    const double yty = y.squaredNorm();
    const double shape = prior.a + 0.5 * static_cast<double>(n);
    const double log_q = std::log(prior.q_incl);
    const double log_1mq = std::log1p(-prior.q_incl);

    const std::uint32_t models = 1u << p;
    std::vector<double> log_post(models);
    VectorXd d(p);
    for (std::uint32_t mask = 0; mask < models; ++mask) {
        double log_prior = 0.0;
        for (Index j = 0; j < p; ++j) {
            const bool on = (mask >> j) & 1u;
            d(j) = on ? prior.tau1 : prior.tau0;
            log_prior += on ? log_q : log_1mq;
        }
        MatrixXd S = d.asDiagonal() * G * d.asDiagonal();
        S.diagonal().array() += 1.0;
        Eigen::LLT<MatrixXd> llt(S);
        const VectorXd v = d.asDiagonal() * Xty;
        const double quad = yty - v.dot(llt.solve(v));
        const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        log_post[mask] = log_prior - 0.5 * log_det - shape * std::log(prior.b + 0.5 * quad);
    }
    const double mx = *std::max_element(log_post.begin(), log_post.end());
    double total = 0.0;
    VectorXd incl = VectorXd::Zero(p);
    for (std::uint32_t mask = 0; mask < models; ++mask) {
        const double w = std::exp(log_post[mask] - mx);
        total += w;
        for (Index j = 0; j < p; ++j)
            if ((mask >> j) & 1u) incl(j) += w;
    }
    return incl / total;
}

} // namespace ssar
