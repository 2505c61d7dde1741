#pragma once

/** @file
 * Two-stage selection: spike-and-slab regression of y on the lagged covariates,
 * then spike-and-slab regression of the stage-1 residuals on their own lags.
 */

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssar/armodel.hpp"
#include "ssar/data.hpp"
#include "ssar/error.hpp"
#include "ssar/rng.hpp"
#include "ssar/sampler.hpp"

namespace ssar {

struct TwoStageOptions {
    /// t_beta = { j : incl_j > beta_threshold_scale / p }
    double beta_threshold_scale = 1.0;
    /// t_phi = { l : incl_l > phi_threshold_scale / q }
    double phi_threshold_scale = 1.0;
    /// whiten by A(phi_hat) and rerun both stages once
    bool refine = false;
    /// throw NumericError when phi_hat is not stationary; forecasting needs this,
    /// support recovery does not
    bool require_stationary = true;
};

struct Stage1Result {
    PosteriorSummary summary;
    std::vector<Index> t_beta;
    VectorXd beta_hat;
    VectorXd residuals;
};

struct Stage2Result {
    PosteriorSummary summary;
    std::vector<Index> t_phi;
    ARCoefficients phi_hat;
};

struct TwoStageFit {
    std::vector<Index> t_beta;
    std::vector<Index> t_phi;
    VectorXd beta_hat;       ///< standardized scale, zero outside t_beta
    ARCoefficients phi_hat;  ///< zero outside t_phi
    VectorXd residuals;      ///< y - X beta_hat on the fitting data
    PosteriorSummary stage1;
    PosteriorSummary stage2;
};

namespace detail {

inline std::vector<Index> select_above(const VectorXd& incl, double cut) {
    std::vector<Index> out;
    for (Index j = 0; j < incl.size(); ++j)
        if (incl(j) > cut) out.push_back(j);
    return out;
}

inline PosteriorSummary empty_summary(Index p) {
    PosteriorSummary s;
    s.incl_prob = VectorXd::Zero(p);
    s.beta_mean = VectorXd::Zero(p);
    s.beta_mean_given_incl = VectorXd::Zero(p);
    s.beta_mean_se = VectorXd::Zero(p);
    return s;
}

} // namespace detail

inline Stage1Result fit_stage1(const VectorXd& y, const MatrixXd& X, const GibbsConfig& cfg,
                               const TwoStageOptions& opts = {}) {
    const Index p = X.cols();
    Stage1Result out;
    out.summary = summarize(gibbs_spike_slab(y, X, cfg));
    out.t_beta = detail::select_above(out.summary.incl_prob, opts.beta_threshold_scale / static_cast<double>(p));
    out.beta_hat = VectorXd::Zero(p);
    for (Index j : out.t_beta) out.beta_hat(j) = out.summary.beta_mean_given_incl(j);
    out.residuals = y - X * out.beta_hat;
    return out;
}

inline Stage1Result fit_stage1(const LaggedRegressionProblem& problem, const GibbsConfig& cfg,
                               const TwoStageOptions& opts = {}) {
    return fit_stage1(problem.y, problem.X, cfg, opts);
}

/// Residual spread below this (on the standardized response scale) is treated as zero.
inline constexpr double kResidualNoiseFloor = 1e-9;

/**
 * Regress eps_2..eps_n on the lag matrix (leading zero row dropped). Both sides
 * are centred and scaled for the sampler; coefficients are mapped back so
 * phi_hat applies to the raw residuals.
 */
inline Stage2Result fit_stage2(const VectorXd& residuals, Index q, const GibbsConfig& cfg,
                               const TwoStageOptions& opts = {}) {
    const Index n = residuals.size();
    if (q < 0) throw std::invalid_argument("fit_stage2: q must be non-negative");
    Stage2Result out;
    if (q == 0) {
        out.summary = detail::empty_summary(0);
        return out;
    }
    if (q >= n - 1)
        throw std::invalid_argument("fit_stage2: q = " + std::to_string(q) + " needs more than " +
                                    std::to_string(q + 1) + " residuals, got " + std::to_string(n));

    const MatrixXd E = build_residual_lag_matrix(residuals, q, true);
    const VectorXd target = residuals.tail(n - 1);
    const double m = static_cast<double>(target.size());

    const double t_mean = target.mean();
    const double t_scale = std::sqrt((target.array() - t_mean).square().sum() / m);
    if (!(t_scale > kResidualNoiseFloor)) {
        // residuals are rounding noise: nothing to select
        out.summary = detail::empty_summary(q);
        out.phi_hat = ARCoefficients(VectorXd::Zero(q));
        return out;
    }
    VectorXd e_mean = E.colwise().mean().transpose();
    VectorXd e_scale(q);
    for (Index l = 0; l < q; ++l) {
        const double s = std::sqrt((E.col(l).array() - e_mean(l)).square().sum() / m);
        e_scale(l) = s > 1e-12 ? s : 1.0;
    }
    const MatrixXd Es = (E.rowwise() - e_mean.transpose()).array().rowwise() / e_scale.transpose().array();
    const VectorXd ts = (target.array() - t_mean) / t_scale;

    out.summary = summarize(gibbs_spike_slab(ts, Es, cfg));
    out.t_phi = detail::select_above(out.summary.incl_prob, opts.phi_threshold_scale / static_cast<double>(q));
    VectorXd phi = VectorXd::Zero(q);
    for (Index l : out.t_phi) phi(l) = out.summary.beta_mean_given_incl(l) * t_scale / e_scale(l);
    out.phi_hat = ARCoefficients(std::move(phi));
    return out;
}

namespace detail {

inline void require_stationary(const ARCoefficients& phi) {
    if (phi.stationary()) return;
    double smallest = phi.root_moduli().empty() ? 0.0 : phi.root_moduli().front();
    throw NumericError("estimated error-lag coefficients are not stationary (smallest root modulus " +
                       std::to_string(smallest) + "); try fewer error lags or a tighter spike");
}

} // namespace detail

/**
 * Stage 1 then stage 2 on a standardized problem. Stage seeds are derived from
 * cfg.seed so the two chains draw from distinct streams.
 */
inline TwoStageFit fit_two_stage(const VectorXd& y, const MatrixXd& X, Index q, const GibbsConfig& cfg,
                                 const TwoStageOptions& opts = {}) {
    if (y.size() != X.rows()) throw std::invalid_argument("fit_two_stage: X and y row counts differ");
    GibbsConfig c1 = cfg;
    c1.seed = derive_seed(cfg.seed, 1);
    GibbsConfig c2 = cfg;
    c2.seed = derive_seed(cfg.seed, 2);

    Stage1Result s1 = fit_stage1(y, X, c1, opts);
    Stage2Result s2 = fit_stage2(s1.residuals, q, c2, opts);
    if (opts.require_stationary) detail::require_stationary(s2.phi_hat);

    if (opts.refine && q > 0 && !s2.t_phi.empty()) {
        const BandedLowerTriangular A = build_A_matrix(s2.phi_hat, y.size());
        GibbsConfig c3 = cfg;
        c3.seed = derive_seed(cfg.seed, 3);
        Stage1Result w = fit_stage1(whiten(A, y), whiten(A, X), c3, opts);
        s1.summary = w.summary;
        s1.t_beta = w.t_beta;
        s1.beta_hat = w.beta_hat;
        s1.residuals = y - X * s1.beta_hat;
        GibbsConfig c4 = cfg;
        c4.seed = derive_seed(cfg.seed, 4);
        s2 = fit_stage2(s1.residuals, q, c4, opts);
        if (opts.require_stationary) detail::require_stationary(s2.phi_hat);
    }

    TwoStageFit fit;
    fit.t_beta = std::move(s1.t_beta);
    fit.t_phi = std::move(s2.t_phi);
    fit.beta_hat = std::move(s1.beta_hat);
    fit.phi_hat = std::move(s2.phi_hat);
    fit.residuals = std::move(s1.residuals);
    fit.stage1 = std::move(s1.summary);
    fit.stage2 = std::move(s2.summary);
    return fit;
}

inline TwoStageFit fit_two_stage(const LaggedRegressionProblem& problem, Index q, const GibbsConfig& cfg,
                                 const TwoStageOptions& opts = {}) {
    return fit_two_stage(problem.y, problem.X, q, cfg, opts);
}

} // namespace ssar
