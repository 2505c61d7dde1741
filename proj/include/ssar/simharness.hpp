#pragma once

/** @file
 * Synthetic regression-with-AR-errors data and the selection and prediction
 * experiments run on it.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include "ssar/armodel.hpp"
#include "ssar/data.hpp"
#include "ssar/forecaster.hpp"
#include "ssar/metrics.hpp"
#include "ssar/rng.hpp"
#include "ssar/twostage.hpp"

namespace ssar {

inline VectorXd default_beta_star(Index p) {
    static constexpr double head[] = {3.0, -3.0, 1.0, -1.0, 0.5};
    VectorXd b = VectorXd::Zero(p);
    for (Index j = 0; j < std::min<Index>(p, 5); ++j) b(j) = head[j];
    return b;
}

inline VectorXd default_phi_star(Index q) {
    static constexpr double head[] = {0.9, -0.9, 0.5, -0.5};
    VectorXd f = VectorXd::Zero(q);
    for (Index l = 0; l < std::min<Index>(q, 4); ++l) f(l) = head[l];
    return f;
}

struct SimScenario {
    Index n_obs = 500;
    Index p = 50;
    Index q = 10;
    std::optional<VectorXd> beta_star; ///< defaults to (3, -3, 1, -1, 0.5, 0, ...)
    std::optional<VectorXd> phi_star;  ///< defaults to (0.9, -0.9, 0.5, -0.5, 0, ...), cut to q
    double sigma = 1.0;
    int reps = 10;
    std::uint64_t seed = 1;
    /// corr(x_j, x_k) = rho^|j-k|; 0 gives independent columns
    double column_correlation = 0.0;
    Index error_burn_in = 0;

    VectorXd beta() const { return beta_star ? *beta_star : default_beta_star(p); }
    VectorXd phi() const { return phi_star ? *phi_star : default_phi_star(q); }

    void validate() const {
        if (n_obs < 2 || p < 1 || q < 0 || reps < 1) throw std::invalid_argument("SimScenario: bad dimensions");
        if (beta().size() != p) throw std::invalid_argument("SimScenario: beta_star length must equal p");
        if (phi().size() != q) throw std::invalid_argument("SimScenario: phi_star length must equal q");
        if (!ARCoefficients(phi()).stationary()) throw std::invalid_argument("SimScenario: phi_star is not stationary");
        if (!(sigma >= 0.0)) throw std::invalid_argument("SimScenario: sigma must be non-negative");
        if (!(std::abs(column_correlation) < 1.0))
            throw std::invalid_argument("SimScenario: column_correlation must lie in (-1, 1)");
    }
};

struct SyntheticTruth {
    VectorXd beta_star;
    VectorXd phi_star;
    VectorXd errors;
    std::uint64_t x_seed = 0;
    std::uint64_t error_seed = 0;
};

struct SyntheticData {
    TimeSeriesDataset dataset;
    SyntheticTruth truth;
};

/// Deterministic in (sc.seed, rep_index). Features are named x1..xp, the target y.
inline SyntheticData generate_synthetic(const SimScenario& sc, int rep_index) {
    sc.validate();
    const Index N = sc.n_obs;
    const Index p = sc.p;
    const std::uint64_t rep_seed = derive_seed(sc.seed, static_cast<std::uint64_t>(rep_index));

    SyntheticData out;
    out.truth.beta_star = sc.beta();
    out.truth.phi_star = sc.phi();
    out.truth.x_seed = derive_seed(rep_seed, 0);
    out.truth.error_seed = derive_seed(rep_seed, 1);

    SplitMix64 rng(out.truth.x_seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    const double rho = sc.column_correlation;
    const double innov = std::sqrt(1.0 - rho * rho);
    MatrixXd X(N, p);
    for (Index i = 0; i < N; ++i) {
        for (Index j = 0; j < p; ++j) {
            const double z = normal(rng);
            X(i, j) = j == 0 ? z : rho * X(i, j - 1) + innov * z;
        }
    }
    out.truth.errors = simulate_ar_errors(ARCoefficients(out.truth.phi_star), sc.sigma, N, out.truth.error_seed,
                                          sc.error_burn_in);

    auto& ds = out.dataset;
    ds.X = std::move(X);
    ds.y = ds.X * out.truth.beta_star + out.truth.errors;
    ds.target_name = "y";
    for (Index j = 0; j < p; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
    ds.timestamps.reserve(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i) ds.timestamps.push_back(std::to_string(i + 1));
    return out;
}

struct MeanConfusion {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    double tn = 0.0;
    double accuracy = 0.0;
    double accuracy_sd = 0.0; ///< across replicates
};

inline MeanConfusion average_confusion(const std::vector<ConfusionCounts>& runs) {
    MeanConfusion m;
    if (runs.empty()) return m;
    const double k = static_cast<double>(runs.size());
    for (const auto& c : runs) {
        m.tp += c.tp;
        m.fp += c.fp;
        m.fn += c.fn;
        m.tn += c.tn;
        m.accuracy += c.accuracy;
    }
    m.tp /= k;
    m.fp /= k;
    m.fn /= k;
    m.tn /= k;
    m.accuracy /= k;
    if (runs.size() > 1) {
        double ss = 0.0;
        for (const auto& c : runs) ss += (c.accuracy - m.accuracy) * (c.accuracy - m.accuracy);
        m.accuracy_sd = std::sqrt(ss / (k - 1.0));
    }
    return m;
}

struct ReplicateSelection {
    int rep = 0;
    ConfusionCounts beta;
    std::optional<ConfusionCounts> phi;
    VectorXd beta_hat; ///< original units
    VectorXd phi_hat;
};

struct SelectionTable {
    MeanConfusion beta;
    std::optional<MeanConfusion> phi; ///< absent when q = 0 or phi_star is all zero
    std::vector<ReplicateSelection> replicates;
};

struct ExperimentSettings {
    GibbsConfig gibbs;
    TwoStageOptions options;
    unsigned threads = 1;
    double rel_threshold = 1e-3;
};

/// Fit each replicate on its full sample (no rolling) and average the confusion counts.
inline SelectionTable run_selection_experiment(const SimScenario& sc, const ExperimentSettings& st = {}) {
    sc.validate();
    const bool score_phi = sc.q > 0 && sc.phi().cwiseAbs().maxCoeff() > 0.0;
    std::vector<ReplicateSelection> reps(static_cast<std::size_t>(sc.reps));

    detail::parallel_for(reps.size(), st.threads, [&](std::size_t i) {
        const int rep = static_cast<int>(i);
        const SyntheticData data = generate_synthetic(sc, rep);
        auto [problem, scaling] = standardize(build_lagged_design(data.dataset, 0, true));
        GibbsConfig g = st.gibbs;
        g.seed = derive_seed(derive_seed(sc.seed, static_cast<std::uint64_t>(rep)), 2);
        TwoStageOptions opts = st.options;
        // only the selected supports are scored here
        opts.require_stationary = false;
        const TwoStageFit fit = fit_two_stage(problem, sc.q, g, opts);

        ReplicateSelection& out = reps[i];
        out.rep = rep;
        out.beta_hat = scaling.unscale_coefficients(fit.beta_hat);
        out.phi_hat = fit.phi_hat.values();
        out.beta = confusion(out.beta_hat, data.truth.beta_star, st.rel_threshold);
        if (score_phi) out.phi = confusion(out.phi_hat, data.truth.phi_star, st.rel_threshold);
    });

    SelectionTable table;
    std::vector<ConfusionCounts> b, f;
    for (const auto& r : reps) {
        b.push_back(r.beta);
        if (r.phi) f.push_back(*r.phi);
    }
    table.beta = average_confusion(b);
    if (score_phi) table.phi = average_confusion(f);
    table.replicates = std::move(reps);
    return table;
}

struct PredictionExperiment {
    ForecastResult result;
    SyntheticTruth truth;
};

/**
 * Generate replicate 0, train on the first train_n rows and roll forward over
 * the rest with horizons 1..max_horizon.
 */
inline PredictionExperiment run_prediction_experiment(const SimScenario& sc, Index train_n, int max_horizon,
                                                      const ExperimentSettings& st = {}, int refit_every = 1) {
    sc.validate();
    if (max_horizon < 1) throw std::invalid_argument("run_prediction_experiment: horizon must be >= 1");
    if (train_n + max_horizon > sc.n_obs)
        throw std::invalid_argument("run_prediction_experiment: train_n + horizon exceeds n_obs");
    SyntheticData data = generate_synthetic(sc, 0);
    ForecastConfig fc;
    fc.h = max_horizon;
    fc.initial_window = train_n;
    fc.refit_every = refit_every;
    fc.q_max = sc.q;
    fc.r = 0;
    fc.contemporaneous = true;
    fc.gibbs = st.gibbs;
    fc.gibbs.seed = derive_seed(sc.seed, 0x7072656463ULL);
    fc.options = st.options;
    fc.threads = st.threads;
    return {rolling_backtest(data.dataset, fc), std::move(data.truth)};
}

} // namespace ssar
