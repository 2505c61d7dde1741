#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ssar {

struct ConfusionCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int tn = 0;
    double accuracy = 0.0;

    int total() const noexcept { return tp + fp + fn + tn; }
};

/**
 * Selection confusion against a known truth. An estimate counts as nonzero when
 * |estimated_j| > rel_threshold * min{|truth_k| : truth_k != 0}.
 */
inline ConfusionCounts confusion(std::span<const double> estimated, std::span<const double> truth,
                                 double rel_threshold = 1e-3) {
    if (estimated.size() != truth.size()) throw std::invalid_argument("confusion: length mismatch");
    double min_nonzero = std::numeric_limits<double>::infinity();
    for (double t : truth)
        if (t != 0.0) min_nonzero = std::min(min_nonzero, std::abs(t));
    if (!std::isfinite(min_nonzero)) throw std::invalid_argument("confusion: truth has no nonzero entry");
    const double cut = rel_threshold * min_nonzero;

    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool est = std::abs(estimated[i]) > cut;
        const bool act = truth[i] != 0.0;
        if (est && act) ++c.tp;
        else if (est) ++c.fp;
        else if (act) ++c.fn;
        else ++c.tn;
    }
    c.accuracy = truth.empty() ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(truth.size());
    return c;
}

inline ConfusionCounts confusion(const Eigen::VectorXd& estimated, const Eigen::VectorXd& truth,
                                 double rel_threshold = 1e-3) {
    return confusion(std::span<const double>(estimated.data(), static_cast<std::size_t>(estimated.size())),
                     std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())), rel_threshold);
}

struct PredictionMetrics {
    double me = 0.0;
    double mae = 0.0;
    double mse = 0.0;
    std::optional<double> nrmse; ///< RMSE / (max - min) of the actuals, as a fraction
    std::optional<double> r;
    std::optional<double> r2;
    std::size_t n = 0;

    std::optional<double> nrmse_percent() const {
        if (!nrmse) return std::nullopt;
        return 100.0 * *nrmse;
    }
};

/// ME, MAE, MSE, NRMSE, Pearson r and R^2 with TSS centred at mean(actual).
inline PredictionMetrics prediction_metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw std::invalid_argument("prediction_metrics: length mismatch");
    if (actual.empty()) throw std::invalid_argument("prediction_metrics: empty input");
    const auto n = static_cast<double>(actual.size());
    PredictionMetrics m;
    m.n = actual.size();
    double mean_a = 0.0, mean_p = 0.0;
    double lo = actual[0], hi = actual[0];
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        m.me += e;
        m.mae += std::abs(e);
        m.mse += e * e;
        mean_a += actual[i];
        mean_p += predicted[i];
        lo = std::min(lo, actual[i]);
        hi = std::max(hi, actual[i]);
    }
    const double rss = m.mse;
    m.me /= n;
    m.mae /= n;
    m.mse /= n;
    mean_a /= n;
    mean_p /= n;
    if (hi > lo) m.nrmse = std::sqrt(m.mse) / (hi - lo);

    double saa = 0.0, spp = 0.0, sap = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double da = actual[i] - mean_a;
        const double dp = predicted[i] - mean_p;
        saa += da * da;
        spp += dp * dp;
        sap += da * dp;
    }
    if (saa > 0.0) {
        m.r2 = 1.0 - rss / saa;
        if (spp > 0.0) m.r = sap / std::sqrt(saa * spp);
    }
    return m;
}

inline PredictionMetrics prediction_metrics(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    return prediction_metrics(std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())),
                              std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())));
}

} // namespace ssar
