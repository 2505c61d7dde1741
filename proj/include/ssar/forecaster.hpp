#pragma once

/** @file
 * h-step forecasts with AR error correction, and the expanding-window
 * rolling backtest.
 */

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ssar/data.hpp"
#include "ssar/error.hpp"
#include "ssar/metrics.hpp"
#include "ssar/rng.hpp"
#include "ssar/twostage.hpp"

namespace ssar {

/**
 * Predictions for steps 1..h: yhat_{n+j} = x_{n+j}' beta_hat + epshat_{n+j}, where
 * the error forecasts follow the AR recursion started from eps_history (oldest
 * first, most recent last). Everything is on the scale the fit was made on.
 */
inline VectorXd forecast_from_fit(const TwoStageFit& fit, const MatrixXd& x_future, const VectorXd& eps_history,
                                  Index h) {
    if (h < 1) throw std::invalid_argument("forecast_from_fit: h must be >= 1");
    if (x_future.rows() < h)
        throw DataError("forecast_from_fit: covariate rows for " + std::to_string(h) + " steps are required, got " +
                        std::to_string(x_future.rows()));
    if (x_future.cols() != fit.beta_hat.size())
        throw std::invalid_argument("forecast_from_fit: covariate width " + std::to_string(x_future.cols()) +
                                    " does not match " + std::to_string(fit.beta_hat.size()) + " coefficients");
    const Index q = fit.phi_hat.order();
    if (eps_history.size() < q)
        throw std::invalid_argument("forecast_from_fit: need the last " + std::to_string(q) + " residuals");

    // buf holds the q most recent errors followed by the forecasts
    VectorXd buf(q + h);
    buf.head(q) = eps_history.tail(q);
    VectorXd out(h);
    for (Index j = 0; j < h; ++j) {
        double e = 0.0;
        for (Index l = 1; l <= q; ++l) e += fit.phi_hat[l - 1] * buf(q + j - l);
        buf(q + j) = e;
        out(j) = x_future.row(j).dot(fit.beta_hat) + e;
    }
    return out;
}

inline VectorXd forecast_from_fit(const TwoStageFit& fit, const MatrixXd& x_future, const VectorXd& eps_history) {
    return forecast_from_fit(fit, x_future, eps_history, std::max<Index>(x_future.rows(), 1));
}

struct ForecastConfig {
    int h = 1;
    std::optional<Index> initial_window; ///< T0; floor(2N/3) when unset
    int refit_every = 1;
    Index q_max = 10;
    int r = 0;
    bool contemporaneous = true;
    ResponseTransform transform = ResponseTransform::None;
    GibbsConfig gibbs;
    TwoStageOptions options;
    unsigned threads = 1;

    Index window(Index N) const { return initial_window ? *initial_window : (2 * N) / 3; }

    void validate(Index N) const {
        if (h < 1) throw std::invalid_argument("ForecastConfig: h must be >= 1");
        if (refit_every < 1) throw std::invalid_argument("ForecastConfig: refit_every must be >= 1");
        if (q_max < 0) throw std::invalid_argument("ForecastConfig: q_max must be >= 0");
        const Index T0 = window(N);
        if (T0 + h > N)
            throw DataError("backtest: initial window " + std::to_string(T0) + " plus horizon " + std::to_string(h) +
                            " exceeds " + std::to_string(N) + " rows");
        if (T0 - r < q_max + 3)
            throw DataError("backtest: initial window " + std::to_string(T0) + " is too small for " +
                            std::to_string(r) + " covariate lags and " + std::to_string(q_max) + " error lags");
        gibbs.validate();
    }
};

struct ForecastRecord {
    Index origin = 0;  ///< number of training rows
    int horizon = 0;   ///< 1..h
    Index row = 0;     ///< dataset row being predicted (0-based)
    std::string timestamp;
    double actual = 0.0;
    double predicted = 0.0;
    double actual_transformed = 0.0;
    double predicted_transformed = 0.0;
};

struct HorizonMetrics {
    int horizon = 0;
    PredictionMetrics original;
    std::optional<PredictionMetrics> transformed;
};

struct ForecastResult {
    std::vector<ForecastRecord> records; ///< ordered by origin, then horizon
    std::vector<HorizonMetrics> horizons;
    Index initial_window = 0;
    Index origins = 0;
    Index fits = 0;
    int refit_every = 1;
    ResponseTransform transform = ResponseTransform::None;
};

namespace detail {

/// Run fn(i) for i in [0, count) on up to `threads` workers; rethrows the lowest-index failure.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, count)));
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        auto work = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                    failed = true;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/**
 * Expanding-window backtest. For each origin n = T0..N-h the model is fitted
 * on rows [0, n) (or reused from the last refit origin), scaled with
 * statistics of that window only, and used to predict rows n..n+h-1.
 * Fits at different origins use seeds derive_seed(gibbs.seed, n) and are
 * independent, so blocks run in parallel and merge by origin.
 */
inline ForecastResult rolling_backtest(const TimeSeriesDataset& ds, const ForecastConfig& fc) {
    ds.validate();
    const Index N = ds.rows();
    fc.validate(N);
    if (ds.has_missing()) throw DataError("backtest: dataset has missing cells; interpolate first");

    TimeSeriesDataset dst = ds;
    dst.y = transform_response(ds.y, fc.transform);
    const LaggedRegressionProblem full = build_lagged_design(dst, fc.r, fc.contemporaneous);
    const std::vector<std::string> names = full.column_names();
    const Index r = fc.r;

    const Index T0 = fc.window(N);
    const Index last_origin = N - fc.h;
    const Index n_origins = last_origin - T0 + 1;
    const Index block = fc.refit_every;
    const Index n_blocks = (n_origins + block - 1) / block;

    std::vector<std::vector<ForecastRecord>> per_block(static_cast<std::size_t>(n_blocks));

    detail::parallel_for(static_cast<std::size_t>(n_blocks), fc.threads, [&](std::size_t b) {
        const Index n0 = T0 + static_cast<Index>(b) * block;
        const Index n_end = std::min(n0 + block - 1, last_origin);
        const Index m0 = n0 - r; // problem rows in the training window

        const ScalingParams sc = fit_scaling(full.X.topRows(m0), full.y.head(m0), names, ds.target_name);
        const MatrixXd Xs = sc.apply_x(full.X.topRows(m0));
        const VectorXd ys = sc.apply_y(full.y.head(m0));
        GibbsConfig g = fc.gibbs;
        g.seed = derive_seed(fc.gibbs.seed, static_cast<std::uint64_t>(n0));
        const TwoStageFit fit = fit_two_stage(ys, Xs, fc.q_max, g, fc.options);

        auto& out = per_block[b];
        for (Index n = n0; n <= n_end; ++n) {
            const Index m = n - r;
            VectorXd eps;
            if (n == n0) {
                eps = fit.residuals;
            } else {
                eps = sc.apply_y(full.y.head(m)) - sc.apply_x(full.X.topRows(m)) * fit.beta_hat;
            }
            const MatrixXd x_future = sc.apply_x(full.X.middleRows(m, fc.h));
            const VectorXd pred_std = forecast_from_fit(fit, x_future, eps, fc.h);
            for (int j = 1; j <= fc.h; ++j) {
                ForecastRecord rec;
                rec.origin = n;
                rec.horizon = j;
                rec.row = n + j - 1;
                if (!ds.timestamps.empty()) rec.timestamp = ds.timestamps[static_cast<std::size_t>(rec.row)];
                rec.predicted_transformed = sc.invert_y(pred_std(j - 1));
                rec.actual_transformed = dst.y(rec.row);
                rec.predicted = inverse_transform(rec.predicted_transformed, fc.transform);
                rec.actual = ds.y(rec.row);
                out.push_back(std::move(rec));
            }
        }
    });

    ForecastResult res;
    res.initial_window = T0;
    res.origins = n_origins;
    res.fits = n_blocks;
    res.refit_every = fc.refit_every;
    res.transform = fc.transform;
    res.records.reserve(static_cast<std::size_t>(n_origins * fc.h));
    for (auto& blk : per_block)
        for (auto& rec : blk) res.records.push_back(std::move(rec));

    for (int j = 1; j <= fc.h; ++j) {
        std::vector<double> a, p, at, pt;
        for (const auto& rec : res.records) {
            if (rec.horizon != j) continue;
            a.push_back(rec.actual);
            p.push_back(rec.predicted);
            at.push_back(rec.actual_transformed);
            pt.push_back(rec.predicted_transformed);
        }
        HorizonMetrics hm;
        hm.horizon = j;
        hm.original = prediction_metrics(a, p);
        if (fc.transform != ResponseTransform::None) hm.transformed = prediction_metrics(at, pt);
        res.horizons.push_back(std::move(hm));
    }
    return res;
}

} // namespace ssar
