#pragma once

/** @file
 * Text output: 6-significant-digit numbers and the CSV tables written by the
 * command-line tool. All writers emit LF line endings and a fixed column order.
 */

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ssar/forecaster.hpp"
#include "ssar/simharness.hpp"

namespace ssar::io {

inline std::string fmt(double v) {
    if (v == 0.0) return "0"; // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("NA"); }

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << csv_field(cells[i]);
    }
    os << '\n';
}

/// q,sigma,p,TP,FP,FN,TN,accuracy
inline void write_selection_csv(std::ostream& os, const SimScenario& sc, const MeanConfusion& m) {
    write_row(os, {"q", "sigma", "p", "TP", "FP", "FN", "TN", "accuracy"});
    write_row(os, {std::to_string(sc.q), fmt(sc.sigma), std::to_string(sc.p), fmt(m.tp), fmt(m.fp), fmt(m.fn),
                   fmt(m.tn), fmt(m.accuracy)});
}

/// One row per replicate: rep,TP,FP,FN,TN,accuracy
inline void write_replicate_csv(std::ostream& os, const SelectionTable& t, bool phi) {
    write_row(os, {"rep", "TP", "FP", "FN", "TN", "accuracy"});
    for (const auto& r : t.replicates) {
        const ConfusionCounts& c = phi ? *r.phi : r.beta;
        write_row(os, {std::to_string(r.rep), std::to_string(c.tp), std::to_string(c.fp), std::to_string(c.fn),
                       std::to_string(c.tn), fmt(c.accuracy)});
    }
}

enum class MetricScale { Original, Transformed };

/// Wide layout, one column per horizon: metric,h1,h2,...
inline void write_horizon_table(std::ostream& os, const std::vector<HorizonMetrics>& hs,
                                MetricScale scale = MetricScale::Original, bool with_nrmse = true) {
    std::vector<std::string> header{"metric"};
    for (const auto& h : hs) header.push_back("h" + std::to_string(h.horizon));
    write_row(os, header);
    auto pick = [&](const HorizonMetrics& h) -> const PredictionMetrics& {
        return scale == MetricScale::Transformed ? *h.transformed : h.original;
    };
    auto row = [&](const char* name, auto get) {
        std::vector<std::string> cells{name};
        for (const auto& h : hs) cells.push_back(fmt(get(pick(h))));
        write_row(os, cells);
    };
    row("ME", [](const PredictionMetrics& m) { return std::optional<double>(m.me); });
    row("MAE", [](const PredictionMetrics& m) { return std::optional<double>(m.mae); });
    row("MSE", [](const PredictionMetrics& m) { return std::optional<double>(m.mse); });
    if (with_nrmse) row("NRMSE_pct", [](const PredictionMetrics& m) { return m.nrmse_percent(); });
    row("r", [](const PredictionMetrics& m) { return m.r; });
    row("R2", [](const PredictionMetrics& m) { return m.r2; });
}

/// origin,horizon,timestamp,actual,predicted[,actual_transformed,predicted_transformed]
inline void write_predictions_csv(std::ostream& os, const ForecastResult& res) {
    const bool tr = res.transform != ResponseTransform::None;
    std::vector<std::string> header{"origin", "horizon", "timestamp", "actual", "predicted"};
    if (tr) {
        header.push_back("actual_transformed");
        header.push_back("predicted_transformed");
    }
    write_row(os, header);
    for (const auto& r : res.records) {
        std::vector<std::string> cells{std::to_string(r.origin), std::to_string(r.horizon),
                                       r.timestamp.empty() ? std::to_string(r.row + 1) : r.timestamp, fmt(r.actual),
                                       fmt(r.predicted)};
        if (tr) {
            cells.push_back(fmt(r.actual_transformed));
            cells.push_back(fmt(r.predicted_transformed));
        }
        write_row(os, cells);
    }
}

/// Dataset as CSV with the time column first (named "t" when timestamps are absent).
inline void write_dataset_csv(std::ostream& os, const TimeSeriesDataset& ds) {
    std::vector<std::string> header{"t", ds.target_name};
    for (const auto& f : ds.feature_names) header.push_back(f);
    write_row(os, header);
    for (Index i = 0; i < ds.rows(); ++i) {
        std::vector<std::string> cells;
        cells.reserve(header.size());
        cells.push_back(ds.timestamps.empty() ? std::to_string(i + 1) : ds.timestamps[static_cast<std::size_t>(i)]);
        // full precision here: the file is an input, not a report
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", ds.y(i));
        cells.emplace_back(buf);
        for (Index j = 0; j < ds.features(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.X(i, j));
            cells.emplace_back(buf);
        }
        write_row(os, cells);
    }
}

} // namespace ssar::io
