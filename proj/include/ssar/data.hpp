#pragma once

/** @file
 * Dataset ingestion, gap filling, lag expansion, standardization and response
 * transformations.
 *
 * Missing observations are carried as quiet NaN ("absent"); nothing in this
 * header silently replaces them with zero.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ssar/error.hpp"

namespace ssar {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Response series plus time-aligned covariates.
struct TimeSeriesDataset {
    std::vector<std::string> timestamps; ///< empty, or one entry per row
    VectorXd y;
    MatrixXd X;
    std::vector<std::string> feature_names;
    std::string target_name = "y";

    Index rows() const noexcept { return y.size(); }
    Index features() const noexcept { return X.cols(); }

    bool has_missing() const noexcept { return y.hasNaN() || X.hasNaN(); }

    void validate() const {
        if (X.rows() != y.size())
            throw DataError("dataset: X has " + std::to_string(X.rows()) + " rows but y has " +
                            std::to_string(y.size()));
        if (static_cast<Index>(feature_names.size()) != X.cols())
            throw DataError("dataset: feature_names has " + std::to_string(feature_names.size()) +
                            " entries for " + std::to_string(X.cols()) + " columns");
        if (!timestamps.empty() && static_cast<Index>(timestamps.size()) != y.size())
            throw DataError("dataset: timestamps length does not match y");
        std::unordered_set<std::string> seen;
        for (const auto& name : feature_names)
            if (!seen.insert(name).second) throw DataError("dataset: duplicate feature name '" + name + "'");
    }
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

/// RFC-4180 records: comma separated, double-quote quoting with "" escapes,
/// CRLF or LF line endings, embedded newlines allowed inside quotes.
inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };
    while (i < text.size()) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                    continue;
                }
                in_quotes = false;
            } else {
                field.push_back(c);
            }
            ++i;
            continue;
        }
        if (c == '"' && !field_started && field.empty()) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_record();
            ++i;
        } else if (c == '\n') {
            end_record();
        } else {
            field.push_back(c);
            field_started = true;
        }
        ++i;
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
}

} // namespace detail

/**
 * Load a dataset from a CSV file with a header row.
 *
 * Empty cells become missing values. If `features` is empty every column other
 * than the target and the time column whose first non-empty cell is numeric is
 * used, in file order (so an unnamed date column is skipped).
 */
inline TimeSeriesDataset load_csv(const std::string& path, const std::string& target,
                                  const std::vector<std::string>& features = {},
                                  const std::string& time_column = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("csv: cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    auto records = detail::parse_csv_records(text);
    // trailing blank lines
    while (!records.empty() && records.back().size() == 1 && records.back()[0].empty()) records.pop_back();
    if (records.empty()) throw DataError("csv: '" + path + "' has no header row");

    const auto& header = records.front();
    std::unordered_map<std::string, std::size_t> col_index;
    for (std::size_t c = 0; c < header.size(); ++c)
        col_index.emplace(std::string(detail::trim(header[c])), c);

    auto find_col = [&](const std::string& name) {
        auto it = col_index.find(name);
        if (it == col_index.end()) throw DataError("csv: '" + path + "' has no column named '" + name + "'");
        return it->second;
    };

    const std::size_t target_col = find_col(target);
    std::optional<std::size_t> time_col;
    if (!time_column.empty()) time_col = find_col(time_column);

    auto looks_numeric = [&](std::size_t col) {
        for (std::size_t r = 1; r < records.size(); ++r) {
            if (col >= records[r].size() || detail::trim(records[r][col]).empty()) continue;
            return detail::parse_number(records[r][col]).has_value();
        }
        return true;
    };
    std::vector<std::string> names = features;
    if (names.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            std::string name(detail::trim(header[c]));
            if (name == target || (!time_column.empty() && name == time_column)) continue;
            if (!looks_numeric(c)) continue;
            names.push_back(name);
        }
    }
    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(names.size());
    for (const auto& name : names) feature_cols.push_back(find_col(name));

    const Index n = static_cast<Index>(records.size()) - 1;
    TimeSeriesDataset ds;
    ds.target_name = target;
    ds.feature_names = names;
    ds.y.resize(n);
    ds.X.resize(n, static_cast<Index>(names.size()));
    if (time_col) ds.timestamps.reserve(static_cast<std::size_t>(n));

    auto cell = [&](Index row, std::size_t col, const std::string& name) -> double {
        const auto& rec = records[static_cast<std::size_t>(row) + 1];
        if (col >= rec.size() || detail::trim(rec[col]).empty()) return kMissing;
        auto v = detail::parse_number(rec[col]);
        if (!v)
            throw DataError("csv: non-numeric cell '" + rec[col] + "' at row " + std::to_string(row + 2) +
                            ", column '" + name + "'");
        return *v;
    };

    for (Index i = 0; i < n; ++i) {
        ds.y(i) = cell(i, target_col, target);
        for (std::size_t k = 0; k < feature_cols.size(); ++k)
            ds.X(i, static_cast<Index>(k)) = cell(i, feature_cols[k], names[k]);
        if (time_col) {
            const auto& rec = records[static_cast<std::size_t>(i) + 1];
            ds.timestamps.emplace_back(*time_col < rec.size() ? std::string(detail::trim(rec[*time_col])) : "");
        }
    }
    ds.validate();
    return ds;
}

// ---------------------------------------------------------------------------
// Gap filling
// ---------------------------------------------------------------------------

/// Fill interior gaps by linear interpolation between the nearest present neighbours.
inline VectorXd interpolate_missing(std::span<const double> series) {
    const Index n = static_cast<Index>(series.size());
    VectorXd out(n);
    if (n == 0) return out;
    if (is_missing(series.front()) || is_missing(series.back()))
        throw DataError("interpolate_missing: leading or trailing gap cannot be filled without extrapolation");
    Index last_present = 0;
    out(0) = series[0];
    for (Index i = 1; i < n; ++i) {
        const double v = series[static_cast<std::size_t>(i)];
        if (is_missing(v)) continue;
        out(i) = v;
        const Index gap = i - last_present;
        const double start = out(last_present);
        for (Index k = 1; k < gap; ++k)
            out(last_present + k) = start + (v - start) * static_cast<double>(k) / static_cast<double>(gap);
        last_present = i;
    }
    return out;
}

inline TimeSeriesDataset interpolate_dataset(TimeSeriesDataset ds) {
    auto fill = [&](Eigen::Ref<VectorXd> col, const std::string& name) {
        if (!col.hasNaN()) return;
        try {
            col = interpolate_missing(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " (column '" + name + "')");
        }
    };
    fill(ds.y, ds.target_name);
    for (Index j = 0; j < ds.X.cols(); ++j) {
        VectorXd col = ds.X.col(j);
        fill(col, ds.feature_names[static_cast<std::size_t>(j)]);
        ds.X.col(j) = col;
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Lag expansion and standardization
// ---------------------------------------------------------------------------

struct ColumnLabel {
    std::string feature;
    int lag = 0;

    /// "Rainfall" for lag 0, "Rainfall_2" for lag 2.
    std::string name() const { return lag == 0 ? feature : feature + "_" + std::to_string(lag); }
};

struct ScalingParams {
    VectorXd x_mean;
    VectorXd x_scale;
    double y_mean = 0.0;
    double y_scale = 1.0;

    MatrixXd apply_x(const MatrixXd& X) const {
        return (X.rowwise() - x_mean.transpose()).array().rowwise() / x_scale.transpose().array();
    }
    VectorXd apply_y(const VectorXd& y) const { return (y.array() - y_mean) / y_scale; }
    VectorXd invert_y(const VectorXd& y_std) const { return y_std.array() * y_scale + y_mean; }
    double invert_y(double y_std) const { return y_std * y_scale + y_mean; }

    /// Coefficients on the standardized scale mapped back to original units.
    VectorXd unscale_coefficients(const VectorXd& beta_std) const {
        return beta_std.array() * y_scale / x_scale.array();
    }
};

/// Response and lag-expanded design. Standardized once `scaling` is set.
struct LaggedRegressionProblem {
    VectorXd y;
    MatrixXd X;
    std::vector<ColumnLabel> column_labels;
    int r = 0;
    bool contemporaneous = true;
    /// dataset row index of each problem row
    std::vector<Index> source_rows;
    std::optional<ScalingParams> scaling;

    Index rows() const noexcept { return y.size(); }
    Index cols() const noexcept { return X.cols(); }

    std::vector<std::string> column_names() const {
        std::vector<std::string> out;
        out.reserve(column_labels.size());
        for (const auto& l : column_labels) out.push_back(l.name());
        return out;
    }
};

/**
 * Expand covariates into lagged columns.
 *
 * With `include_contemporaneous` the lags are 0..r, otherwise 1..r. Columns are
 * grouped by lag, features in dataset order within each lag. The first r rows
 * lack a full lag window and are dropped, so n = N - r.
 */
inline LaggedRegressionProblem build_lagged_design(const TimeSeriesDataset& ds, int r,
                                                   bool include_contemporaneous = true) {
    const Index N = ds.rows();
    if (r < 0) throw std::invalid_argument("build_lagged_design: r must be non-negative");
    if (r >= N)
        throw DataError("build_lagged_design: r = " + std::to_string(r) + " leaves no rows (N = " +
                        std::to_string(N) + ")");
    if (ds.has_missing()) throw DataError("build_lagged_design: dataset still has missing cells");
    if (!include_contemporaneous && r == 0)
        throw std::invalid_argument("build_lagged_design: r = 0 without contemporaneous columns gives no covariates");

    const int first_lag = include_contemporaneous ? 0 : 1;
    const int lag_count = r - first_lag + 1;
    const Index p0 = ds.features();
    const Index n = N - r;

    LaggedRegressionProblem out;
    out.r = r;
    out.contemporaneous = include_contemporaneous;
    out.y = ds.y.tail(n);
    out.X.resize(n, p0 * lag_count);
    for (int li = 0; li < lag_count; ++li) {
        const int lag = first_lag + li;
        out.X.middleCols(li * p0, p0) = ds.X.middleRows(r - lag, n);
        for (Index f = 0; f < p0; ++f)
            out.column_labels.push_back({ds.feature_names[static_cast<std::size_t>(f)], lag});
    }
    out.source_rows.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.source_rows[static_cast<std::size_t>(i)] = i + r;
    return out;
}

/// Column means and root-mean-square deviations (so each standardized column has squared norm n).
inline ScalingParams fit_scaling(const MatrixXd& X, const VectorXd& y,
                                 const std::vector<std::string>& column_names = {},
                                 const std::string& target_name = "y") {
    const Index n = y.size();
    if (n < 2) throw DataError("standardize: need at least two rows");
    auto is_constant = [](double scale, double mean) { return !(scale > 1e-12 * std::max(1.0, std::abs(mean))); };

    ScalingParams s;
    s.x_mean = X.colwise().mean().transpose();
    s.x_scale.resize(X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        s.x_scale(j) = std::sqrt((X.col(j).array() - s.x_mean(j)).square().sum() / static_cast<double>(n));
        if (is_constant(s.x_scale(j), s.x_mean(j))) {
            const std::string name = static_cast<std::size_t>(j) < column_names.size()
                                         ? column_names[static_cast<std::size_t>(j)]
                                         : "#" + std::to_string(j);
            throw DataError("standardize: column '" + name + "' is constant");
        }
    }
    s.y_mean = y.mean();
    s.y_scale = std::sqrt((y.array() - s.y_mean).square().sum() / static_cast<double>(n));
    if (is_constant(s.y_scale, s.y_mean)) throw DataError("standardize: response '" + target_name + "' is constant");
    return s;
}

/// Center and scale every column and y: sum 0, squared norm n.
inline std::pair<LaggedRegressionProblem, ScalingParams> standardize(LaggedRegressionProblem problem,
                                                                     const std::string& target_name = "y") {
    ScalingParams s = fit_scaling(problem.X, problem.y, problem.column_names(), target_name);
    problem.X = s.apply_x(problem.X);
    problem.y = s.apply_y(problem.y);
    problem.scaling = s;
    return {std::move(problem), s};
}

// ---------------------------------------------------------------------------
// Response transformations
// ---------------------------------------------------------------------------

enum class ResponseTransform {
    None,
    LogNeg, ///< y' = log(-y + 1), for non-positive responses such as water-table depth
};

inline std::string to_string(ResponseTransform t) { return t == ResponseTransform::LogNeg ? "log-neg" : "none"; }

inline ResponseTransform parse_transform(const std::string& s) {
    if (s == "none" || s.empty()) return ResponseTransform::None;
    if (s == "log-neg") return ResponseTransform::LogNeg;
    throw std::invalid_argument("unknown transform '" + s + "' (expected none or log-neg)");
}

inline VectorXd transform_response(const VectorXd& y, ResponseTransform kind) {
    if (kind == ResponseTransform::None) return y;
    std::string offending;
    int count = 0;
    for (Index i = 0; i < y.size(); ++i) {
        if (y(i) > 0.0) {
            if (count < 10) offending += (count ? ", " : "") + std::to_string(i);
            ++count;
        }
    }
    if (count > 0)
        throw DataError("transform log-neg: " + std::to_string(count) + " positive value(s) at indices " + offending +
                        (count > 10 ? ", ..." : ""));
    return (-y.array()).log1p();
}

inline VectorXd inverse_transform(const VectorXd& y_t, ResponseTransform kind) {
    if (kind == ResponseTransform::None) return y_t;
    return -(y_t.array().expm1());
}

inline double inverse_transform(double y_t, ResponseTransform kind) {
    return kind == ResponseTransform::None ? y_t : -std::expm1(y_t);
}

} // namespace ssar
