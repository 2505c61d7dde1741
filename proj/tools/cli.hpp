#pragma once

// Command-line front end: ssar simulate | fit | backtest.
//
// Exit codes: 0 ok, 2 usage, 3 data, 4 numeric.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "ssar/ssar.hpp"

namespace ssar::cli {

using nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

inline double round6(double v) { return v == 0.0 ? 0.0 : std::stod(io::fmt(v)); }

inline ordered_json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round6(v);
}

inline ordered_json num(const std::optional<double>& v) { return v ? num(*v) : ordered_json(nullptr); }

inline std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

inline unsigned default_threads() {
    if (const char* env = std::getenv("SSAR_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Fill options not given on the command line from a JSON object of flag
 * values, or from the "config" block of a run manifest. Explicit flags win.
 */
inline void apply_json_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw CLI::ConversionError(std::string("config '") + path + "' is not valid JSON: " + e.what());
    }
    if (j.contains("config") && j["config"].is_object()) j = j["config"];
    if (!j.is_object()) throw CLI::ConversionError("config '" + path + "' must be a JSON object");
    auto str = [](const ordered_json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    };
    for (auto& [key, value] : j.items()) {
        if (value.is_null() || key == "config" || key == "out") continue;
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw CLI::ConversionError("config '" + path + "': unknown key '" + key + "'");
        }
        if (opt->count() > 0) continue;
        if (value.is_array()) {
            for (const auto& v : value) opt->add_result(str(v));
        } else {
            opt->add_result(str(value));
        }
        opt->run_callback();
    }
}

/// Resolved values of every named option of a subcommand, keyed by long flag name.
inline ordered_json resolved_options(const CLI::App* sub) {
    ordered_json out = ordered_json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config" || name == "out" || opt->get_lnames().empty()) continue;
        if (opt->get_expected_max() == 0) {
            out[name] = opt->count() > 0 && opt->as<bool>();
            continue;
        }
        std::vector<std::string> vals = opt->results();
        if (vals.empty()) {
            const std::string d = opt->get_default_str();
            if (d.empty()) {
                out[name] = nullptr;
                continue;
            }
            vals.push_back(d);
        }
        auto typed = [](const std::string& s) -> ordered_json {
            if (!s.empty() && s.find_first_not_of("-0123456789") == std::string::npos) return std::stoll(s);
            if (auto v = ssar::detail::parse_number(s); v && s.find_first_not_of("+-0123456789.eE") == std::string::npos)
                return *v;
            return s;
        };
        if (opt->get_expected_max() > 1) {
            ordered_json arr = ordered_json::array();
            for (const auto& v : vals) arr.push_back(typed(v));
            out[name] = arr;
        } else {
            out[name] = typed(vals.back());
        }
    }
    return out;
}

/// Files are buffered and only written once the whole command has succeeded.
struct OutputSet {
    std::map<std::string, std::string> files;

    void add(const std::string& name, std::string content) { files[name] = std::move(content); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& kv : files) out.push_back(kv.first);
        return out;
    }

    void commit(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        for (const auto& [name, content] : files) {
            const auto target = dir / name;
            const auto tmp = dir / (name + ".tmp");
            {
                std::ofstream f(tmp, std::ios::binary);
                if (!f) throw DataError("cannot write '" + tmp.string() + "'");
                f << content;
            }
            std::filesystem::rename(tmp, target);
        }
    }
};

struct CommonSettings {
    std::uint64_t seed = 1;
    int iterations = 5000;
    int burn_in = 1000;
    unsigned threads = 1;
    std::optional<double> tau0_sq;
    std::optional<double> tau1_sq;
    std::optional<double> q_incl;
    double beta_threshold = 1.0;
    double phi_threshold = 1.0;
    bool refine = false;
    std::string out = ".";

    GibbsConfig gibbs() const {
        GibbsConfig g;
        g.iterations = iterations;
        g.burn_in = burn_in;
        g.seed = seed;
        g.prior.tau0_sq = tau0_sq;
        g.prior.tau1_sq = tau1_sq;
        g.prior.q_incl = q_incl;
        return g;
    }

    TwoStageOptions options() const { return {beta_threshold, phi_threshold, refine}; }
};

inline void add_common(CLI::App* sub, CommonSettings& s) {
    sub->add_option("--out", s.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", s.seed, "Random seed")->capture_default_str();
    sub->add_option("--iterations", s.iterations, "Gibbs scans per chain, burn-in included")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--burn-in", s.burn_in, "Discarded scans")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--threads", s.threads, "Worker threads (default: $SSAR_THREADS or all cores)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tau0-sq", s.tau0_sq, "Spike variance (default 1/(n p))")->check(CLI::PositiveNumber);
    sub->add_option("--tau1-sq", s.tau1_sq, "Slab variance (default 1)")->check(CLI::PositiveNumber);
    sub->add_option("--q-incl", s.q_incl, "Prior inclusion probability (default 1/p)")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--beta-threshold", s.beta_threshold, "Covariate cutoff is this value / p")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--phi-threshold", s.phi_threshold, "Error-lag cutoff is this value / q")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_flag("--refine", s.refine, "Whiten with the fitted AR errors and refit once");
    sub->add_option("--config", "JSON file of flag values, or a manifest.json from an earlier run")
        ->check(CLI::ExistingFile);
}

struct DataSettings {
    std::string data;
    std::string target;
    std::vector<std::string> features;
    std::string time_column;
    int lags = 0;
    bool no_contemporaneous = false;
    int error_lags = 0;
    std::string transform = "none";
};

inline void add_data(CLI::App* sub, DataSettings& d) {
    // required, but may come from --config, so checked after parsing
    sub->add_option("--data", d.data, "Input CSV (required)");
    sub->add_option("--target", d.target, "Response column (required)");
    sub->add_option("--features", d.features, "Covariate columns (default: all other numeric columns)")
        ->delimiter(',');
    sub->add_option("--time-column", d.time_column, "Timestamp column, carried into outputs");
    sub->add_option("--lags", d.lags, "Covariate lags r")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_flag("--no-contemporaneous", d.no_contemporaneous, "Use covariate lags 1..r only");
    sub->add_option("--error-lags", d.error_lags, "Maximum error lag q")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--transform", d.transform, "Response transform")
        ->check(CLI::IsMember({"none", "log-neg"}))
        ->capture_default_str();
}

struct LoadedData {
    TimeSeriesDataset ds;
    Index interpolated = 0;
    ordered_json input_record;
};

inline LoadedData load_input(const DataSettings& d) {
    LoadedData out;
    TimeSeriesDataset raw = load_csv(d.data, d.target, d.features, d.time_column);
    for (Index i = 0; i < raw.rows(); ++i) {
        if (is_missing(raw.y(i))) ++out.interpolated;
        for (Index j = 0; j < raw.features(); ++j)
            if (is_missing(raw.X(i, j))) ++out.interpolated;
    }
    out.ds = out.interpolated ? interpolate_dataset(std::move(raw)) : std::move(raw);
    out.input_record = {{"path", d.data},
                        {"sha256", sha256_file(d.data)},
                        {"bytes", static_cast<std::uint64_t>(std::filesystem::file_size(d.data))}};
    return out;
}

inline std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

inline ordered_json metrics_json(const PredictionMetrics& m) {
    return {{"n", m.n},       {"ME", num(m.me)}, {"MAE", num(m.mae)}, {"MSE", num(m.mse)},
            {"NRMSE_pct", num(m.nrmse_percent())}, {"r", num(m.r)},  {"R2", num(m.r2)}};
}

inline ordered_json horizons_json(const ForecastResult& res) {
    ordered_json arr = ordered_json::array();
    for (const auto& h : res.horizons) {
        ordered_json e = {{"horizon", h.horizon}, {"original", metrics_json(h.original)}};
        if (h.transformed) e["transformed"] = metrics_json(*h.transformed);
        arr.push_back(e);
    }
    return arr;
}

inline ordered_json mean_confusion_json(const MeanConfusion& m) {
    return {{"TP", num(m.tp)}, {"FP", num(m.fp)}, {"FN", num(m.fn)}, {"TN", num(m.tn)},
            {"accuracy", num(m.accuracy)}, {"accuracy_sd", num(m.accuracy_sd)}};
}

// ---------------------------------------------------------------------------

struct SimulateSettings {
    Index n = 500;
    Index p = 50;
    Index q = 10;
    double sigma = 1.0;
    int reps = 10;
    double correlation = 0.0;
    std::string mode = "selection";
    std::optional<Index> train;
    int horizon = 5;
    int refit_every = 1;
    bool write_data = false;
};

inline void cmd_simulate(const SimulateSettings& s, const CommonSettings& c, OutputSet& out, ordered_json& extra) {
    SimScenario sc;
    sc.n_obs = s.n;
    sc.p = s.p;
    sc.q = s.q;
    sc.sigma = s.sigma;
    sc.reps = s.reps;
    sc.seed = c.seed;
    sc.column_correlation = s.correlation;
    ExperimentSettings st{c.gibbs(), c.options(), c.threads, 1e-3};

    if (s.mode == "selection") {
        const SelectionTable t = run_selection_experiment(sc, st);
        out.add("beta_selection.csv", render([&](std::ostream& os) { io::write_selection_csv(os, sc, t.beta); }));
        out.add("beta_replicates.csv", render([&](std::ostream& os) { io::write_replicate_csv(os, t, false); }));
        ordered_json summary = {{"beta", mean_confusion_json(t.beta)}};
        if (t.phi) {
            out.add("phi_selection.csv", render([&](std::ostream& os) { io::write_selection_csv(os, sc, *t.phi); }));
            out.add("phi_replicates.csv", render([&](std::ostream& os) { io::write_replicate_csv(os, t, true); }));
            summary["phi"] = mean_confusion_json(*t.phi);
        }
        out.add("selection.json", dump(summary));
    } else {
        const Index train = s.train ? *s.train : (4 * s.n) / 5;
        const PredictionExperiment ex = run_prediction_experiment(sc, train, s.horizon, st, s.refit_every);
        out.add("metrics.csv", render([&](std::ostream& os) { io::write_horizon_table(os, ex.result.horizons); }));
        out.add("predictions.csv", render([&](std::ostream& os) { io::write_predictions_csv(os, ex.result); }));
        out.add("metrics.json", dump({{"train", train},
                                      {"origins", ex.result.origins},
                                      {"fits", ex.result.fits},
                                      {"horizons", horizons_json(ex.result)}}));
        extra["train"] = train;
    }
    if (s.write_data) {
        const SyntheticData d = generate_synthetic(sc, 0);
        out.add("synthetic.csv", render([&](std::ostream& os) { io::write_dataset_csv(os, d.dataset); }));
    }
}

// ---------------------------------------------------------------------------

inline std::vector<double> autocorrelations(const VectorXd& e, Index max_lag) {
    const double m = e.mean();
    const VectorXd c = e.array() - m;
    const double c0 = c.squaredNorm();
    std::vector<double> out;
    for (Index k = 1; k <= max_lag && k < e.size(); ++k)
        out.push_back(c0 > 0.0 ? c.tail(e.size() - k).dot(c.head(e.size() - k)) / c0 : 0.0);
    return out;
}

inline void cmd_fit(const DataSettings& d, const CommonSettings& c, OutputSet& out, ordered_json& inputs) {
    LoadedData in = load_input(d);
    inputs.push_back(in.input_record);
    TimeSeriesDataset ds = in.ds;
    const ResponseTransform tr = parse_transform(d.transform);
    ds.y = transform_response(ds.y, tr);

    LaggedRegressionProblem raw = build_lagged_design(ds, d.lags, !d.no_contemporaneous);
    const std::vector<std::string> names = raw.column_names();
    auto [problem, scaling] = standardize(std::move(raw), ds.target_name);
    if (problem.rows() <= d.error_lags + 1)
        throw DataError("fit: " + std::to_string(problem.rows()) + " rows cannot support " +
                        std::to_string(d.error_lags) + " error lags");

    const TwoStageFit fit = fit_two_stage(problem, d.error_lags, c.gibbs(), c.options());
    const VectorXd beta = scaling.unscale_coefficients(fit.beta_hat);

    std::vector<Index> order(static_cast<std::size_t>(problem.cols()));
    for (Index j = 0; j < problem.cols(); ++j) order[static_cast<std::size_t>(j)] = j;
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return fit.stage1.incl_prob(a) > fit.stage1.incl_prob(b);
    });
    std::vector<bool> selected(static_cast<std::size_t>(problem.cols()), false);
    for (Index j : fit.t_beta) selected[static_cast<std::size_t>(j)] = true;

    ordered_json table = ordered_json::array();
    for (Index j : order) {
        const auto& lab = problem.column_labels[static_cast<std::size_t>(j)];
        table.push_back({{"column", names[static_cast<std::size_t>(j)]},
                         {"feature", lab.feature},
                         {"lag", lab.lag},
                         {"incl_prob", num(fit.stage1.incl_prob(j))},
                         {"selected", static_cast<bool>(selected[static_cast<std::size_t>(j)])},
                         {"beta_std", num(fit.beta_hat(j))},
                         {"beta", num(beta(j))}});
    }
    ordered_json t_beta = ordered_json::array();
    for (Index j : fit.t_beta) t_beta.push_back(names[static_cast<std::size_t>(j)]);

    ordered_json lags = ordered_json::array();
    for (Index l = 0; l < fit.phi_hat.order(); ++l)
        lags.push_back({{"lag", l + 1},
                        {"incl_prob", num(fit.stage2.incl_prob(l))},
                        {"selected", std::find(fit.t_phi.begin(), fit.t_phi.end(), l) != fit.t_phi.end()},
                        {"phi", num(fit.phi_hat[l])}});
    ordered_json t_phi = ordered_json::array();
    for (Index l : fit.t_phi) t_phi.push_back(l + 1);

    const VectorXd resid_orig = fit.residuals * scaling.y_scale;
    const VectorXd shocks = whiten(build_A_matrix(fit.phi_hat, resid_orig.size()), resid_orig);
    auto sd = [](const VectorXd& v) {
        const double m = v.mean();
        return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size()));
    };
    ordered_json acf = ordered_json::array();
    for (double a : autocorrelations(resid_orig, std::max<Index>(d.error_lags, 5))) acf.push_back(num(a));
    ordered_json acf_w = ordered_json::array();
    for (double a : autocorrelations(shocks, std::max<Index>(d.error_lags, 5))) acf_w.push_back(num(a));
    const double r2 = 1.0 - fit.residuals.squaredNorm() / problem.y.squaredNorm();
    ordered_json roots = ordered_json::array();
    for (double m : fit.phi_hat.root_moduli()) roots.push_back(num(m));

    ordered_json report = {
        {"target", ds.target_name},
        {"transform", to_string(tr)},
        {"rows", problem.rows()},
        {"columns", problem.cols()},
        {"covariate_lags", d.lags},
        {"contemporaneous", !d.no_contemporaneous},
        {"error_lags", d.error_lags},
        {"interpolated_cells", in.interpolated},
        {"beta_cutoff", num(c.beta_threshold / static_cast<double>(problem.cols()))},
        {"t_beta", t_beta},
        {"inclusion", table},
        {"phi_cutoff", d.error_lags > 0 ? num(c.phi_threshold / static_cast<double>(d.error_lags)) : ordered_json()},
        {"t_phi", t_phi},
        {"error_lag_inclusion", lags},
        {"stationarity_root_moduli", roots},
        {"residual_diagnostics",
         {{"mean", num(resid_orig.mean())},
          {"sd", num(sd(resid_orig))},
          {"acf", acf},
          {"whitened_sd", num(sd(shocks))},
          {"whitened_acf", acf_w},
          {"in_sample_r2", num(r2)}}},
        {"scaling", {{"y_mean", num(scaling.y_mean)}, {"y_scale", num(scaling.y_scale)}}},
        {"sigma_sq_std", num(fit.stage1.sigma_sq_mean)}};
    out.add("fit.json", dump(report));

    std::ostringstream csv;
    io::write_row(csv, {"column", "incl_prob", "selected", "beta"});
    for (Index j : order)
        io::write_row(csv, {names[static_cast<std::size_t>(j)], io::fmt(fit.stage1.incl_prob(j)),
                            selected[static_cast<std::size_t>(j)] ? "1" : "0", io::fmt(beta(j))});
    out.add("inclusion.csv", csv.str());
}

// ---------------------------------------------------------------------------

struct BacktestSettings {
    int horizon = 1;
    std::optional<Index> initial_window;
    int refit_every = 1;
};

inline void cmd_backtest(const DataSettings& d, const BacktestSettings& b, const CommonSettings& c, OutputSet& out,
                         ordered_json& inputs) {
    LoadedData in = load_input(d);
    inputs.push_back(in.input_record);
    ForecastConfig fc;
    fc.h = b.horizon;
    fc.initial_window = b.initial_window;
    fc.refit_every = b.refit_every;
    fc.q_max = d.error_lags;
    fc.r = d.lags;
    fc.contemporaneous = !d.no_contemporaneous;
    fc.transform = parse_transform(d.transform);
    fc.gibbs = c.gibbs();
    fc.options = c.options();
    fc.threads = c.threads;
    const ForecastResult res = rolling_backtest(in.ds, fc);

    out.add("metrics.csv", render([&](std::ostream& os) { io::write_horizon_table(os, res.horizons); }));
    if (fc.transform != ResponseTransform::None)
        out.add("metrics_transformed.csv", render([&](std::ostream& os) {
                    io::write_horizon_table(os, res.horizons, io::MetricScale::Transformed);
                }));
    out.add("predictions.csv", render([&](std::ostream& os) { io::write_predictions_csv(os, res); }));
    out.add("metrics.json", dump({{"target", in.ds.target_name},
                                  {"transform", to_string(fc.transform)},
                                  {"initial_window", res.initial_window},
                                  {"origins", res.origins},
                                  {"fits", res.fits},
                                  {"refit_every", res.refit_every},
                                  {"interpolated_cells", in.interpolated},
                                  {"horizons", horizons_json(res)}}));
}

// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spike-and-slab regression with autoregressive errors"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    CommonSettings common;
    common.threads = default_threads();
    DataSettings data;
    SimulateSettings sim;
    BacktestSettings bt;

    CLI::App* simulate = app.add_subcommand("simulate", "Synthetic selection or prediction experiment");
    add_common(simulate, common);
    simulate->add_option("--n", sim.n, "Observations N")->check(CLI::Range(Index{10}, Index{10000000}))->capture_default_str();
    simulate->add_option("--p", sim.p, "Covariates")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--q", sim.q, "Error lags")->check(CLI::NonNegativeNumber)->capture_default_str();
    simulate->add_option("--sigma", sim.sigma, "Shock standard deviation")->check(CLI::NonNegativeNumber)->capture_default_str();
    simulate->add_option("--reps", sim.reps, "Replicates")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--correlation", sim.correlation, "AR(1) correlation across covariate columns")
        ->check(CLI::Range(-0.99, 0.99))
        ->capture_default_str();
    simulate->add_option("--mode", sim.mode, "selection or prediction")
        ->check(CLI::IsMember({"selection", "prediction"}))
        ->capture_default_str();
    simulate->add_option("--train", sim.train, "Training rows for prediction mode (default 4N/5)")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--horizon", sim.horizon, "Maximum horizon for prediction mode")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate->add_option("--refit-every", sim.refit_every, "Refit cadence for prediction mode")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate->add_flag("--write-data", sim.write_data, "Also write replicate 0 as synthetic.csv");

    CLI::App* fit = app.add_subcommand("fit", "Two-stage selection on a CSV");
    add_common(fit, common);
    add_data(fit, data);

    CLI::App* backtest = app.add_subcommand("backtest", "Rolling-origin forecast evaluation on a CSV");
    add_common(backtest, common);
    add_data(backtest, data);
    backtest->add_option("--horizon", bt.horizon, "Forecast horizon h")->check(CLI::PositiveNumber)->capture_default_str();
    backtest->add_option("--initial-window", bt.initial_window, "First training window (default 2N/3)")
        ->check(CLI::PositiveNumber);
    backtest->add_option("--refit-every", bt.refit_every, "Refit cadence in steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::vector<std::string> argv_store = std::move(args);
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        CLI::App* chosen = app.get_subcommands().front();
        if (const CLI::Option* cfg = chosen->get_option("--config"); cfg->count() > 0)
            apply_json_config(chosen, cfg->as<std::string>());
        if (chosen != simulate)
            for (const char* name : {"--data", "--target"})
                if (chosen->get_option(name)->count() == 0) throw CLI::RequiredError(name);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion& e) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (!app.get_subcommands().empty())
            err << "run '" << app.get_subcommands().front()->get_name() << " --help' for usage\n";
        return kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (common.burn_in >= common.iterations) {
        err << "error: --burn-in must be smaller than --iterations\n";
        return kUsage;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    OutputSet files;
    ordered_json inputs = ordered_json::array();
    ordered_json extra = ordered_json::object();
    try {
        if (sub == simulate) {
            cmd_simulate(sim, common, files, extra);
        } else if (sub == fit) {
            cmd_fit(data, common, files, inputs);
        } else {
            cmd_backtest(data, bt, common, files, inputs);
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ordered_json manifest = {{"tool", "ssar"},
                                 {"version", kVersion},
                                 {"command", sub->get_name()},
                                 {"config", resolved_options(sub)},
                                 {"seed", common.seed},
                                 {"inputs", inputs},
                                 {"outputs", files.names()},
                                 {"timing", {{"started_utc", started}, {"elapsed_seconds", round6(elapsed)}}}};
        if (!extra.empty()) manifest["derived"] = extra;
        files.add("manifest.json", dump(manifest));
        files.commit(common.out);
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    }
    out << sub->get_name() << ": wrote";
    for (const auto& n : files.names()) out << ' ' << n;
    out << " to " << common.out << "\n";
    return kOk;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

} // namespace ssar::cli
