#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "ssar/io.hpp"
#include "ssar/simharness.hpp"
#include "test_util.hpp"

using namespace ssar;

namespace {

long lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

} // namespace

TEST(Synthetic, NoiselessIsExactlyLinear) {
    SimScenario sc;
    sc.n_obs = 100;
    sc.p = 8;
    sc.q = 0;
    sc.sigma = 0.0;
    const auto d = generate_synthetic(sc, 0);
    EXPECT_EQ(d.dataset.y, Eigen::VectorXd(d.dataset.X * default_beta_star(8)));
    EXPECT_EQ(d.dataset.feature_names.front(), "x1");
    EXPECT_EQ(d.dataset.feature_names.back(), "x8");
    EXPECT_EQ(d.dataset.timestamps.at(99), "100");
}

TEST(Synthetic, DeterministicPerReplicate) {
    SimScenario sc;
    sc.n_obs = 60;
    sc.p = 5;
    sc.q = 4;
    const auto a = generate_synthetic(sc, 3);
    const auto b = generate_synthetic(sc, 3);
    const auto c = generate_synthetic(sc, 4);
    EXPECT_EQ(a.dataset.X, b.dataset.X);
    EXPECT_EQ(a.dataset.y, b.dataset.y);
    EXPECT_NE(a.dataset.X, c.dataset.X);
    EXPECT_NE(a.truth.x_seed, c.truth.x_seed);
}

TEST(Synthetic, ErrorsFollowTheArRecursion) {
    SimScenario sc;
    sc.n_obs = 200;
    sc.p = 3;
    sc.q = 4;
    const auto d = generate_synthetic(sc, 0);
    const Eigen::VectorXd resid = d.dataset.y - d.dataset.X * d.truth.beta_star;
    EXPECT_LE((resid - d.truth.errors).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::VectorXd shocks = whiten(build_A_matrix(ARCoefficients(d.truth.phi_star), 200), d.truth.errors);
    const double var = shocks.squaredNorm() / 200.0;
    EXPECT_GT(var, 0.7);
    EXPECT_LT(var, 1.3);
}

TEST(Synthetic, ColumnCorrelationKnob) {
    SimScenario sc;
    sc.n_obs = 5000;
    sc.p = 3;
    sc.q = 0;
    sc.column_correlation = 0.6;
    const auto X = generate_synthetic(sc, 0).dataset.X;
    auto corr = [&](Index a, Index b) {
        const Eigen::VectorXd u = X.col(a).array() - X.col(a).mean();
        const Eigen::VectorXd v = X.col(b).array() - X.col(b).mean();
        return u.dot(v) / (u.norm() * v.norm());
    };
    EXPECT_NEAR(corr(0, 1), 0.6, 0.05);
    EXPECT_NEAR(corr(0, 2), 0.36, 0.05);
    sc.column_correlation = 0.0;
    const auto X0 = generate_synthetic(sc, 0).dataset.X;
    const Eigen::VectorXd u = X0.col(0).array() - X0.col(0).mean();
    const Eigen::VectorXd v = X0.col(1).array() - X0.col(1).mean();
    EXPECT_LT(std::abs(u.dot(v) / (u.norm() * v.norm())), 0.05);
}

TEST(Synthetic, ScenarioValidation) {
    SimScenario sc;
    sc.q = 2;
    sc.phi_star = Eigen::Vector2d(0.5, 0.6);
    EXPECT_THROW(sc.validate(), std::invalid_argument);
    sc.phi_star.reset();
    sc.beta_star = Eigen::VectorXd::Ones(3);
    EXPECT_THROW(sc.validate(), std::invalid_argument);
    sc.beta_star.reset();
    sc.sigma = -1.0;
    EXPECT_THROW(sc.validate(), std::invalid_argument);
}

TEST(SelectionExperiment, NearNoiselessRecoversSupport) {
    SimScenario sc;
    sc.n_obs = 200;
    sc.p = 20;
    sc.q = 0;
    sc.sigma = 1e-6;
    sc.reps = 5;
    const auto t = run_selection_experiment(sc);
    EXPECT_DOUBLE_EQ(t.beta.accuracy, 1.0);
    EXPECT_FALSE(t.phi.has_value());
}

TEST(SelectionExperiment, ThreadCountDoesNotChangeReplicates) {
    SimScenario sc;
    sc.n_obs = 150;
    sc.p = 12;
    sc.q = 3;
    sc.reps = 4;
    ExperimentSettings st;
    st.gibbs.iterations = 800;
    st.gibbs.burn_in = 200;
    const auto one = run_selection_experiment(sc, st);
    st.threads = 3;
    const auto three = run_selection_experiment(sc, st);
    ASSERT_EQ(one.replicates.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(one.replicates[i].rep, static_cast<int>(i));
        EXPECT_EQ(one.replicates[i].beta_hat, three.replicates[i].beta_hat);
        EXPECT_EQ(one.replicates[i].phi_hat, three.replicates[i].phi_hat);
    }
    EXPECT_EQ(one.beta.accuracy, three.beta.accuracy);
}

TEST(SelectionExperiment, AccuracyDoesNotDegradeWithSampleSize) {
    double prev_acc = 0.0, prev_se = 0.0;
    for (Index n : {200, 500, 1000}) {
        SimScenario sc;
        sc.n_obs = n;
        sc.p = 30;
        sc.q = 10;
        sc.reps = 10;
        const auto t = run_selection_experiment(sc);
        const double se = t.beta.accuracy_sd / std::sqrt(10.0);
        EXPECT_GE(t.beta.accuracy + se + prev_se, prev_acc) << "n = " << n;
        prev_acc = t.beta.accuracy;
        prev_se = se;
    }
}

TEST(PredictionExperiment, NoiselessPredictionIsExact) {
    SimScenario sc;
    sc.n_obs = 300;
    sc.p = 10;
    sc.q = 3;
    sc.sigma = 0.0;
    ExperimentSettings st;
    st.gibbs.iterations = 1000;
    st.gibbs.burn_in = 200;
    // diffuse slab and vanishing IG rate: see the single-fit backtest test
    st.gibbs.prior.tau1_sq = 1e8;
    st.gibbs.prior.b = 1e-10;
    const auto e = run_prediction_experiment(sc, 250, 2, st, 10);
    for (const auto& h : e.result.horizons) EXPECT_GE(*h.original.r2, 1.0 - 1e-6) << "h = " << h.horizon;
}

TEST(PredictionExperiment, Arguments) {
    SimScenario sc;
    sc.n_obs = 50;
    sc.p = 3;
    sc.q = 1;
    EXPECT_THROW(run_prediction_experiment(sc, 48, 3), std::invalid_argument);
    EXPECT_THROW(run_prediction_experiment(sc, 40, 0), std::invalid_argument);
}

TEST(Writers, HeadersAndShapes) {
    SimScenario sc;
    sc.n_obs = 80;
    sc.p = 6;
    sc.q = 2;
    sc.reps = 2;
    ExperimentSettings st;
    st.gibbs.iterations = 400;
    st.gibbs.burn_in = 100;
    const auto t = run_selection_experiment(sc, st);

    std::ostringstream sel, rep, phi;
    io::write_selection_csv(sel, sc, t.beta);
    EXPECT_EQ(sel.str().substr(0, sel.str().find('\n')), "q,sigma,p,TP,FP,FN,TN,accuracy");
    io::write_replicate_csv(rep, t, false);
    EXPECT_EQ(lines(rep.str()), 3);
    io::write_replicate_csv(phi, t, true);
    EXPECT_EQ(phi.str().substr(0, 3), "rep");

    const auto e = run_prediction_experiment(sc, 70, 3, st, 5);
    std::ostringstream tab, pred, data;
    io::write_horizon_table(tab, e.result.horizons);
    EXPECT_EQ(tab.str().substr(0, tab.str().find('\n')), "metric,h1,h2,h3");
    EXPECT_EQ(lines(tab.str()), 7);
    io::write_predictions_csv(pred, e.result);
    EXPECT_EQ(pred.str().substr(0, pred.str().find('\n')), "origin,horizon,timestamp,actual,predicted");
    EXPECT_EQ(lines(pred.str()), 1 + 8 * 3);
    io::write_dataset_csv(data, generate_synthetic(sc, 0).dataset);
    EXPECT_EQ(data.str().substr(0, data.str().find('\n')), "t,y,x1,x2,x3,x4,x5,x6");
}

TEST(Format, SixSignificantDigits) {
    EXPECT_EQ(io::fmt(0.123456789), "0.123457");
    EXPECT_EQ(io::fmt(-0.0), "0");
    EXPECT_EQ(io::fmt(std::optional<double>{}), "NA");
    EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
}
