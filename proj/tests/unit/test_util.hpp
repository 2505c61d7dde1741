#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace testutil {

inline Eigen::MatrixXd randn(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = d(gen);
    return m;
}

inline Eigen::VectorXd randn(Eigen::Index n, unsigned seed) { return randn(n, 1, seed).col(0); }

/// Random stationary AR coefficients built from reciprocal roots inside radius 0.9.
inline Eigen::VectorXd random_stationary_phi(int q, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    // (1 - r_1 z)...(1 - r_q z) with real r_i, |r_i| < 0.9
    Eigen::VectorXd poly = Eigen::VectorXd::Zero(q + 1);
    poly(0) = 1.0;
    for (int i = 0; i < q; ++i) {
        const double r = u(gen);
        for (int k = i + 1; k >= 1; --k) poly(k) -= r * poly(k - 1);
    }
    return -poly.tail(q);
}

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() /
             ("ssar_test_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(p);
    return p;
}

inline std::string data_file(const std::string& name) { return std::string(SSAR_TEST_DATA_DIR) + "/" + name; }

} // namespace testutil
