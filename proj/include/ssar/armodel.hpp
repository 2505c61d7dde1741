#pragma once

/** @file
 * AR(q) error machinery: the banded whitening matrix A(phi), simulation,
 * stationarity checks and the lagged-residual design.
 *
 * Errors follow eps_t = sum_{l=1}^q phi_l eps_{t-l} + u_t with pre-sample
 * values fixed at zero, so A(phi) eps = u holds exactly for a finite sample.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include "ssar/error.hpp"
#include "ssar/rng.hpp"

namespace ssar {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kStationarityTolerance = 1e-8;

struct StationarityReport {
    bool stationary = true;
    /// moduli of the roots of 1 - sum phi_l z^l, ascending
    std::vector<double> root_moduli;
};

/**
 * Roots of the characteristic polynomial 1 - phi_1 z - ... - phi_q z^q are the
 * reciprocals of the companion-matrix eigenvalues; stationary iff every root
 * modulus exceeds 1 + 1e-8. Trailing zero coefficients are dropped first
 * (they only add roots at infinity).
 */
inline StationarityReport check_stationarity(const VectorXd& phi) {
    Index m = phi.size();
    while (m > 0 && phi(m - 1) == 0.0) --m;
    StationarityReport report;
    if (m == 0) return report;

    MatrixXd companion = MatrixXd::Zero(m, m);
    companion.row(0) = phi.head(m).transpose();
    for (Index i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<MatrixXd> solver(companion, false);
    const auto& eig = solver.eigenvalues();
    report.root_moduli.reserve(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
        const double mod = std::abs(eig(i));
        report.root_moduli.push_back(mod > 0.0 ? 1.0 / mod : std::numeric_limits<double>::infinity());
    }
    std::sort(report.root_moduli.begin(), report.root_moduli.end());
    report.stationary = report.root_moduli.front() > 1.0 + kStationarityTolerance;
    return report;
}

/// Error-lag coefficients phi_1..phi_q with their stationarity status.
class ARCoefficients {
public:
    ARCoefficients() = default;
    explicit ARCoefficients(VectorXd phi) : phi_(std::move(phi)), report_(check_stationarity(phi_)) {
        if (!phi_.allFinite()) throw std::invalid_argument("ARCoefficients: non-finite coefficient");
    }
    ARCoefficients(std::initializer_list<double> phi)
        : ARCoefficients(VectorXd(Eigen::Map<const VectorXd>(phi.begin(), static_cast<Index>(phi.size())))) {}

    Index order() const noexcept { return phi_.size(); }
    const VectorXd& values() const noexcept { return phi_; }
    double operator[](Index l) const { return phi_(l); }
    bool stationary() const noexcept { return report_.stationary; }
    const std::vector<double>& root_moduli() const noexcept { return report_.root_moduli; }

private:
    VectorXd phi_;
    StationarityReport report_;
};

/**
 * Unit lower-triangular banded matrix with A(i, i-k) = -phi_k for 1 <= k <= q.
 *
 * Only the q coefficients are stored; whitening and unwhitening are O(nq).
 */
class BandedLowerTriangular {
public:
    BandedLowerTriangular(const VectorXd& phi, Index n) : n_(n), phi_(phi) {
        if (n < 1) throw std::invalid_argument("BandedLowerTriangular: n must be >= 1");
    }

    Index size() const noexcept { return n_; }
    Index bandwidth() const noexcept { return phi_.size(); }

    double operator()(Index i, Index j) const {
        if (i == j) return 1.0;
        const Index k = i - j;
        return (k >= 1 && k <= phi_.size()) ? -phi_(k - 1) : 0.0;
    }

    MatrixXd dense() const {
        MatrixXd out = MatrixXd::Identity(n_, n_);
        for (Index k = 1; k <= phi_.size() && k < n_; ++k)
            out.diagonal(-k).setConstant(-phi_(k - 1));
        return out;
    }

    /// A v
    VectorXd apply(const VectorXd& v) const {
        check(v.size());
        VectorXd out = v;
        const Index q = phi_.size();
        for (Index t = 0; t < n_; ++t) {
            const Index lmax = std::min(q, t);
            for (Index l = 1; l <= lmax; ++l) out(t) -= phi_(l - 1) * v(t - l);
        }
        return out;
    }

    /// A M, column by column
    MatrixXd apply(const MatrixXd& m) const {
        check(m.rows());
        MatrixXd out = m;
        const Index q = phi_.size();
        for (Index t = 0; t < n_; ++t) {
            const Index lmax = std::min(q, t);
            for (Index l = 1; l <= lmax; ++l) out.row(t) -= phi_(l - 1) * m.row(t - l);
        }
        return out;
    }

    /// Solve A x = u by forward substitution.
    VectorXd solve(const VectorXd& u) const {
        check(u.size());
        VectorXd x(n_);
        const Index q = phi_.size();
        for (Index t = 0; t < n_; ++t) {
            double acc = u(t);
            const Index lmax = std::min(q, t);
            for (Index l = 1; l <= lmax; ++l) acc += phi_(l - 1) * x(t - l);
            x(t) = acc;
        }
        return x;
    }

private:
    void check(Index len) const {
        if (len != n_)
            throw std::invalid_argument("BandedLowerTriangular: length " + std::to_string(len) +
                                        " does not match dimension " + std::to_string(n_));
    }

    Index n_;
    VectorXd phi_;
};

inline BandedLowerTriangular build_A_matrix(const ARCoefficients& phi, Index n) {
    return BandedLowerTriangular(phi.values(), n);
}

inline VectorXd whiten(const BandedLowerTriangular& A, const VectorXd& v) { return A.apply(v); }
inline MatrixXd whiten(const BandedLowerTriangular& A, const MatrixXd& m) { return A.apply(m); }
inline VectorXd unwhiten(const BandedLowerTriangular& A, const VectorXd& u) { return A.solve(u); }

struct SimulatedErrors {
    VectorXd errors;
    VectorXd shocks; ///< the u_t that drove the kept errors (burn-in shocks excluded)
};

/**
 * Simulate AR errors from zero initial conditions, keeping the last n of
 * burn_in + n steps. Shocks are drawn as sigma * N(0,1) from SplitMix64(seed).
 */
inline SimulatedErrors simulate_ar_errors_with_shocks(const ARCoefficients& phi, double sigma, Index n,
                                                      std::uint64_t seed, Index burn_in = 0) {
    if (!phi.stationary()) throw std::invalid_argument("simulate_ar_errors: phi is not stationary");
    if (burn_in < 0 || n < 0) throw std::invalid_argument("simulate_ar_errors: negative length");
    if (!(sigma >= 0.0)) throw std::invalid_argument("simulate_ar_errors: sigma must be non-negative");

    SplitMix64 rng(seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    const Index total = burn_in + n;
    VectorXd u(total);
    for (Index t = 0; t < total; ++t) u(t) = sigma * normal(rng);

    const Index q = phi.order();
    const VectorXd& c = phi.values();
    VectorXd eps(total);
    for (Index t = 0; t < total; ++t) {
        double acc = u(t);
        const Index lmax = std::min(q, t);
        for (Index l = 1; l <= lmax; ++l) acc += c(l - 1) * eps(t - l);
        eps(t) = acc;
    }
    return {eps.tail(n), u.tail(n)};
}

inline VectorXd simulate_ar_errors(const ARCoefficients& phi, double sigma, Index n, std::uint64_t seed,
                                   Index burn_in = 0) {
    return simulate_ar_errors_with_shocks(phi, sigma, n, seed, burn_in).errors;
}

/**
 * Lagged-residual design E: column l (1-based) is eps shifted down by l with
 * l leading zeros. With `drop_leading_row` the all-zero first row is removed,
 * giving the (n-1) x q matrix paired with eps_2..eps_n.
 */
inline MatrixXd build_residual_lag_matrix(const VectorXd& eps, Index q, bool drop_leading_row = false) {
    const Index n = eps.size();
    if (q < 0) throw std::invalid_argument("build_residual_lag_matrix: q must be non-negative");
    if (q >= n && q > 0)
        throw std::invalid_argument("build_residual_lag_matrix: q = " + std::to_string(q) +
                                    " must be smaller than n = " + std::to_string(n));
    MatrixXd E = MatrixXd::Zero(n, q);
    for (Index l = 1; l <= q; ++l) E.col(l - 1).tail(n - l) = eps.head(n - l);
    if (drop_leading_row && n > 0) return E.bottomRows(n - 1);
    return E;
}

} // namespace ssar
