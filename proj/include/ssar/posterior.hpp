#pragma once

/** @file
 * Closed-form spike-and-slab screening conditional on phi.
 *
 * For column j the remaining coefficients carry a N(0, sigma^2 tau_n^2 I)
 * prior and are integrated out, leaving the quadratic form
 *
 *     M_j = A^T [I - W (W^T W + tau_n^{-2} I)^{-1} W^T] A,   W = A X_{-j}.
 *
 * With s = x_j' M_j x_j and c = x_j' M_j y, integrating sigma^2 against
 * IG(a, b) makes p(beta_j | y) a two-component Student-t mixture with
 * dof n + 2a whose weights follow from F_0j and F_1j. Everything that can
 * underflow is kept in log space.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssar/armodel.hpp"
#include "ssar/error.hpp"

namespace ssar {

/// Spike/slab hyperparameters. tau values are standard deviations (not variances).
struct ScreenConfig {
    double tau0 = 0.0;      ///< spike scale
    double tau1 = 1.0;      ///< slab scale
    double tau_ridge = 0.0; ///< nuisance-coefficient scale
    double q_incl = 0.5;    ///< prior inclusion probability
    double a = 1.0;         ///< inverse-gamma shape
    double b = 1.0;         ///< inverse-gamma rate

    /// tau1^2 = 1, tau0^2 = 1/(n p), tau_ridge^2 = 1/n, q = 1/p (capped at 1/2), a = b = 1.
    static ScreenConfig defaults(Index n, Index p) {
        const double dn = static_cast<double>(std::max<Index>(n, 1));
        const double dp = static_cast<double>(std::max<Index>(p, 1));
        ScreenConfig c;
        c.tau1 = 1.0;
        c.tau0 = std::sqrt(1.0 / (dn * dp));
        c.tau_ridge = std::sqrt(1.0 / dn);
        c.q_incl = std::min(1.0 / dp, 0.5);
        c.a = 1.0;
        c.b = 1.0;
        return c;
    }

    void validate() const {
        if (!(tau0 > 0.0) || !(tau1 >= tau0) || !std::isfinite(tau1))
            throw std::invalid_argument("ScreenConfig: need 0 < tau0 <= tau1 < inf");
        if (!(tau_ridge > 0.0)) throw std::invalid_argument("ScreenConfig: tau_ridge must be positive");
        if (!(q_incl > 0.0 && q_incl < 1.0)) throw std::invalid_argument("ScreenConfig: q_incl must lie in (0, 1)");
        if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("ScreenConfig: a and b must be positive");
    }
};

/**
 * Partially specified hyperparameters, completed from (n, p) on use so the same
 * prior can drive stage 1 (p covariates) and stage 2 (q lags). Values given
 * here are variances for the tau entries.
 */
struct ScreenPrior {
    std::optional<double> tau0_sq;
    std::optional<double> tau1_sq;
    std::optional<double> tau_ridge_sq;
    std::optional<double> q_incl;
    std::optional<double> a;
    std::optional<double> b;

    ScreenConfig resolve(Index n, Index p) const {
        ScreenConfig c = ScreenConfig::defaults(n, p);
        if (tau0_sq) c.tau0 = std::sqrt(*tau0_sq);
        if (tau1_sq) c.tau1 = std::sqrt(*tau1_sq);
        if (tau_ridge_sq) c.tau_ridge = std::sqrt(*tau_ridge_sq);
        if (q_incl) c.q_incl = *q_incl;
        if (a) c.a = *a;
        if (b) c.b = *b;
        c.validate();
        return c;
    }
};

struct CoefficientPosterior {
    Index j = 0;
    double mu0 = 0.0, mu1 = 0.0;                     ///< spike/slab centres
    double xi0_sq_scale = 0.0, xi1_sq_scale = 0.0;   ///< xi^2_kj / sigma^2
    double psi0 = 0.0, psi1 = 0.0;                   ///< t scale parameters as defined for the mixture
    double logF0 = 0.0, logF1 = 0.0;
    double incl_prob = 0.0;
    double beta_hat = 0.0;                           ///< c / s, the conditional likelihood maximiser
    double dof = 0.0;                                ///< n + 2a
    double s = 0.0;                                  ///< x_j' M_j x_j
    double c = 0.0;                                  ///< x_j' M_j y
    double yMy = 0.0;                                ///< y' M_j y
};

// ---------------------------------------------------------------------------

/// Pr(Z = 1 | y) = q F1 / (q F1 + (1 - q) F0), evaluated on the log-odds scale.
inline double inclusion_odds(double logF0, double logF1, double q_incl) {
    if (q_incl <= 0.0) return 0.0;
    if (q_incl >= 1.0) return 1.0;
    const double log_odds = std::log(q_incl) - std::log1p(-q_incl) + (logF1 - logF0);
    if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
    const double e = std::exp(log_odds);
    return e / (1.0 + e);
}

/**
 * Quadratic forms of M_j without forming the n x n matrix.
 *
 * u' M v = (A u)'(A v) - (W' A u)' K^{-1} (W' A v), K = W'W + tau^{-2} I.
 */
class ShrinkageForm {
public:
    ShrinkageForm(const MatrixXd& X_minus_j, const ARCoefficients& phi, double tau_ridge)
        : A_(phi.values(), std::max<Index>(X_minus_j.rows(), 1)) {
        if (!phi.stationary()) throw std::invalid_argument("shrinkage: phi is not stationary");
        if (!(tau_ridge > 0.0)) throw std::invalid_argument("shrinkage: tau_ridge must be positive");
        W_ = A_.apply(X_minus_j);
        MatrixXd K = W_.transpose() * W_;
        K.diagonal().array() += 1.0 / (tau_ridge * tau_ridge);
        llt_.compute(K);
        if (llt_.info() != Eigen::Success) throw NumericError("shrinkage: W'W + tau^-2 I is not positive definite");
    }

    Index size() const noexcept { return A_.size(); }

    double quad(const VectorXd& u, const VectorXd& v) const {
        const VectorXd au = A_.apply(u);
        const VectorXd av = A_.apply(v);
        double out = au.dot(av);
        if (W_.cols() > 0) {
            const VectorXd wu = W_.transpose() * au;
            const VectorXd wv = W_.transpose() * av;
            out -= wu.dot(llt_.solve(wv));
        }
        return out;
    }

    MatrixXd dense() const {
        const Index n = A_.size();
        MatrixXd inner = MatrixXd::Identity(n, n);
        if (W_.cols() > 0) inner -= W_ * llt_.solve(W_.transpose());
        const MatrixXd Ad = A_.dense();
        MatrixXd M = Ad.transpose() * inner * Ad;
        return 0.5 * (M + M.transpose());
    }

private:
    BandedLowerTriangular A_;
    MatrixXd W_;
    Eigen::LLT<MatrixXd> llt_;
};

/// Dense (I - H~_j) for diagnostics. O(n^2 p); estimation paths use ShrinkageForm.
inline MatrixXd shrinkage_matrix(const MatrixXd& X_minus_j, const ARCoefficients& phi, double tau_ridge) {
    return ShrinkageForm(X_minus_j, phi, tau_ridge).dense();
}

inline double beta_hat(const VectorXd& x_j, const MatrixXd& M, const VectorXd& y) {
    const double den = x_j.dot(M * x_j);
    if (!(std::abs(den) >= 1e-12)) throw NumericError("beta_hat: x_j' M x_j is degenerate (below 1e-12)");
    return x_j.dot(M * y) / den;
}

/// Assemble the mixture from the three quadratic forms.
inline CoefficientPosterior posterior_from_forms(Index j, double s, double c, double yMy, Index n,
                                                 const ScreenConfig& cfg) {
    CoefficientPosterior out;
    out.j = j;
    out.s = s;
    out.c = c;
    out.yMy = yMy;
    out.dof = static_cast<double>(n) + 2.0 * cfg.a;
    out.beta_hat = std::abs(s) >= 1e-12 ? c / s : 0.0;

    const double shape = 0.5 * static_cast<double>(n) + cfg.a;
    auto component = [&](double tau, double& mu, double& xi, double& psi, double& logF, const char* label) {
        const double prec = 1.0 / (tau * tau);
        const double denom = s + prec;
        const double rate = cfg.b + 0.5 * yMy - 0.5 * c * c / denom;
        if (!(denom > 0.0) || !(rate > 0.0))
            throw NumericError(std::string("coefficient_posterior: non-positive log argument in ") + label +
                               " component for column " + std::to_string(j) + " (s=" + std::to_string(s) +
                               ", rate=" + std::to_string(rate) + "); the shrinkage form is not PSD");
        mu = c / denom;
        xi = 1.0 / denom;
        psi = rate / (out.dof * denom);
        logF = 0.5 * (std::log(prec) - std::log(denom)) - shape * std::log(rate);
    };
    component(cfg.tau0, out.mu0, out.xi0_sq_scale, out.psi0, out.logF0, "spike");
    component(cfg.tau1, out.mu1, out.xi1_sq_scale, out.psi1, out.logF1, "slab");
    out.incl_prob = inclusion_odds(out.logF0, out.logF1, cfg.q_incl);
    return out;
}

namespace detail {

/// Whitened Gram quantities shared by all columns.
struct ScreeningGram {
    MatrixXd G;   ///< (A X)'(A X)
    VectorXd g;   ///< (A X)'(A y)
    double yy;    ///< (A y)'(A y)
    Index n;
};

inline ScreeningGram screening_gram(const VectorXd& y, const MatrixXd& X, const ARCoefficients& phi) {
    if (!phi.stationary()) throw std::invalid_argument("coefficient_posterior: phi is not stationary");
    if (X.rows() != y.size()) throw std::invalid_argument("coefficient_posterior: X and y row counts differ");
    BandedLowerTriangular A(phi.values(), y.size());
    const MatrixXd W = A.apply(X);
    const VectorXd Ay = A.apply(y);
    return {W.transpose() * W, W.transpose() * Ay, Ay.squaredNorm(), y.size()};
}

inline CoefficientPosterior posterior_for_column(const ScreeningGram& gram, Index j, const ScreenConfig& cfg) {
    const Index p = gram.G.cols();
    const Index m = p - 1;
    double s = gram.G(j, j);
    double c = gram.g(j);
    double yMy = gram.yy;
    if (m > 0) {
        std::vector<Index> others;
        others.reserve(static_cast<std::size_t>(m));
        for (Index k = 0; k < p; ++k)
            if (k != j) others.push_back(k);
        MatrixXd K(m, m);
        VectorXd bx(m), by(m);
        for (Index a = 0; a < m; ++a) {
            for (Index b = 0; b < m; ++b) K(a, b) = gram.G(others[a], others[b]);
            bx(a) = gram.G(others[a], j);
            by(a) = gram.g(others[a]);
        }
        K.diagonal().array() += 1.0 / (cfg.tau_ridge * cfg.tau_ridge);
        Eigen::LLT<MatrixXd> llt(K);
        if (llt.info() != Eigen::Success) throw NumericError("coefficient_posterior: nuisance system not PD");
        const VectorXd kx = llt.solve(bx);
        const VectorXd ky = llt.solve(by);
        s -= bx.dot(kx);
        c -= by.dot(kx);
        yMy -= by.dot(ky);
    }
    return posterior_from_forms(j, s, c, yMy, gram.n, cfg);
}

} // namespace detail

/// Screening posterior of column j given phi.
inline CoefficientPosterior coefficient_posterior(Index j, const VectorXd& y, const MatrixXd& X,
                                                  const ARCoefficients& phi, const ScreenConfig& cfg) {
    cfg.validate();
    if (j < 0 || j >= X.cols()) throw std::out_of_range("coefficient_posterior: column index out of range");
    return detail::posterior_for_column(detail::screening_gram(y, X, phi), j, cfg);
}

/// Screening posterior of every column; shares the whitened Gram matrix.
inline std::vector<CoefficientPosterior> screen_all(const VectorXd& y, const MatrixXd& X, const ARCoefficients& phi,
                                                    const ScreenConfig& cfg) {
    cfg.validate();
    const auto gram = detail::screening_gram(y, X, phi);
    std::vector<CoefficientPosterior> out;
    out.reserve(static_cast<std::size_t>(X.cols()));
    for (Index j = 0; j < X.cols(); ++j) out.push_back(detail::posterior_for_column(gram, j, cfg));
    return out;
}

/// Location-scale Student-t density; `scale_sq` is the squared scale.
inline double student_t_density(double x, double dof, double loc, double scale_sq) {
    const double z2 = (x - loc) * (x - loc) / scale_sq;
    const double log_norm = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                            0.5 * std::log(dof * std::numbers::pi * scale_sq);
    return std::exp(log_norm - 0.5 * (dof + 1.0) * std::log1p(z2 / dof));
}

/**
 * Marginal posterior density of beta_j. Each component is a t with dof n + 2a,
 * centre mu_kj and squared scale 2 psi_kj (psi_kj carries an extra factor 1/2
 * relative to the conventional parameterisation).
 */
inline double mixture_density(const CoefficientPosterior& post, double beta) {
    return (1.0 - post.incl_prob) * student_t_density(beta, post.dof, post.mu0, 2.0 * post.psi0) +
           post.incl_prob * student_t_density(beta, post.dof, post.mu1, 2.0 * post.psi1);
}

struct EigenRange {
    double min = 0.0;
    double max = 0.0;
};

inline EigenRange eigen_diagnostic(const MatrixXd& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("eigen_diagnostic: matrix is not square");
    if (M.size() == 0) return {};
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8) throw std::invalid_argument("eigen_diagnostic: matrix is not symmetric (" + std::to_string(asym) + ")");
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

/**
 * Correlation-ratio diagnostic over an assumed active set S:
 * sup_{j not in S} max_{k in S} |rho_jk / (1 + sum_{l != j,k} rho_kl)|
 * with rho_kl = x_k' x_l / n. Reported only; nothing enforces a bound.
 */
inline double correlation_ratio(const MatrixXd& X, const std::vector<Index>& active) {
    const Index p = X.cols();
    const MatrixXd rho = (X.transpose() * X) / static_cast<double>(X.rows());
    std::vector<bool> in_active(static_cast<std::size_t>(p), false);
    for (Index k : active) in_active.at(static_cast<std::size_t>(k)) = true;
    double worst = 0.0;
    for (Index j = 0; j < p; ++j) {
        if (in_active[static_cast<std::size_t>(j)]) continue;
        for (Index k : active) {
            const double row_sum = rho.row(k).sum() - rho(k, j) - rho(k, k);
            worst = std::max(worst, std::abs(rho(j, k) / (1.0 + row_sum)));
        }
    }
    return worst;
}

} // namespace ssar
