#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsw/design.hpp"
#include "gsw/linalg.hpp"

namespace gsw {

// Observed outcomes together with the assignment they were observed under.
struct OutcomeData {
    std::vector<double> y;
    std::vector<std::int8_t> z;
};

// Q = (phi I + (1 - phi) xi^{-2} X X^T)^{-1}, the covariance upper bound that
// drives the MSE bound and the ridge loss. Entry bounds (diag >= 1,
// |Q_ij| <= (1-phi)/phi, Q_ij^2 <= (1-phi)^2 Q_ii Q_jj) are exercised in tests.
struct QMatrix {
    linalg::SymmetricMatrix entries;
    double phi = 1.0;
    double xi = 1.0;
};

enum class RidgeLossMethod { kExact, kHorvitzThompson, kNonuniform, kRegression };

struct RidgeLossEstimate {
    double value = 0.0;
    RidgeLossMethod method = RidgeLossMethod::kExact;
    // Number of estimator denominators clamped to the second-order
    // probability floor. Nonzero counts are a warning, not a failure; they
    // arise when Monte Carlo moment noise pushes a denominator below the
    // guaranteed bound.
    std::size_t floored_denominators = 0;
};

struct ConfidenceInterval {
    double center = 0.0;
    double radius = 0.0;
    double alpha = 0.05;
};

// Horvitz-Thompson point estimate of the average treatment effect:
// (1/n) [ sum_{z_i = +1} y_i / pi_i - sum_{z_i = -1} y_i / (1 - pi_i) ].
// An empty pi means uniform 1/2, reducing to (2/n) <z, y>.
double ht_estimate(const OutcomeData& data, std::span<const double> probabilities = {});

// Computes Q through the Woodbury identity: one d x d factorization plus a
// solve-and-inner-product pass per unit, O(n^2 d) total. phi = 1 collapses
// to the identity.
QMatrix compute_q(const CovariateMatrix& x, double phi);

// m^T Q m.
double ridge_loss_exact(const QMatrix& q, std::span<const double> m);

// The same loss through its regression form: evaluates
// ||m - X b||^2 / phi + xi^2 ||b||^2 / (1 - phi) at the closed-form ridge
// minimizer b = (X^T X + lambda I)^{-1} X^T m. Requires phi in (0, 1).
double ridge_loss_via_regression(const CovariateMatrix& x, double phi, std::span<const double> m);

// Horvitz-Thompson ridge loss estimate for the uniform design:
// L_hat = y^T Qhat y with Qhat_ii = Q_ii and
// Qhat_ij = Q_ij / (1 + z_i z_j E[z_i z_j]).
RidgeLossEstimate estimate_ridge_loss(const QMatrix& q, const OutcomeData& data,
                                      const linalg::SymmetricMatrix& cross_moments);

// Non-uniform counterpart: outcomes are rescaled to y_i / (2 pi_i) or
// y_i / (2 (1 - pi_i)), the diagonal denominator is 1 + z_i E[z_i], and the
// off-diagonal one is 1 + z_i E[z_i] + z_j E[z_j] + z_i z_j E[z_i z_j].
RidgeLossEstimate estimate_ridge_loss_nonuniform(const QMatrix& q, const OutcomeData& data,
                                                 std::span<const double> probabilities,
                                                 const linalg::SymmetricMatrix& cross_moments,
                                                 std::span<const double> marginal_moments);

// Moment-free alternative: fits a per-arm ridge over each treatment group,
//   Lreg_arm = min_b [ (2/phi) sum_{arm} (y_i - <x_i, b>)^2
//                      + xi^2 ||b||^2 / (1 - phi) ],
// and returns the average of the two arms. The in-sample fit makes the value
// systematically low when d is not small relative to n; no correction is
// applied. Throws EmptyArm when either treatment group is empty.
RidgeLossEstimate estimate_ridge_loss_regression(const CovariateMatrix& x, double phi,
                                                 const OutcomeData& data);

// Finite-sample interval: radius = sqrt(8 ln(2 / alpha) L / n^2).
ConfidenceInterval confidence_interval(double tau_hat, double loss, std::size_t n, double alpha);

// 4 M / (phi n) with M = ||m||^2 / n.
double worst_case_mse_bound(std::span<const double> m, double phi);

// (4 / n^2) m^T cov m; pass the probability-normalized vector for
// non-uniform designs.
double mse_from_cov(const linalg::SymmetricMatrix& cov, std::span<const double> m_tilde,
                    std::size_t n);

}  // namespace gsw
