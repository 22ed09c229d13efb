#include "gsw/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "gsw/errors.hpp"
#include "gsw/sampler.hpp"

namespace gsw {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Lower bound on every estimator denominator, from the worst-case bound on
// second-order assignment probabilities: 4 P(z_i, z_j) >= (1/n) min{phi,
// phi^2 / (1 - phi)}.
double denominator_floor(double phi, std::size_t n) {
    double m = phi < 1.0 ? std::min(phi, phi * phi / (1.0 - phi)) : 1.0;
    return m / static_cast<double>(n);
}

double floored(double denom, double floor_value, std::size_t& count) {
    if (denom < floor_value) {
        ++count;
        return floor_value;
    }
    return denom;
}

}  // namespace

double ht_estimate(const OutcomeData& data, std::span<const double> probabilities) {
    const std::size_t n = data.y.size();
    if (data.z.size() != n) throw DimensionMismatch("ht_estimate: outcome and assignment lengths differ");
    if (!probabilities.empty() && probabilities.size() != n)
        throw DimensionMismatch("ht_estimate: probability vector length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pi = probabilities.empty() ? 0.5 : probabilities[i];
        s += data.z[i] > 0 ? data.y[i] / pi : -data.y[i] / (1.0 - pi);
    }
    return s / static_cast<double>(n);
}

QMatrix compute_q(const CovariateMatrix& x, double phi) {
    if (!(phi > 0.0) || phi > 1.0) throw InvalidConfig("compute_q: phi must lie in (0, 1]");
    const std::size_t n = x.units();
    const std::size_t d = x.covariates();

    QMatrix q{linalg::SymmetricMatrix(n), phi, x.xi()};
    if (phi >= 1.0 || x.all_zero()) {
        for (std::size_t i = 0; i < n; ++i) q.entries.set(i, i, 1.0 / phi);
        return q;
    }

    linalg::SymmetricMatrix gram(d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x.matrix()(i, a) * x.matrix()(i, b);
            gram.set(a, b, s);
        }
    const double lambda = regularizer(phi, x.xi());
    for (std::size_t a = 0; a < d; ++a) gram.add(a, a, lambda);
    auto factor = linalg::cholesky_factor(gram);

    // One solve per unit, then inner products: Q_ij = (1{i=j} - x_i^T s_j) / phi.
    linalg::Matrix solved(n, d);
    std::vector<double> buf(d);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        std::copy(row.begin(), row.end(), buf.begin());
        factor.solve_in_place(buf);
        std::copy(buf.begin(), buf.end(), solved.row(i).begin());
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = -dot(x.row(i), solved.row(j));
            if (i == j) v += 1.0;
            q.entries.set(i, j, v / phi);
        }
    return q;
}

double ridge_loss_exact(const QMatrix& q, std::span<const double> m) {
    const std::size_t n = q.entries.order();
    if (m.size() != n) throw DimensionMismatch("ridge_loss_exact: vector length != Q order");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += q.entries(i, j) * m[j];
        s += m[i] * row;
    }
    return s;
}

double ridge_loss_via_regression(const CovariateMatrix& x, double phi, std::span<const double> m) {
    if (!(phi > 0.0) || !(phi < 1.0))
        throw InvalidConfig("ridge_loss_via_regression: phi must lie in (0, 1)");
    const std::size_t n = x.units();
    const std::size_t d = x.covariates();
    if (m.size() != n) throw DimensionMismatch("ridge_loss_via_regression: vector length != units");

    // b = (X^T X + lambda I)^{-1} X^T m.
    linalg::SymmetricMatrix gram(d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x.matrix()(i, a) * x.matrix()(i, b);
            gram.set(a, b, s);
        }
    const double lambda = regularizer(phi, x.xi());
    for (std::size_t a = 0; a < d; ++a) gram.add(a, a, lambda);

    std::vector<double> beta(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x.matrix()(i, j) * m[i];
        beta[j] = s;
    }
    linalg::cholesky_factor(gram).solve_in_place(beta);

    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = m[i] - dot(x.row(i), beta);
        residual += r * r;
    }
    double penalty = x.xi() * x.xi() * dot(beta, beta);
    return residual / phi + penalty / (1.0 - phi);
}

RidgeLossEstimate estimate_ridge_loss(const QMatrix& q, const OutcomeData& data,
                                      const linalg::SymmetricMatrix& cross_moments) {
    const std::size_t n = q.entries.order();
    if (data.y.size() != n || data.z.size() != n || cross_moments.order() != n)
        throw DimensionMismatch("estimate_ridge_loss: dimension mismatch");

    RidgeLossEstimate est;
    est.method = RidgeLossMethod::kHorvitzThompson;
    const double floor_value = denominator_floor(q.phi, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += data.y[i] * data.y[i] * q.entries(i, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            double zz = static_cast<double>(data.z[i]) * static_cast<double>(data.z[j]);
            double denom = floored(1.0 + zz * cross_moments(i, j), floor_value,
                                   est.floored_denominators);
            total += 2.0 * data.y[i] * data.y[j] * q.entries(i, j) / denom;
        }
    }
    est.value = total;
    return est;
}

RidgeLossEstimate estimate_ridge_loss_nonuniform(const QMatrix& q, const OutcomeData& data,
                                                 std::span<const double> probabilities,
                                                 const linalg::SymmetricMatrix& cross_moments,
                                                 std::span<const double> marginal_moments) {
    const std::size_t n = q.entries.order();
    if (data.y.size() != n || data.z.size() != n || probabilities.size() != n ||
        cross_moments.order() != n || marginal_moments.size() != n)
        throw DimensionMismatch("estimate_ridge_loss_nonuniform: dimension mismatch");

    // Observed vector normalized by the probability of the observed arm.
    std::vector<double> yt(n);
    for (std::size_t i = 0; i < n; ++i) {
        double pi = probabilities[i];
        yt[i] = data.z[i] > 0 ? data.y[i] / (2.0 * pi) : data.y[i] / (2.0 * (1.0 - pi));
    }

    RidgeLossEstimate est;
    est.method = RidgeLossMethod::kNonuniform;
    const double floor_value = denominator_floor(q.phi, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double zi = data.z[i];
        double diag_denom = floored(1.0 + zi * marginal_moments[i], floor_value,
                                    est.floored_denominators);
        total += yt[i] * yt[i] * q.entries(i, i) / diag_denom;
        for (std::size_t j = i + 1; j < n; ++j) {
            double zj = data.z[j];
            double denom = floored(1.0 + zi * marginal_moments[i] + zj * marginal_moments[j] +
                                       zi * zj * cross_moments(i, j),
                                   floor_value, est.floored_denominators);
            total += 2.0 * yt[i] * yt[j] * q.entries(i, j) / denom;
        }
    }
    est.value = total;
    return est;
}

RidgeLossEstimate estimate_ridge_loss_regression(const CovariateMatrix& x, double phi,
                                                 const OutcomeData& data) {
    const std::size_t n = x.units();
    const std::size_t d = x.covariates();
    if (data.y.size() != n || data.z.size() != n)
        throw DimensionMismatch("estimate_ridge_loss_regression: dimension mismatch");

    auto arm_loss = [&](std::int8_t sign) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (data.z[i] == sign) members.push_back(i);
        if (members.empty()) throw EmptyArm("estimate_ridge_loss_regression: a treatment group is empty");

        // Minimizer of (2/phi) sum (y_i - <x_i, b>)^2 + xi^2 ||b||^2 / (1-phi)
        // solves (Xa^T Xa + xi^2 phi / (2 (1-phi)) I) b = Xa^T ya.
        std::vector<double> beta(d, 0.0);
        if (phi < 1.0 && !x.all_zero() && d > 0) {
            linalg::SymmetricMatrix gram(d);
            std::vector<double> rhs(d, 0.0);
            for (std::size_t i : members) {
                auto row = x.row(i);
                for (std::size_t a = 0; a < d; ++a) {
                    for (std::size_t b = a; b < d; ++b) gram.add(a, b, row[a] * row[b]);
                    rhs[a] += row[a] * data.y[i];
                }
            }
            const double lambda = 0.5 * regularizer(phi, x.xi());
            for (std::size_t a = 0; a < d; ++a) gram.add(a, a, lambda);
            beta = linalg::chol_solve(linalg::cholesky_factor(gram), rhs);
        }

        double residual = 0.0;
        for (std::size_t i : members) {
            double r = data.y[i] - dot(x.row(i), beta);
            residual += r * r;
        }
        double value = 2.0 * residual / phi;
        if (phi < 1.0) value += x.xi() * x.xi() * dot(beta, beta) / (1.0 - phi);
        return value;
    };

    RidgeLossEstimate est;
    est.method = RidgeLossMethod::kRegression;
    est.value = 0.5 * (arm_loss(1) + arm_loss(-1));
    return est;
}

ConfidenceInterval confidence_interval(double tau_hat, double loss, std::size_t n, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw InvalidConfig("confidence_interval: alpha must be in (0, 1)");
    if (loss < 0.0) throw InvalidConfig("confidence_interval: loss must be nonnegative");
    ConfidenceInterval ci;
    ci.center = tau_hat;
    ci.alpha = alpha;
    double nn = static_cast<double>(n) * static_cast<double>(n);
    ci.radius = std::sqrt(8.0 * std::log(2.0 / alpha) * loss / nn);
    return ci;
}

double worst_case_mse_bound(std::span<const double> m, double phi) {
    if (!(phi > 0.0) || phi > 1.0) throw InvalidConfig("worst_case_mse_bound: phi must lie in (0, 1]");
    double nd = static_cast<double>(m.size());
    double second_moment = dot(m, m) / nd;
    return 4.0 * second_moment / (phi * nd);
}

double mse_from_cov(const linalg::SymmetricMatrix& cov, std::span<const double> m_tilde,
                    std::size_t n) {
    if (cov.order() != m_tilde.size()) throw DimensionMismatch("mse_from_cov: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < cov.order(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < cov.order(); ++j) row += cov(i, j) * m_tilde[j];
        s += m_tilde[i] * row;
    }
    double nn = static_cast<double>(n) * static_cast<double>(n);
    return 4.0 * s / nn;
}

}  // namespace gsw
