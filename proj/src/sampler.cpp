#include "gsw/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsw/errors.hpp"
#include "gsw/walk_engine.hpp"

namespace gsw {

namespace {

constexpr double kSnapTol = 1e-7;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

CovariateMatrix::CovariateMatrix(linalg::Matrix x) : x_(std::move(x)) {
    double max_sq = 0.0;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
        double s = 0.0;
        for (double v : x_.row(i)) s += v * v;
        max_sq = std::max(max_sq, s);
    }
    all_zero_ = (max_sq == 0.0);
    xi_ = all_zero_ ? 1.0 : std::sqrt(max_sq);
}

double CovariateMatrix::imbalance_norm(std::span<const std::int8_t> z) const {
    if (z.size() != units()) throw DimensionMismatch("imbalance_norm: assignment length != units");
    double total = 0.0;
    for (std::size_t j = 0; j < covariates(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < units(); ++i) s += static_cast<double>(z[i]) * x_(i, j);
        total += s * s;
    }
    return total;
}

void DesignConfig::validate(std::size_t n) const {
    if (!(phi > 0.0) || phi > 1.0) throw InvalidConfig("phi must lie in (0, 1]");
    if (!probabilities.empty()) {
        if (probabilities.size() != n)
            throw InvalidConfig("probability vector length != number of units");
        for (double p : probabilities)
            if (!(p > 0.0) || !(p < 1.0))
                throw InvalidConfig("each assignment probability must lie strictly inside (0, 1)");
    }
}

double regularizer(double phi, double xi) { return xi * xi * phi / (1.0 - phi); }

namespace walk {

bool uses_factor(const CovariateMatrix& x, const DesignConfig& cfg) {
    return cfg.phi < 1.0 && !x.all_zero();
}

linalg::CholeskyFactor initial_factor(const CovariateMatrix& x, const DesignConfig& cfg) {
    const std::size_t d = x.covariates();
    linalg::SymmetricMatrix gram(d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.units(); ++i) s += x.matrix()(i, a) * x.matrix()(i, b);
            gram.set(a, b, s);
        }
    }
    const double lambda = regularizer(cfg.phi, x.xi());
    for (std::size_t a = 0; a < d; ++a) gram.add(a, a, lambda);
    return linalg::cholesky_factor(gram);
}

WalkState init_state(const CovariateMatrix& x, const DesignConfig& cfg) {
    const std::size_t n = x.units();
    WalkState state;
    state.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) state.z[i] = 2.0 * cfg.pi(i) - 1.0;
    state.alive.resize(n);
    for (std::size_t i = 0; i < n; ++i) state.alive[i] = static_cast<std::uint32_t>(i);
    state.is_alive.assign(n, 1);
    state.cov_sum.assign(x.covariates(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < x.covariates(); ++j) state.cov_sum[j] += x.matrix()(i, j);
    if (uses_factor(x, cfg)) state.factor = initial_factor(x, cfg);
    return state;
}

// Removes one row from the maintained factor, refactorizing from the current
// alive-minus-pivot set if the downdate loses definiteness. A second
// consecutive failure is fatal.
static void remove_row(WalkState& state, const CovariateMatrix& x, const DesignConfig& cfg,
                       std::uint32_t unit) {
    if (!uses_factor(x, cfg)) return;
    try {
        state.factor.downdate(x.row(unit));
        state.downdate_failures = 0;
    } catch (const DowndateBreaksPd&) {
        if (++state.downdate_failures >= 2)
            throw FatalNumerical("factor maintenance failed twice in a row");
        const std::size_t d = x.covariates();
        linalg::SymmetricMatrix gram(d);
        for (std::uint32_t i : state.alive) {
            if (static_cast<int>(i) == state.pivot || !state.is_alive[i]) continue;
            auto row = x.row(i);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a; b < d; ++b) gram.add(a, b, row[a] * row[b]);
        }
        const double lambda = regularizer(cfg.phi, x.xi());
        for (std::size_t a = 0; a < d; ++a) gram.add(a, a, lambda);
        try {
            state.factor = linalg::cholesky_factor(gram);
        } catch (const NotPositiveDefinite&) {
            throw FatalNumerical("refactorization after downdate failure is not positive definite");
        }
    }
}

void select_pivot(WalkState& state, const CovariateMatrix& x, const DesignConfig& cfg,
                  std::uint32_t unit) {
    state.pivot = static_cast<int>(unit);
    for (std::size_t j = 0; j < x.covariates(); ++j) state.cov_sum[j] -= x.matrix()(unit, j);
    remove_row(state, x, cfg, unit);
}

std::vector<std::uint32_t> apply_step(WalkState& state, const CovariateMatrix& x,
                                      const DesignConfig& cfg, std::span<const double> u,
                                      double delta, std::size_t hit) {
    for (std::uint32_t i : state.alive) state.z[i] += delta * u[i];
    state.z[hit] = state.z[hit] > 0.0 ? 1.0 : -1.0;

    std::vector<std::uint32_t> frozen;
    for (std::uint32_t i : state.alive) {
        if (std::abs(state.z[i]) < 1.0 - kSnapTol) continue;
        state.z[i] = state.z[i] > 0.0 ? 1.0 : -1.0;
        state.is_alive[i] = 0;
        frozen.push_back(i);
        if (static_cast<int>(i) == state.pivot) {
            state.pivot = -1;  // row already out of the factor
        } else {
            for (std::size_t j = 0; j < x.covariates(); ++j)
                state.cov_sum[j] -= x.matrix()(i, j);
            remove_row(state, x, cfg, i);
        }
    }
    std::erase_if(state.alive, [&](std::uint32_t i) { return !state.is_alive[i]; });
    ++state.iteration;
    return frozen;
}

std::vector<double> step_direction(const WalkState& state, const CovariateMatrix& x,
                                   const DesignConfig& cfg) {
    return cfg.balanced ? step_direction_balanced(state, x, cfg.phi)
                        : step_direction_fast(state, x, cfg.phi);
}

}  // namespace walk

StepSizes step_sizes(std::span<const double> z, std::span<const double> u) {
    StepSizes out;
    out.delta_plus = std::numeric_limits<double>::infinity();
    out.delta_minus = std::numeric_limits<double>::infinity();
    out.hit_plus = out.hit_minus = z.size();
    for (std::size_t i = 0; i < z.size(); ++i) {
        double ui = u[i];
        if (ui == 0.0) continue;
        double toward_plus, toward_minus;
        if (ui > 0.0) {
            toward_plus = (1.0 - z[i]) / ui;
            toward_minus = (z[i] + 1.0) / ui;
        } else {
            toward_plus = (-1.0 - z[i]) / ui;
            toward_minus = (z[i] - 1.0) / ui;
        }
        if (toward_plus < out.delta_plus) {
            out.delta_plus = toward_plus;
            out.hit_plus = i;
        }
        if (toward_minus < out.delta_minus) {
            out.delta_minus = toward_minus;
            out.hit_minus = i;
        }
    }
    if (out.hit_plus == z.size()) throw ZeroDirection("step_sizes: direction has no nonzero coordinate");
    return out;
}

std::vector<double> step_direction_fast(const WalkState& state, const CovariateMatrix& x, double phi) {
    if (state.pivot < 0) throw NoPivot("step direction requested with no pivot set");
    const std::size_t n = x.units();
    const std::size_t d = x.covariates();
    const auto pivot = static_cast<std::uint32_t>(state.pivot);

    std::vector<double> u(n, 0.0);
    u[pivot] = 1.0;
    if (phi >= 1.0 || x.all_zero() || state.alive.size() <= 1) return u;

    const double lambda = regularizer(phi, x.xi());
    auto xp = x.row(pivot);

    // a1 = (M - lambda I) x_p = X_t^T X_t x_p, recovered from the factor.
    std::vector<double> a1(d);
    state.factor.multiply(xp, a1);
    for (std::size_t j = 0; j < d; ++j) a1[j] -= lambda * xp[j];

    state.factor.solve_in_place(a1);  // a2 = M^{-1} a1

    std::vector<double> w(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = xp[j] - a1[j];

    const double coef = -(1.0 - phi) / (x.xi() * x.xi() * phi);
    for (std::uint32_t i : state.alive) {
        if (i == pivot) continue;
        u[i] = coef * dot(x.row(i), w);
    }
    return u;
}

std::vector<double> step_direction_balanced(const WalkState& state, const CovariateMatrix& x,
                                            double phi) {
    if (state.pivot < 0) throw NoPivot("step direction requested with no pivot set");
    const std::size_t n = x.units();
    const std::size_t d = x.covariates();
    const auto pivot = static_cast<std::uint32_t>(state.pivot);

    std::vector<double> u(n, 0.0);
    u[pivot] = 1.0;
    if (state.alive.size() <= 1) return u;  // single alive unit: unconstrained basis step

    const bool plain = (phi >= 1.0 || x.all_zero());
    std::vector<double> w(d, 0.0);
    std::vector<double> r2(d, 0.0);
    if (!plain) {
        const double lambda = regularizer(phi, x.xi());
        auto xp = x.row(pivot);
        std::vector<double> a1(d);
        state.factor.multiply(xp, a1);
        for (std::size_t j = 0; j < d; ++j) a1[j] -= lambda * xp[j];
        state.factor.solve_in_place(a1);
        for (std::size_t j = 0; j < d; ++j) w[j] = xp[j] - a1[j];
        r2 = state.cov_sum;
        state.factor.solve_in_place(r2);
    }

    const double a_coef = plain ? 0.0 : (1.0 - phi) / (x.xi() * x.xi() * phi);
    const double r_coef = 1.0 / (2.0 * phi);

    double sum_a = 0.0, sum_r = 0.0;
    std::vector<double> a_part, r_part;
    a_part.reserve(state.alive.size());
    r_part.reserve(state.alive.size());
    for (std::uint32_t i : state.alive) {
        if (i == pivot) continue;
        auto row = x.row(i);
        double ai = plain ? 0.0 : a_coef * dot(row, w);
        double ri = plain ? r_coef : r_coef * (1.0 - dot(row, r2));
        a_part.push_back(ai);
        r_part.push_back(ri);
        sum_a += ai;
        sum_r += ri;
    }
    if (std::abs(sum_r) < 1e-12)
        throw DegenerateConstraint("balance constraint unenforceable: <1, r_t> vanished");
    const double nu = (1.0 - sum_a) / sum_r;

    std::size_t k = 0;
    for (std::uint32_t i : state.alive) {
        if (i == pivot) continue;
        u[i] = -(a_part[k] + nu * r_part[k]);
        ++k;
    }
    return u;
}

std::vector<double> step_direction_naive(const WalkState& state, const CovariateMatrix& x, double phi) {
    if (state.pivot < 0) throw NoPivot("step direction requested with no pivot set");
    const std::size_t n = x.units();
    const auto pivot = static_cast<std::uint32_t>(state.pivot);

    std::vector<double> u(n, 0.0);
    u[pivot] = 1.0;
    if (state.alive.size() <= 1) return u;

    std::vector<std::uint32_t> others;
    for (std::uint32_t i : state.alive)
        if (i != pivot) others.push_back(i);
    const std::size_t k = others.size();

    // Normal equations of the augmented columns b_i = (sqrt(phi) e_i ; ...):
    // N = phi I_k + (1 - phi) xi^{-2} X_t X_t^T.
    const double cross_coef = (1.0 - phi) / (x.xi() * x.xi());
    linalg::SymmetricMatrix normal(k);
    std::vector<double> rhs(k);
    for (std::size_t a = 0; a < k; ++a) {
        auto row_a = x.row(others[a]);
        for (std::size_t b = a; b < k; ++b) {
            double v = cross_coef * dot(row_a, x.row(others[b]));
            if (a == b) v += phi;
            normal.set(a, b, v);
        }
        rhs[a] = -cross_coef * dot(row_a, x.row(pivot));
    }
    std::vector<double> sol;
    try {
        sol = linalg::chol_solve(linalg::cholesky_factor(normal), rhs);
    } catch (const NotPositiveDefinite&) {
        throw SingularSystem("naive step direction: normal equations not solvable");
    }
    for (std::size_t a = 0; a < k; ++a) u[others[a]] = sol[a];
    return u;
}

std::vector<double> step_direction_balanced_naive(const WalkState& state, const CovariateMatrix& x,
                                                  double phi) {
    if (state.pivot < 0) throw NoPivot("step direction requested with no pivot set");
    const std::size_t n = x.units();
    const auto pivot = static_cast<std::uint32_t>(state.pivot);

    std::vector<double> u(n, 0.0);
    u[pivot] = 1.0;
    if (state.alive.size() <= 1) return u;

    std::vector<std::uint32_t> others;
    for (std::uint32_t i : state.alive)
        if (i != pivot) others.push_back(i);
    const std::size_t k = others.size();

    // KKT system of min ||b_p + B_t v||^2 subject to <1, v> = -1.
    const double cross_coef = (1.0 - phi) / (x.xi() * x.xi());
    linalg::Matrix kkt(k + 1, k + 1);
    std::vector<double> rhs(k + 1);
    for (std::size_t a = 0; a < k; ++a) {
        auto row_a = x.row(others[a]);
        for (std::size_t b = 0; b < k; ++b) {
            double v = cross_coef * dot(row_a, x.row(others[b]));
            if (a == b) v += phi;
            kkt(a, b) = 2.0 * v;
        }
        kkt(a, k) = 1.0;
        kkt(k, a) = 1.0;
        rhs[a] = -2.0 * cross_coef * dot(row_a, x.row(pivot));
    }
    kkt(k, k) = 0.0;
    rhs[k] = -1.0;
    auto sol = linalg::solve_dense(std::move(kkt), std::move(rhs));
    for (std::size_t a = 0; a < k; ++a) u[others[a]] = sol[a];
    return u;
}

GswSampler::GswSampler(CovariateMatrix x, DesignConfig cfg) : x_(std::move(x)), cfg_(std::move(cfg)) {
    if (x_.units() == 0) throw InvalidConfig("covariate matrix has no units");
    cfg_.validate(x_.units());
    identity_walk_ = !walk::uses_factor(x_, cfg_);
    if (!identity_walk_) initial_factor_ = walk::initial_factor(x_, cfg_);
    initial_cov_sum_.assign(x_.covariates(), 0.0);
    for (std::size_t i = 0; i < x_.units(); ++i)
        for (std::size_t j = 0; j < x_.covariates(); ++j)
            initial_cov_sum_[j] += x_.matrix()(i, j);
}

Assignment GswSampler::sample(std::uint64_t seed, std::uint64_t replicate) const {
    RandomStream stream(seed, replicate);
    return sample(stream);
}

Assignment GswSampler::sample(RandomStream& stream, bool record_trace,
                              const StepObserver* observer) const {
    const std::size_t n = x_.units();
    WalkState state;
    state.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) state.z[i] = 2.0 * cfg_.pi(i) - 1.0;
    state.alive.resize(n);
    for (std::size_t i = 0; i < n; ++i) state.alive[i] = static_cast<std::uint32_t>(i);
    state.is_alive.assign(n, 1);
    state.cov_sum = initial_cov_sum_;
    if (!identity_walk_) state.factor = initial_factor_;

    Assignment out;
    if (record_trace) out.trace.emplace();
    run_walk(state, stream, out, observer);
    return out;
}

void GswSampler::run_walk(WalkState& state, RandomStream& stream, Assignment& out,
                          const StepObserver* observer) const {
    const std::size_t n = x_.units();
    const std::size_t max_iterations = n + 1;

    while (!state.alive.empty()) {
        if (state.iteration >= max_iterations)
            throw FatalNumerical("walk exceeded its iteration bound without terminating");
        if (state.pivot < 0) {
            std::size_t k = stream.next_index(state.alive.size());
            walk::select_pivot(state, x_, cfg_, state.alive[k]);
        }
        std::vector<double> u = walk::step_direction(state, x_, cfg_);
        if (observer) (*observer)(state, u);

        StepSizes sizes = step_sizes(state.z, u);
        double p_plus = sizes.delta_minus / (sizes.delta_plus + sizes.delta_minus);
        double delta;
        std::size_t hit;
        if (stream.next_double() < p_plus) {
            delta = sizes.delta_plus;
            hit = sizes.hit_plus;
        } else {
            delta = -sizes.delta_minus;
            hit = sizes.hit_minus;
        }
        std::uint32_t pivot_before = static_cast<std::uint32_t>(state.pivot);
        auto frozen = walk::apply_step(state, x_, cfg_, u, delta, hit);
        if (out.trace) out.trace->push_back({pivot_before, delta, std::move(frozen)});
    }

    out.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.z[i] = state.z[i] > 0.0 ? 1 : -1;
}

Assignment sample_assignment(const CovariateMatrix& x, const DesignConfig& cfg, RandomStream& stream,
                             bool record_trace) {
    GswSampler sampler(x, cfg);
    return sampler.sample(stream, record_trace);
}

}  // namespace gsw
