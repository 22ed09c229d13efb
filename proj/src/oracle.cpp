#include "gsw/oracle.hpp"

#include <algorithm>
#include <map>

#include "gsw/errors.hpp"
#include "gsw/sampler.hpp"
#include "gsw/walk_engine.hpp"

namespace gsw {

namespace {

// Compensated accumulator; leaf counts reach ~1e5 and the distribution tests
// assert at 1e-10, so plain summation is too lossy.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

struct Enumerator {
    const CovariateMatrix& x;
    const DesignConfig& cfg;
    std::map<std::vector<std::int8_t>, Kahan> leaves;

    void record(const WalkState& state, double prob) {
        std::vector<std::int8_t> pattern(state.z.size());
        for (std::size_t i = 0; i < state.z.size(); ++i) pattern[i] = state.z[i] > 0.0 ? 1 : -1;
        leaves[std::move(pattern)].add(prob);
    }

    void recurse(const WalkState& state, double prob) {
        if (state.alive.empty()) {
            record(state, prob);
            return;
        }
        if (state.pivot < 0) {
            const double w = prob / static_cast<double>(state.alive.size());
            // Copy the alive list: select_pivot mutates the state.
            std::vector<std::uint32_t> candidates = state.alive;
            for (std::uint32_t unit : candidates) {
                WalkState branch = state;
                walk::select_pivot(branch, x, cfg, unit);
                descend(branch, w);
            }
        } else {
            descend(state, prob);
        }
    }

    void descend(const WalkState& state, double prob) {
        std::vector<double> u = walk::step_direction(state, x, cfg);
        StepSizes sizes = step_sizes(state.z, u);
        const double p_plus = sizes.delta_minus / (sizes.delta_plus + sizes.delta_minus);

        WalkState up = state;
        walk::apply_step(up, x, cfg, u, sizes.delta_plus, sizes.hit_plus);
        recurse(up, prob * p_plus);

        WalkState down = state;
        walk::apply_step(down, x, cfg, u, -sizes.delta_minus, sizes.hit_minus);
        recurse(down, prob * (1.0 - p_plus));
    }
};

}  // namespace

DesignDistribution enumerate_distribution(const CovariateMatrix& x, const DesignConfig& cfg) {
    const std::size_t n = x.units();
    if (n > 8) throw TooLarge("exact enumeration is guarded to n <= 8");
    cfg.validate(n);

    Enumerator enumerator{x, cfg, {}};
    enumerator.recurse(walk::init_state(x, cfg), 1.0);

    DesignDistribution dist;
    dist.n = n;
    dist.support.reserve(enumerator.leaves.size());
    for (auto& [pattern, acc] : enumerator.leaves)
        dist.support.push_back({pattern, acc.sum});
    return dist;
}

ExactMoments exact_moments(const DesignDistribution& dist) {
    const std::size_t n = dist.n;
    ExactMoments m;
    m.mean.assign(n, 0.0);
    m.cross = linalg::SymmetricMatrix(n);
    m.cov = linalg::SymmetricMatrix(n);

    std::vector<Kahan> mean_acc(n);
    std::vector<Kahan> cross_acc(n * n);
    for (const auto& atom : dist.support) {
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = atom.assignment[i];
            mean_acc[i].add(atom.probability * zi);
            for (std::size_t j = i; j < n; ++j)
                cross_acc[i * n + j].add(atom.probability * zi * atom.assignment[j]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) m.mean[i] = mean_acc[i].sum;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m.cross.set(i, j, cross_acc[i * n + j].sum);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            m.cov.set(i, j, m.cross(i, j) - m.mean[i] * m.mean[j]);
    return m;
}

double exact_expectation(const DesignDistribution& dist,
                         const std::function<double(std::span<const std::int8_t>)>& f) {
    Kahan acc;
    for (const auto& atom : dist.support) acc.add(atom.probability * f(atom.assignment));
    return acc.sum;
}

}  // namespace gsw
