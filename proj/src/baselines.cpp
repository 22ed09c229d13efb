#include "gsw/baselines.hpp"

#include <algorithm>
#include <utility>

#include "gsw/errors.hpp"

namespace gsw {

BernoulliDesign::BernoulliDesign(std::size_t n, std::vector<double> probabilities)
    : n_(n), probabilities_(std::move(probabilities)) {
    if (n_ == 0) throw InvalidConfig("bernoulli design: no units");
    if (!probabilities_.empty()) {
        if (probabilities_.size() != n_)
            throw InvalidConfig("bernoulli design: probability vector length mismatch");
        for (double p : probabilities_)
            if (!(p > 0.0) || !(p < 1.0))
                throw InvalidConfig("bernoulli design: probabilities must lie in (0, 1)");
    }
}

Assignment BernoulliDesign::sample(std::uint64_t seed, std::uint64_t replicate) const {
    RandomStream stream(seed, replicate);
    return sample(stream);
}

Assignment BernoulliDesign::sample(RandomStream& stream) const {
    Assignment a;
    a.z.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        double pi = probabilities_.empty() ? 0.5 : probabilities_[i];
        a.z[i] = stream.next_double() < pi ? 1 : -1;
    }
    return a;
}

GroupBalancedDesign::GroupBalancedDesign(std::size_t n) : n_(n) {
    if (n_ == 0 || n_ % 2 != 0) throw OddN("group-balanced design requires an even unit count");
}

Assignment GroupBalancedDesign::sample(std::uint64_t seed, std::uint64_t replicate) const {
    RandomStream stream(seed, replicate);
    return sample(stream);
}

Assignment GroupBalancedDesign::sample(RandomStream& stream) const {
    // Partial Fisher-Yates: the first n/2 slots of a random permutation get +1.
    std::vector<std::uint32_t> idx(n_);
    for (std::size_t i = 0; i < n_; ++i) idx[i] = static_cast<std::uint32_t>(i);
    Assignment a;
    a.z.assign(n_, -1);
    for (std::size_t i = 0; i < n_ / 2; ++i) {
        std::size_t j = i + stream.next_index(n_ - i);
        std::swap(idx[i], idx[j]);
        a.z[idx[i]] = 1;
    }
    return a;
}

RerandomizedDesign::RerandomizedDesign(CovariateMatrix x, RerandConfig cfg)
    : x_(std::move(x)), cfg_(cfg) {
    if (!(cfg_.criterion_fraction > 0.0) || cfg_.criterion_fraction > 1.0)
        throw InvalidConfig("rerandomization: criterion fraction must lie in (0, 1]");
    if (cfg_.max_draws == 0) throw InvalidConfig("rerandomization: max_draws must be positive");
    if (cfg_.base == RerandBase::kGroupBalanced && x_.units() % 2 != 0)
        throw OddN("rerandomization over the group-balanced base requires an even unit count");
    // Reference moment is exact for the fully randomized design:
    // E||X^T z||^2 = sum_i ||x_i||^2.
    double total = 0.0;
    for (std::size_t i = 0; i < x_.units(); ++i)
        for (double v : x_.row(i)) total += v * v;
    threshold_ = cfg_.criterion_fraction * total;
}

Assignment RerandomizedDesign::sample(std::uint64_t seed, std::uint64_t replicate) const {
    RandomStream stream(seed, replicate);
    return sample(stream);
}

Assignment RerandomizedDesign::sample(RandomStream& stream) const {
    const std::size_t n = x_.units();
    for (std::uint64_t draw = 0; draw < cfg_.max_draws; ++draw) {
        Assignment candidate;
        if (cfg_.base == RerandBase::kBernoulli) {
            candidate.z.resize(n);
            for (std::size_t i = 0; i < n; ++i) candidate.z[i] = stream.next_double() < 0.5 ? 1 : -1;
        } else {
            GroupBalancedDesign base(n);
            candidate = base.sample(stream);
        }
        if (x_.imbalance_norm(candidate.z) <= threshold_) return candidate;
    }
    throw ExhaustedDraws("rerandomization: no acceptable assignment within max_draws");
}

Assignment rerandomize(const CovariateMatrix& x, const RerandConfig& cfg, RandomStream& stream) {
    RerandomizedDesign design(x, cfg);
    return design.sample(stream);
}

}  // namespace gsw
