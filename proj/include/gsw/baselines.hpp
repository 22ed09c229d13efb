#pragma once

#include <cstdint>
#include <vector>

#include "gsw/design.hpp"
#include "gsw/rng.hpp"

namespace gsw {

// Independent assignment with P(z_i = 1) = pi_i.
class BernoulliDesign : public Design {
public:
    BernoulliDesign(std::size_t n, std::vector<double> probabilities = {});

    std::size_t units() const override { return n_; }
    Assignment sample(std::uint64_t seed, std::uint64_t replicate) const override;
    Assignment sample(RandomStream& stream) const;

private:
    std::size_t n_;
    std::vector<double> probabilities_;  // empty means uniform 1/2
};

// Uniformly random +-1 vector with exactly n/2 positive entries. Requires an
// even unit count (throws OddN).
class GroupBalancedDesign : public Design {
public:
    explicit GroupBalancedDesign(std::size_t n);

    std::size_t units() const override { return n_; }
    Assignment sample(std::uint64_t seed, std::uint64_t replicate) const override;
    Assignment sample(RandomStream& stream) const;

private:
    std::size_t n_;
};

enum class RerandBase { kBernoulli, kGroupBalanced };

struct RerandConfig {
    double criterion_fraction = 0.5;  // a in (0, 1]
    std::uint64_t max_draws = 100000;
    RerandBase base = RerandBase::kGroupBalanced;
};

// Rejection sampling under the imbalance criterion
// ||X^T z||^2 <= a * sum_i ||x_i||^2, where the reference moment is the
// exact E||X^T z||^2 of the fully randomized design. Throws ExhaustedDraws
// when max_draws candidates all miss the criterion.
class RerandomizedDesign : public Design {
public:
    RerandomizedDesign(CovariateMatrix x, RerandConfig cfg);

    std::size_t units() const override { return x_.units(); }
    Assignment sample(std::uint64_t seed, std::uint64_t replicate) const override;
    Assignment sample(RandomStream& stream) const;

    double threshold() const { return threshold_; }

private:
    CovariateMatrix x_;
    RerandConfig cfg_;
    double threshold_;
};

Assignment rerandomize(const CovariateMatrix& x, const RerandConfig& cfg, RandomStream& stream);

}  // namespace gsw
