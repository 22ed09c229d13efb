#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsw/linalg.hpp"

namespace gsw {

// Unit covariates: n rows of d real covariates plus the cached scale
// xi = max_i ||x_i||_2. An all-zero matrix is accepted with xi defined as 1;
// the covariate block of the augmented vectors is then identically zero and
// the walk degenerates to independent assignment.
class CovariateMatrix {
public:
    CovariateMatrix() = default;
    explicit CovariateMatrix(linalg::Matrix x);

    std::size_t units() const { return x_.rows(); }
    std::size_t covariates() const { return x_.cols(); }
    double xi() const { return xi_; }
    bool all_zero() const { return all_zero_; }

    const linalg::Matrix& matrix() const { return x_; }
    std::span<const double> row(std::size_t i) const { return x_.row(i); }

    // Squared Euclidean norm of X^T z, the covariate imbalance of an assignment.
    double imbalance_norm(std::span<const std::int8_t> z) const;

private:
    linalg::Matrix x_;
    double xi_ = 1.0;
    bool all_zero_ = true;
};

struct DesignConfig {
    double phi = 0.5;
    std::vector<double> probabilities;  // empty means uniform 1/2
    bool balanced = false;
    std::uint64_t seed = 0;

    // Throws InvalidConfig unless phi is in (0, 1] and every probability is
    // strictly inside (0, 1). phi = 0 is rejected outright: phi > 0 keeps the
    // maintained d x d matrix positive definite unconditionally, and
    // phi = 1e-3 approximates the phi -> 0 regime.
    void validate(std::size_t n) const;

    // Target probability for unit i (1/2 when the vector is empty).
    double pi(std::size_t i) const {
        return probabilities.empty() ? 0.5 : probabilities[i];
    }
};

struct StepRecord {
    std::uint32_t pivot;
    double delta;
    std::vector<std::uint32_t> frozen;  // units that reached +-1 in this iteration
};

// Integral assignment: every entry exactly +1 or -1.
struct Assignment {
    std::vector<std::int8_t> z;
    std::optional<std::vector<StepRecord>> trace;

    std::size_t size() const { return z.size(); }
    long treated() const {
        long c = 0;
        for (auto v : z) c += (v > 0);
        return c;
    }
};

// Anything that can draw assignment vectors replicate-by-replicate.
// Replicate r of a run with seed s must be a pure function of (s, r) so that
// Monte Carlo runs are reproducible and parallelizable.
class Design {
public:
    virtual ~Design() = default;
    virtual std::size_t units() const = 0;
    virtual Assignment sample(std::uint64_t seed, std::uint64_t replicate) const = 0;
};

}  // namespace gsw
