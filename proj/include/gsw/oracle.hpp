#pragma once

#include <functional>
#include <vector>

#include "gsw/design.hpp"
#include "gsw/linalg.hpp"

namespace gsw {

// Exact law of the design on a small instance: every reachable assignment
// with its probability. Probabilities sum to one and support entries are
// distinct by construction.
struct DesignDistribution {
    struct Atom {
        std::vector<std::int8_t> assignment;
        double probability;
    };
    std::vector<Atom> support;
    std::size_t n = 0;
};

struct ExactMoments {
    std::vector<double> mean;          // E[z]
    linalg::SymmetricMatrix cross;     // E[z z^T]
    linalg::SymmetricMatrix cov;       // cross - mean mean^T
};

// Walks the complete decision tree of the walk: every pivot (re)selection
// branches uniformly over the alive units and every step-size choice
// branches two ways with the walk's own weights. Leaf probabilities are the
// product of branch weights; identical leaves are merged. Guarded to n <= 8
// (throws TooLarge); leaf counts grow roughly like n! 2^n.
DesignDistribution enumerate_distribution(const CovariateMatrix& x, const DesignConfig& cfg);

ExactMoments exact_moments(const DesignDistribution& dist);

// Sum of p(z) f(z) over the support.
double exact_expectation(const DesignDistribution& dist,
                         const std::function<double(std::span<const std::int8_t>)>& f);

}  // namespace gsw
