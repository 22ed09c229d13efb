#pragma once

#include <cstdint>
#include <vector>

#include "gsw/design.hpp"
#include "gsw/linalg.hpp"

namespace gsw {

// Streamed cross moments of a design. Replicate r always uses the random
// stream (seed, r) and per-replicate sums are integers, so the result is
// bit-identical for a fixed (seed, R) no matter how many workers run the
// replicates.
struct MonteCarloMoments {
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<double> mean_hat;      // Ehat[z]
    linalg::SymmetricMatrix cross_hat; // Ehat[z z^T]; diagonal is exactly 1
    linalg::SymmetricMatrix cov_hat;   // cross_hat - mean_hat mean_hat^T

    // Partial sums over fixed replicate ranges, kept for standard-error
    // estimation of derived statistics. batch_cross holds the strict upper
    // triangle row-by-row; batch_mean holds per-unit sums.
    std::size_t batches = 0;
    std::vector<std::uint64_t> batch_size;
    std::vector<std::vector<std::int64_t>> batch_mean;
    std::vector<std::vector<std::int64_t>> batch_cross;
};

struct McOptions {
    unsigned threads = 0;     // 0 = hardware concurrency
    std::size_t batches = 32; // SE batches; clamped to the replicate count
};

MonteCarloMoments mc_moments(const Design& design, std::uint64_t replicates, std::uint64_t seed,
                             const McOptions& options = {});

// Monte Carlo value of a quadratic form v^T Cov(z) v together with the
// standard error of the estimate across batches.
struct BandEstimate {
    double value = 0.0;
    double se = 0.0;
};

BandEstimate quad_form_band(const MonteCarloMoments& moments, std::span<const double> v);

// All P(z_i = v_i, z_j = v_j) implied by first and second moments:
// (1/4) (1 + v_i m_i + v_j m_j + v_i v_j c_ij).
class PairProbabilities {
public:
    PairProbabilities(std::vector<double> mean, linalg::SymmetricMatrix cross);

    double probability(std::size_t i, std::size_t j, int vi, int vj) const;

    // Smallest off-diagonal pair probability over all sign patterns.
    double min_pair_probability() const;

    std::size_t units() const { return mean_.size(); }

private:
    std::vector<double> mean_;
    linalg::SymmetricMatrix cross_;
};

PairProbabilities second_order_probabilities(const MonteCarloMoments& moments);

// The spectral summary of a design: robustness (lambda_z), worst-case linear
// covariate imbalance (lambda_xz), mean square imbalance E||X^T z||^2, and
// mean square group-size difference E<1, z>^2. Standard errors are filled in
// when the moments carry batch partials.
struct SpectralReport {
    double lambda_z = 0.0;
    double lambda_xz = 0.0;
    double mean_sq_imbalance = 0.0;
    double group_size_msq = 0.0;
    double lambda_z_se = 0.0;
    double lambda_xz_se = 0.0;
};

SpectralReport spectral_report(const MonteCarloMoments& moments, const CovariateMatrix& x);

// ||X^T z||^2 for one assignment.
double imbalance_norm(std::span<const std::int8_t> z, const CovariateMatrix& x);

}  // namespace gsw
