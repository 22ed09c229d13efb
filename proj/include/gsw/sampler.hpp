#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gsw/design.hpp"
#include "gsw/linalg.hpp"
#include "gsw/rng.hpp"

namespace gsw {

// The regularizer xi^2 phi / (1 - phi) that shifts every d x d system the
// walk maintains. Callers handle phi = 1 by bypassing the d x d path.
double regularizer(double phi, double xi);

// State of one walk. The factor always covers M_t = X_t^T X_t + lambda I_d
// where X_t holds the rows of the alive units excluding the pivot; cov_sum
// is X_t^T 1 over the same rows and is maintained for the balanced variant.
struct WalkState {
    std::vector<double> z;            // fractional assignments in [-1, 1]
    std::vector<std::uint32_t> alive; // ordered indices with |z_i| < 1
    std::vector<char> is_alive;
    int pivot = -1;                   // -1 while unset
    linalg::CholeskyFactor factor;
    std::vector<double> cov_sum;
    std::size_t iteration = 0;
    int downdate_failures = 0;        // consecutive; two in a row is fatal
};

// Candidate step magnitudes along u from z: the largest positive and negative
// scalings that keep z + delta * u inside [-1, 1]^n, together with the
// coordinate that lands exactly on the boundary for each side.
struct StepSizes {
    double delta_plus;
    double delta_minus;
    std::size_t hit_plus;
    std::size_t hit_minus;
};

StepSizes step_sizes(std::span<const double> z, std::span<const double> u);

// Step direction via the maintained d x d factorization. u_pivot = 1, frozen
// coordinates are 0, and the alive non-pivot coordinates equal
//   -((1 - phi) / (xi^2 phi)) * X_t [ x_p - M_t^{-1} (X_t^T X_t) x_p ],
// computed in three matrix-vector stages from the factor. O(nd + d^2).
std::vector<double> step_direction_fast(const WalkState& state, const CovariateMatrix& x, double phi);

// Reference path: forms the k x k normal equations of the augmented columns
// explicitly and solves them densely. O(k^3); test use only.
std::vector<double> step_direction_naive(const WalkState& state, const CovariateMatrix& x, double phi);

// Balanced step direction: the constrained minimizer with <1, u> = 0 over the
// full vector (so the non-pivot part sums to -1). When the pivot is the only
// alive unit the direction is its basis vector.
std::vector<double> step_direction_balanced(const WalkState& state, const CovariateMatrix& x, double phi);

// Reference path for the balanced direction: dense KKT system over the
// explicit augmented columns. Test use only.
std::vector<double> step_direction_balanced_naive(const WalkState& state, const CovariateMatrix& x,
                                                  double phi);

// Observer invoked once per iteration right after the step direction is
// computed, before the random sign draw. Used by tests to cross-check the
// fast path against reference solvers mid-walk.
using StepObserver = std::function<void(const WalkState&, std::span<const double>)>;

// Gram-Schmidt Walk design sampler. Construction precomputes X^T X and the
// initial factor of M_1 = X^T X + lambda I over all units; each sample
// reuses them, so drawing R assignments costs O(R n^2 d) after an O(nd^2)
// setup.
class GswSampler : public Design {
public:
    GswSampler(CovariateMatrix x, DesignConfig cfg);

    std::size_t units() const override { return x_.units(); }

    // Replicate draws consume the stream in a fixed order: one index draw per
    // pivot (re)selection and one double draw per step-size sign.
    Assignment sample(std::uint64_t seed, std::uint64_t replicate) const override;

    Assignment sample(RandomStream& stream, bool record_trace = false,
                      const StepObserver* observer = nullptr) const;

    const CovariateMatrix& covariates() const { return x_; }
    const DesignConfig& config() const { return cfg_; }

private:
    void run_walk(WalkState& state, RandomStream& stream, Assignment& out,
                  const StepObserver* observer) const;

    CovariateMatrix x_;
    DesignConfig cfg_;
    bool identity_walk_;                  // phi = 1 or all-zero covariates
    linalg::CholeskyFactor initial_factor_;
    std::vector<double> initial_cov_sum_;
};

// One-shot convenience wrapper over GswSampler.
Assignment sample_assignment(const CovariateMatrix& x, const DesignConfig& cfg, RandomStream& stream,
                             bool record_trace = false);

}  // namespace gsw
