#pragma once

// Shared mechanics of one walk iteration, used by both the sampler (random
// pivot and sign draws) and the oracle (exhaustive branching over the same
// two decisions).

#include <cstdint>
#include <span>
#include <vector>

#include "gsw/sampler.hpp"

namespace gsw::walk {

// Whether the d x d factor path is active (false for phi = 1 and for
// all-zero covariates, where the walk reduces to independent signs).
bool uses_factor(const CovariateMatrix& x, const DesignConfig& cfg);

// Cholesky factor of X^T X + lambda I over all units.
linalg::CholeskyFactor initial_factor(const CovariateMatrix& x, const DesignConfig& cfg);

// Fresh state before the first pivot: z = 2 pi - 1, all units alive.
WalkState init_state(const CovariateMatrix& x, const DesignConfig& cfg);

// Makes `unit` the pivot and removes its row from the maintained factor.
void select_pivot(WalkState& state, const CovariateMatrix& x, const DesignConfig& cfg,
                  std::uint32_t unit);

// z += delta * u, lands coordinate `hit` exactly on its boundary, snaps and
// freezes every coordinate within tolerance of +-1, and keeps the factor and
// covariate sum in sync. Returns the units frozen in this iteration.
std::vector<std::uint32_t> apply_step(WalkState& state, const CovariateMatrix& x,
                                      const DesignConfig& cfg, std::span<const double> u,
                                      double delta, std::size_t hit);

// Dispatches to the plain or balanced step direction per the config.
std::vector<double> step_direction(const WalkState& state, const CovariateMatrix& x,
                                   const DesignConfig& cfg);

}  // namespace gsw::walk
