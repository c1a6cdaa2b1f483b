#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fhhop/flat_model.hpp"

namespace fhhop {

struct OracleLimits {
  std::uint32_t max_states = 8;
  std::uint32_t max_actions = 4;
  std::uint32_t max_observations = 8;
};

/// Near-exact V* for test-scale models by finite-horizon alpha-vector value
/// iteration with incremental pruning. The horizon is chosen so the result is
/// within `horizon_epsilon` of V* everywhere. Throws ModelTooLarge above the
/// size caps.
AlphaVectorSet exact_value_iteration_oracle(const FlatModel& model, double horizon_epsilon,
                                            const OracleLimits& limits = {});

/// Q(b, a) = R(b, a) + gamma * sum_z P(z|b,a) V(b^{a,z}) with V given by `value`.
double oracle_q_value(const FlatModel& model, const AlphaVectorSet& value, const Belief& b, std::uint32_t a);

/// Removes vectors that are not strictly maximal at some belief. Exposed for
/// testing.
std::vector<AlphaVector> prune_vectors(std::vector<AlphaVector> candidates, double tolerance = 1e-10);

}  // namespace fhhop
