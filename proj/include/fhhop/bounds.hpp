#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "fhhop/factored_model.hpp"
#include "fhhop/flat_model.hpp"

namespace fhhop {

struct BoundOptions {
  double tolerance = 1e-6;
  std::size_t max_sweeps = 10000;
  /// Residual above which hitting the sweep cap is an error.
  double failure_residual = 1e-4;
  std::size_t flatten_cap = kDefaultFlattenCap;
};

/// Sup-norm change of each Jacobi sweep, in order.
struct SolveTrace {
  std::vector<double> residuals;
};

struct BoundFunctions {
  FactoredAlphaSet lower;
  FactoredAlphaSet upper;
  SolveTrace lower_trace;
  SolveTrace upper_trace;
  double offline_seconds = 0.0;
};

/// One vector per action: the value of repeating that action forever.
/// Iterates upward from a constant below the fixed point, so every iterate
/// is itself a lower bound.
AlphaVectorSet blind_vectors(const FlatModel& model, const BoundOptions& options = {}, SolveTrace* trace = nullptr);

/// Fast informed bound Q-vectors, one per action. Iterates downward from a
/// constant above the fixed point, so every iterate is an upper bound.
AlphaVectorSet fib_vectors(const FlatModel& model, const BoundOptions& options = {}, SolveTrace* trace = nullptr);

/// Slices joint vectors over s = x*|Y| + y into per-x vectors over y.
FactoredAlphaSet project_to_factored(const AlphaVectorSet& joint, const FactoredModel& model);

FactoredAlphaSet blind_lower_bound(const FactoredModel& model, const BoundOptions& options = {});
FactoredAlphaSet fib_upper_bound(const FactoredModel& model, const BoundOptions& options = {});

/// Both bounds from a single flattening of the model.
BoundFunctions compute_bounds(const FactoredModel& model, const BoundOptions& options = {});

/// Bounds cache files hold one model's bounds keyed by its content hash.
std::optional<BoundFunctions> load_bounds_cache(const std::filesystem::path& path, std::uint64_t model_hash);
void save_bounds_cache(const std::filesystem::path& path, std::uint64_t model_hash, const BoundFunctions& bounds);

}  // namespace fhhop
