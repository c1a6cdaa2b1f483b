#pragma once

#include <cstdint>
#include <limits>

namespace fhhop {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// A propagated heuristic value and the leaf that attains it. An entry with
/// no leaf means no eligible leaf lies below.
struct CacheEntry {
  double value = 0.0;
  NodeId leaf = kNoNode;

  bool valid() const noexcept { return leaf != kNoNode; }
  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

struct HeuristicCache {
  /// Max over leaves below of the weighted gap along max-upper actions.
  CacheEntry best_u;
  /// Same along max-lower actions only.
  CacheEntry best0;
  /// Paths with exactly one second-best deviation.
  CacheEntry best1;
  friend bool operator==(const HeuristicCache&, const HeuristicCache&) = default;
};

enum class SelectionTag : std::uint8_t { U, L };

/// Per-step attribution counters. Reset at the start of each planning step.
struct HybridStats {
  double i_u = 0.0;
  double i_l = 0.0;
  std::uint64_t n_u = 0;
  std::uint64_t n_l = 0;

  double c_u() const noexcept { return (i_u + 1.0) / (static_cast<double>(n_u) + 1.0); }
  double c_l() const noexcept { return (i_l + 1.0) / (static_cast<double>(n_l) + 1.0); }
  void reset() noexcept { *this = HybridStats{}; }
};

}  // namespace fhhop
