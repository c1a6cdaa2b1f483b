#pragma once

#include <optional>

#include "fhhop/heuristic_types.hpp"
#include "fhhop/search_tree.hpp"

namespace fhhop {

struct Selection {
  NodeId leaf = kNoNode;
  SelectionTag tag = SelectionTag::U;
  /// Weighted gap of the upper-bound candidate, 0 when there is none.
  double h_u = 0.0;
  /// Weighted gap of the lower-bound candidate, absent when undefined.
  std::optional<double> h_l;
};

/// best_u of one node from its children's caches.
void refresh_upper_cache(SearchTree& tree, NodeId node);
/// best0 and best1 of one node from its children's caches.
void refresh_lower_cache(SearchTree& tree, NodeId node);
/// The caches the tree's strategy reads.
void refresh_caches(SearchTree& tree, NodeId node);
/// Bottom-up refresh of every node.
void recompute_all_caches(SearchTree& tree);

std::optional<Selection> try_choose_fhhop(const SearchTree& tree, const HybridStats& stats);
std::optional<Selection> try_choose_aems2(const SearchTree& tree);

/// Throw ExhaustedTree when no expandable leaf is reachable.
Selection choose_best_node_fhhop(const SearchTree& tree, const HybridStats& stats);
Selection choose_best_node_aems2(const SearchTree& tree);

/// lower_delta >= 0 and upper_delta <= 0 are the root bound changes of one
/// expansion.
void record_expansion(HybridStats& stats, SelectionTag tag, double lower_delta, double upper_delta);

}  // namespace fhhop
