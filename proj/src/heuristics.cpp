#include "fhhop/heuristics.hpp"

#include "fhhop/errors.hpp"

namespace fhhop {
namespace {

// Best weighted entry over the children of one action slot.
template <typename Pick>
CacheEntry best_over(const SearchTree& tree, const ActionNode& act, Pick pick, CacheEntry best = {}) {
  const double gamma = tree.discount();
  for (const auto& c : act.children) {
    const CacheEntry& e = pick(tree.node(c.node).cache);
    if (!e.valid()) continue;
    const double v = gamma * c.prob * e.value;
    if (!best.valid() || v > best.value) best = {v, e.leaf};
  }
  return best;
}

// A leaf's own gap, or nothing for terminal leaves which are never expanded.
CacheEntry leaf_entry(const BeliefNode& n, NodeId id) {
  if (n.terminal) return {};
  return {n.gap(), id};
}

}  // namespace

void refresh_upper_cache(SearchTree& tree, NodeId id) {
  const BeliefNode& n = tree.node(id);
  if (n.is_leaf()) {
    tree.node(id).cache.best_u = leaf_entry(n, id);
    return;
  }
  std::size_t a_u = 0;
  for (std::size_t a = 1; a < n.actions.size(); ++a) {
    if (n.actions[a].q_upper > n.actions[a_u].q_upper) a_u = a;
  }
  tree.node(id).cache.best_u = best_over(tree, n.actions[a_u], [](const HeuristicCache& c) -> const CacheEntry& {
    return c.best_u;
  });
}

void refresh_lower_cache(SearchTree& tree, NodeId id) {
  const BeliefNode& n = tree.node(id);
  if (n.is_leaf()) {
    tree.node(id).cache.best0 = leaf_entry(n, id);
    tree.node(id).cache.best1 = {};
    return;
  }
  std::size_t a1 = 0;
  for (std::size_t a = 1; a < n.actions.size(); ++a) {
    if (n.actions[a].q_lower > n.actions[a1].q_lower) a1 = a;
  }
  const double top = n.actions[a1].q_lower;
  // Second-best: the best lower value among actions outside the argmax set
  // whose upper bound still beats the best lower bound.
  std::size_t a2 = n.actions.size();
  for (std::size_t a = 0; a < n.actions.size(); ++a) {
    const ActionNode& act = n.actions[a];
    if (act.q_lower == top || !(act.q_upper > top)) continue;
    if (a2 == n.actions.size() || act.q_lower > n.actions[a2].q_lower) a2 = a;
  }
  auto b0 = [](const HeuristicCache& c) -> const CacheEntry& { return c.best0; };
  auto b1 = [](const HeuristicCache& c) -> const CacheEntry& { return c.best1; };
  const CacheEntry best0 = best_over(tree, n.actions[a1], b0);
  CacheEntry best1 = best_over(tree, n.actions[a1], b1);
  if (a2 != n.actions.size()) best1 = best_over(tree, n.actions[a2], b0, best1);
  HeuristicCache& cache = tree.node(id).cache;
  cache.best0 = best0;
  cache.best1 = best1;
}

void refresh_caches(SearchTree& tree, NodeId id) {
  refresh_upper_cache(tree, id);
  if (tree.strategy() == Strategy::Fhhop) refresh_lower_cache(tree, id);
}

void recompute_all_caches(SearchTree& tree) {
  // Children always carry larger ids than their parents.
  for (NodeId id = static_cast<NodeId>(tree.size()); id-- > 0;) refresh_caches(tree, id);
}

std::optional<Selection> try_choose_aems2(const SearchTree& tree) {
  const CacheEntry& u = tree.node(tree.root()).cache.best_u;
  if (!u.valid()) return std::nullopt;
  return Selection{u.leaf, SelectionTag::U, u.value, std::nullopt};
}

std::optional<Selection> try_choose_fhhop(const SearchTree& tree, const HybridStats& stats) {
  const HeuristicCache& c = tree.node(tree.root()).cache;
  const CacheEntry& u = c.best_u;
  const CacheEntry& l = c.best1;
  if (!u.valid() && !l.valid()) return std::nullopt;
  if (!l.valid()) return Selection{u.leaf, SelectionTag::U, u.value, std::nullopt};
  if (!u.valid()) return Selection{l.leaf, SelectionTag::L, 0.0, l.value};
  if (stats.c_u() * u.value > stats.c_l() * l.value) return Selection{u.leaf, SelectionTag::U, u.value, l.value};
  return Selection{l.leaf, SelectionTag::L, u.value, l.value};
}

Selection choose_best_node_fhhop(const SearchTree& tree, const HybridStats& stats) {
  if (auto s = try_choose_fhhop(tree, stats)) return *s;
  throw ExhaustedTree("no expandable leaf below the root");
}

Selection choose_best_node_aems2(const SearchTree& tree) {
  if (auto s = try_choose_aems2(tree)) return *s;
  throw ExhaustedTree("no expandable leaf below the root");
}

void record_expansion(HybridStats& stats, SelectionTag tag, double lower_delta, double upper_delta) {
  const double change = lower_delta - upper_delta;
  if (tag == SelectionTag::U) {
    stats.i_u += change;
    ++stats.n_u;
  } else {
    stats.i_l += change;
    ++stats.n_l;
  }
}

}  // namespace fhhop
