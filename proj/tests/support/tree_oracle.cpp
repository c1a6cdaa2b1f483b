#include "tree_oracle.hpp"

#include <cmath>

#include "fhhop/heuristics.hpp"

namespace fhhop::testing {
namespace {

void grow(SearchTree& t, NodeId id, std::mt19937_64& rng, const TreeShape& shape) {
  if (t.node(id).terminal || t.node(id).depth >= shape.max_depth || t.size() + 12 > shape.max_nodes) return;
  if (id != 0 && rng() % 10 < 3) return;
  const std::uint32_t actions = 1 + rng() % 4;
  for (std::uint32_t a = 0; a < actions; ++a) {
    const std::uint32_t slot = t.add_action(id, a, draw_value(rng, -2.0, 2.0, shape.quantized));
    const auto probs = draw_probs(rng, 1 + rng() % 3, shape.quantized);
    for (std::size_t k = 0; k < probs.size(); ++k) {
      const bool terminal = rng() % 10 == 0;
      const double lo = terminal ? 0.0 : draw_value(rng, -5.0, 5.0, shape.quantized);
      const double hi = terminal ? 0.0 : lo + (rng() % 6 == 0 ? 0.0 : draw_value(rng, 0.0, 4.0, shape.quantized));
      const NodeId child =
          t.add_child(id, slot, ObservationEvent{0, static_cast<std::uint32_t>(k)}, probs[k], lo, hi, terminal);
      grow(t, child, rng, shape);
    }
    t.backup(id, slot);
  }
}

void enumerate(const SearchTree& t, NodeId id, double weight, int deviations, bool on_upper, BruteForce& out) {
  const BeliefNode& n = t.node(id);
  if (n.is_leaf()) {
    if (n.terminal) return;
    const double v = weight * n.gap();
    if (on_upper && v > out.upper.value) out.upper = {v, id};
    if (deviations == 1 && v > out.lower.value) out.lower = {v, id};
    return;
  }
  const ActionRoles r = action_roles(n);
  for (std::size_t a = 0; a < n.actions.size(); ++a) {
    const bool follows_u = on_upper && a == r.a_u;
    int dev = deviations;
    if (a != r.a1) dev = r.a2 && a == *r.a2 ? dev + 1 : 2;
    if (!follows_u && dev > 1) continue;
    for (const auto& c : n.actions[a].children) {
      enumerate(t, c.node, weight * t.discount() * c.prob, dev, follows_u, out);
    }
  }
}

}  // namespace

double draw_value(std::mt19937_64& rng, double lo, double hi, bool quantized) {
  const double v = std::uniform_real_distribution<double>(lo, hi)(rng);
  return quantized ? std::round(v) : v;
}

std::vector<double> draw_probs(std::mt19937_64& rng, std::size_t n, bool quantized) {
  if (quantized) {
    static const std::vector<std::vector<double>> fixed{{1.0}, {0.5, 0.5}, {0.25, 0.75}, {0.25, 0.25, 0.5}};
    return fixed[n - 1 + (n == 2 && rng() % 2)];
  }
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) total += v = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
  for (auto& v : p) v /= total;
  return p;
}

SearchTree random_tree(std::mt19937_64& rng, const TreeShape& shape) {
  SearchTree t(0.95, -100.0, 100.0);
  grow(t, 0, rng, shape);
  recompute_all_caches(t);
  return t;
}

ActionRoles action_roles(const BeliefNode& n) {
  ActionRoles r;
  double top_u = -1e300, top_l = -1e300;
  for (std::size_t a = 0; a < n.actions.size(); ++a) {
    if (n.actions[a].q_upper > top_u) top_u = n.actions[a].q_upper, r.a_u = a;
    if (n.actions[a].q_lower > top_l) top_l = n.actions[a].q_lower, r.a1 = a;
  }
  double second = -1e300;
  for (std::size_t a = 0; a < n.actions.size(); ++a) {
    const ActionNode& act = n.actions[a];
    if (act.q_lower != top_l && act.q_upper > top_l && act.q_lower > second) second = act.q_lower, r.a2 = a;
  }
  return r;
}

BruteForce brute_force_selection(const SearchTree& tree) {
  BruteForce out;
  enumerate(tree, tree.root(), 1.0, 0, true, out);
  return out;
}

double path_weight(const SearchTree& t, NodeId leaf) {
  double w = 1.0;
  for (NodeId cur = leaf; t.node(cur).parent != kNoNode; cur = t.node(cur).parent) {
    const BeliefNode& p = t.node(t.node(cur).parent);
    for (const auto& c : p.actions[t.node(cur).parent_slot].children) {
      if (c.node == cur) w *= t.discount() * c.prob;
    }
  }
  return w;
}

int count_deviations(const SearchTree& t, NodeId leaf) {
  int dev = 0;
  for (NodeId cur = leaf; t.node(cur).parent != kNoNode; cur = t.node(cur).parent) {
    const BeliefNode& p = t.node(t.node(cur).parent);
    const ActionRoles r = action_roles(p);
    const std::size_t slot = t.node(cur).parent_slot;
    if (slot == r.a1) continue;
    if (!r.a2 || slot != *r.a2 || !(p.actions[slot].q_upper > p.actions[r.a1].q_lower)) return -1;
    ++dev;
  }
  return dev;
}

}  // namespace fhhop::testing
