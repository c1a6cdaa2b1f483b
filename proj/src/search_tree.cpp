#include "fhhop/search_tree.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "fhhop/errors.hpp"
#include "fhhop/heuristics.hpp"

namespace fhhop {
namespace {

// Backups that loosen a bound by less than this are rounding noise and are
// clipped without being counted.
constexpr double kClipTolerance = 1e-9;

}  // namespace

std::string to_string(Strategy s) { return s == Strategy::Fhhop ? "fhhop" : "aems2"; }

Strategy parse_strategy(const std::string& name) {
  if (name == "fhhop") return Strategy::Fhhop;
  if (name == "aems2") return Strategy::Aems2;
  throw InvalidSpec("unknown strategy '" + name + "' (expected fhhop or aems2)");
}

SearchTree::SearchTree(const FactoredModel& model, const BoundFunctions& bounds, FactoredBelief root,
                       Strategy strategy, Profiler* profiler)
    : model_(&model), bounds_(&bounds), profiler_(profiler), discount_(model.discount), strategy_(strategy) {
  BeliefNode n;
  n.belief = std::move(root);
  n.terminal = is_terminal_belief(model, n.belief);
  apply_bounds(n);
  nodes_.push_back(std::move(n));
  refresh_caches(*this, 0);
}

SearchTree::SearchTree(double discount, double root_lower, double root_upper, Strategy strategy)
    : discount_(discount), strategy_(strategy) {
  BeliefNode n;
  n.lower = root_lower;
  n.upper = root_upper;
  nodes_.push_back(std::move(n));
  refresh_caches(*this, 0);
}

void SearchTree::apply_bounds(BeliefNode& n) {
  if (n.terminal) {
    n.lower = n.upper = 0.0;
    return;
  }
  ProfileScope scope(profiler_, PrimitiveFamily::ValueEvaluation);
  n.lower = factored_value(bounds_->lower, n.belief).value;
  n.upper = std::max(n.lower, factored_value(bounds_->upper, n.belief).value);
}

NodeId SearchTree::new_node(FactoredBelief belief, NodeId parent, std::uint32_t slot, double prob) {
  BeliefNode n;
  n.belief = std::move(belief);
  n.parent = parent;
  n.parent_slot = slot;
  n.depth = nodes_[parent].depth + 1;
  n.path_weight = nodes_[parent].path_weight * discount_ * prob;
  n.terminal = is_terminal_belief(*model_, n.belief);
  apply_bounds(n);
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(n));
  refresh_caches(*this, id);
  return id;
}

void SearchTree::expand(NodeId leaf) {
  if (model_ == nullptr) throw std::logic_error("expand needs a model");
  if (!nodes_[leaf].expandable()) return;
  std::vector<ActionNode> actions(model_->num_actions);
  for (std::uint32_t a = 0; a < model_->num_actions; ++a) {
    auto succ = successors(*model_, nodes_[leaf].belief, a, profiler_);
    ActionNode& act = actions[a];
    act.action = a;
    act.reward = factored_belief_reward(*model_, nodes_[leaf].belief, a);
    act.children.reserve(succ.size());
    for (auto& s : succ) act.children.push_back({s.event, s.prob, new_node(std::move(s.belief), leaf, a, s.prob)});
  }
  nodes_[leaf].actions = std::move(actions);
  for (std::uint32_t a = 0; a < model_->num_actions; ++a) recompute_q(leaf, a);
  settle(leaf);
}

void SearchTree::recompute_q(NodeId id, std::uint32_t slot) {
  ActionNode& act = nodes_[id].actions[slot];
  double lo = 0.0, hi = 0.0;
  for (const auto& c : act.children) {
    lo += c.prob * nodes_[c.node].lower;
    hi += c.prob * nodes_[c.node].upper;
  }
  act.q_lower = act.reward + discount_ * lo;
  act.q_upper = act.reward + discount_ * hi;
}

void SearchTree::settle(NodeId id) {
  BeliefNode& n = nodes_[id];
  double best_lo = n.actions[0].q_lower, best_hi = n.actions[0].q_upper;
  for (const auto& a : n.actions) {
    best_lo = std::max(best_lo, a.q_lower);
    best_hi = std::max(best_hi, a.q_upper);
  }
  if (best_lo < n.lower - kClipTolerance || best_hi > n.upper + kClipTolerance) {
    ++clip_events_;
    n.clipped = true;
  }
  n.lower = std::max(n.lower, best_lo);
  n.upper = std::min(n.upper, best_hi);
}

void SearchTree::backup(NodeId id, std::uint32_t slot) {
  recompute_q(id, slot);
  settle(id);
}

void SearchTree::update_ancestors(NodeId id) {
  refresh_caches(*this, id);
  NodeId cur = id;
  while (nodes_[cur].parent != kNoNode) {
    const NodeId p = nodes_[cur].parent;
    const double lower = nodes_[p].lower, upper = nodes_[p].upper;
    const HeuristicCache cache = nodes_[p].cache;
    backup(p, nodes_[cur].parent_slot);
    refresh_caches(*this, p);
    if (nodes_[p].lower == lower && nodes_[p].upper == upper && nodes_[p].cache == cache) break;
    cur = p;
  }
}

void SearchTree::advance_root(std::uint32_t action, ObservationEvent event) {
  if (nodes_[0].expandable() && model_ != nullptr) {
    expand(0);
    update_ancestors(0);
  }
  const auto& actions = nodes_[0].actions;
  NodeId child = kNoNode;
  if (action < actions.size()) {
    for (const auto& c : actions[action].children) {
      if (c.event == event) child = c.node;
    }
  }
  if (child == kNoNode) {
    throw ImpossibleObservation("observation (x'=" + std::to_string(event.x) + ", z=" + std::to_string(event.z) +
                                ") has no child under action " + std::to_string(action));
  }

  // Compact in place. Kept nodes retain their relative order, so the new root
  // gets id 0 and children still follow their parents.
  std::vector<NodeId> remap(nodes_.size(), kNoNode);
  std::vector<NodeId> stack{child};
  remap[child] = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    for (const auto& act : nodes_[id].actions) {
      for (const auto& c : act.children) {
        remap[c.node] = 0;
        stack.push_back(c.node);
      }
    }
  }
  NodeId next = 0;
  for (NodeId old = child; old < nodes_.size(); ++old) {
    if (remap[old] != kNoNode) remap[old] = next++;
  }
  auto fix = [&](CacheEntry& e) {
    if (e.valid()) e.leaf = remap[e.leaf];
  };
  for (NodeId old = child; old < nodes_.size(); ++old) {
    if (remap[old] == kNoNode) continue;
    BeliefNode& n = nodes_[old];
    n.parent = old == child ? kNoNode : remap[n.parent];
    for (auto& act : n.actions) {
      for (auto& c : act.children) c.node = remap[c.node];
    }
    fix(n.cache.best_u);
    fix(n.cache.best0);
    fix(n.cache.best1);
    if (remap[old] != old) nodes_[remap[old]] = std::move(n);
  }
  nodes_.resize(next);
  nodes_[0].parent_slot = 0;
  nodes_[0].depth = 0;
  nodes_[0].path_weight = 1.0;
  for (const auto& n : nodes_) {
    for (const auto& act : n.actions) {
      for (const auto& c : act.children) {
        nodes_[c.node].depth = n.depth + 1;
        nodes_[c.node].path_weight = n.path_weight * discount_ * c.prob;
      }
    }
  }
}

std::uint32_t SearchTree::best_lower_action() const {
  const auto& actions = nodes_[0].actions;
  std::uint32_t best = 0;
  for (std::uint32_t a = 1; a < actions.size(); ++a) {
    if (actions[a].q_lower > actions[best].q_lower) best = a;
  }
  return actions.empty() ? 0 : actions[best].action;
}

std::uint32_t SearchTree::add_action(NodeId node, std::uint32_t action, double reward) {
  auto& actions = nodes_[node].actions;
  actions.push_back(ActionNode{action, reward, reward, reward, {}});
  return static_cast<std::uint32_t>(actions.size() - 1);
}

NodeId SearchTree::add_child(NodeId parent, std::uint32_t slot, ObservationEvent event, double prob, double lower,
                             double upper, bool terminal) {
  BeliefNode n;
  n.parent = parent;
  n.parent_slot = slot;
  n.depth = nodes_[parent].depth + 1;
  n.path_weight = nodes_[parent].path_weight * discount_ * prob;
  n.terminal = terminal;
  n.lower = lower;
  n.upper = upper;
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(n));
  nodes_[parent].actions[slot].children.push_back({event, prob, id});
  refresh_caches(*this, id);
  return id;
}

SearchResult search(SearchTree& tree, const SearchConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  SearchResult r;
  const NodeId root = tree.root();
  auto note = [&] {
    if (config.record_trace) r.trace.push_back({tree.node(root).lower, tree.node(root).upper});
  };
  if (tree.node(root).expandable()) {
    tree.expand(root);
    tree.update_ancestors(root);
    ++r.expansions;
    note();
  }
  while (tree.node(root).gap() > config.epsilon) {
    if (config.deterministic_expansions > 0) {
      if (r.expansions >= config.deterministic_expansions) break;
    } else if (std::chrono::duration<double>(Clock::now() - start).count() >= config.tau) {
      break;
    }
    const auto sel = config.strategy == Strategy::Fhhop ? try_choose_fhhop(tree, r.hybrid) : try_choose_aems2(tree);
    if (!sel) {
      r.exhausted = true;
      break;
    }
    const double lower = tree.node(root).lower, upper = tree.node(root).upper;
    tree.expand(sel->leaf);
    tree.update_ancestors(sel->leaf);
    record_expansion(r.hybrid, sel->tag, tree.node(root).lower - lower, tree.node(root).upper - upper);
    ++r.expansions;
    note();
  }
  r.action = tree.best_lower_action();
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

std::string describe_tree(const SearchTree& tree, const std::vector<RootBounds>& trace) {
  std::size_t leaves = 0, terminal = 0, action_nodes = 0;
  std::map<std::uint32_t, std::size_t> by_depth;
  for (NodeId id = 0; id < tree.size(); ++id) {
    const BeliefNode& n = tree.node(id);
    leaves += n.is_leaf();
    terminal += n.terminal;
    action_nodes += n.actions.size();
    ++by_depth[n.depth];
  }
  std::string out;
  char line[160];
  const BeliefNode& root = tree.node(tree.root());
  std::snprintf(line, sizeof line, "belief nodes   %zu\naction nodes   %zu\nleaves         %zu\nterminal       %zu\n",
                tree.size(), action_nodes, leaves, terminal);
  out += line;
  std::snprintf(line, sizeof line, "clip events    %llu\nroot bounds    [%.6f, %.6f] gap %.6g\n",
                static_cast<unsigned long long>(tree.clip_events()), root.lower, root.upper, root.gap());
  out += line;
  out += "depth histogram\n";
  for (const auto& [depth, count] : by_depth) {
    std::snprintf(line, sizeof line, "  %4u  %zu\n", depth, count);
    out += line;
  }
  if (!trace.empty()) {
    out += "root bounds trace\n";
    const std::size_t stride = std::max<std::size_t>(1, trace.size() / 20);
    for (std::size_t i = 0; i < trace.size(); i += stride) {
      std::snprintf(line, sizeof line, "  %6zu  %.6f  %.6f\n", i + 1, trace[i].lower, trace[i].upper);
      out += line;
    }
  }
  return out;
}

}  // namespace fhhop
