#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fhhop/bounds.hpp"
#include "fhhop/factored_model.hpp"
#include "fhhop/heuristic_types.hpp"
#include "fhhop/profiler.hpp"

namespace fhhop {

enum class Strategy : std::uint8_t { Fhhop, Aems2 };

std::string to_string(Strategy strategy);
/// Accepts "fhhop" and "aems2"; throws InvalidSpec otherwise.
Strategy parse_strategy(const std::string& name);

struct ObservationChild {
  ObservationEvent event;
  double prob = 0.0;
  NodeId node = kNoNode;
};

/// AND-node. Stored inline in its parent; slot index equals the action.
struct ActionNode {
  std::uint32_t action = 0;
  double reward = 0.0;
  double q_lower = 0.0;
  double q_upper = 0.0;
  std::vector<ObservationChild> children;
};

/// OR-node.
struct BeliefNode {
  FactoredBelief belief;
  double lower = 0.0;
  double upper = 0.0;
  std::uint32_t depth = 0;
  double path_weight = 1.0;
  NodeId parent = kNoNode;
  /// Slot of the parent's action node this node hangs under.
  std::uint32_t parent_slot = 0;
  bool terminal = false;
  /// Set once a backup would have loosened a bound.
  bool clipped = false;
  std::vector<ActionNode> actions;
  HeuristicCache cache;

  bool is_leaf() const noexcept { return actions.empty(); }
  bool expandable() const noexcept { return actions.empty() && !terminal; }
  double gap() const noexcept { return upper - lower; }
};

struct SearchConfig {
  double tau = 0.1;
  double epsilon = 0.0;
  std::size_t max_episode_steps = 100;
  Strategy strategy = Strategy::Fhhop;
  /// When nonzero, each planning step performs exactly this many
  /// expansions (fewer if the gap closes) and tau is ignored.
  std::size_t deterministic_expansions = 0;
  /// Record root bounds after every expansion.
  bool record_trace = false;
};

struct RootBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct SearchResult {
  std::uint32_t action = 0;
  std::size_t expansions = 0;
  double seconds = 0.0;
  HybridStats hybrid;
  /// No expandable leaf was left while the gap was still above epsilon.
  bool exhausted = false;
  std::vector<RootBounds> trace;
};

class SearchTree {
 public:
  SearchTree(const FactoredModel& model, const BoundFunctions& bounds, FactoredBelief root,
             Strategy strategy = Strategy::Fhhop, Profiler* profiler = nullptr);

  /// A tree with no model behind it, built by hand through add_action and
  /// add_child. Used to test the selection rules on arbitrary shapes.
  SearchTree(double discount, double root_lower, double root_upper, Strategy strategy = Strategy::Fhhop);

  NodeId root() const noexcept { return 0; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const BeliefNode& node(NodeId id) const { return nodes_[id]; }
  BeliefNode& node(NodeId id) { return nodes_[id]; }
  double discount() const noexcept { return discount_; }
  Strategy strategy() const noexcept { return strategy_; }
  bool has_model() const noexcept { return model_ != nullptr; }
  std::uint64_t clip_events() const noexcept { return clip_events_; }

  /// Creates every action and positive-probability observation child of a
  /// leaf and backs the result into the leaf's own bounds. Terminal nodes
  /// are left untouched.
  void expand(NodeId leaf);

  /// Refreshes the node's cache, then walks to the root recomputing the
  /// parent action values, bounds and caches. Stops once an ancestor is
  /// unchanged.
  void update_ancestors(NodeId node);

  /// Recomputes q values of one slot from its children and then the node's
  /// clipped bounds.
  void backup(NodeId node, std::uint32_t slot);

  /// Keeps only the subtree under (action, event) and makes it the root.
  /// Throws ImpossibleObservation when that child does not exist.
  void advance_root(std::uint32_t action, ObservationEvent event);

  /// Root action with the highest q_lower, lowest index on ties.
  std::uint32_t best_lower_action() const;

  // Hand-built trees.
  std::uint32_t add_action(NodeId node, std::uint32_t action, double reward);
  NodeId add_child(NodeId parent, std::uint32_t slot, ObservationEvent event, double prob, double lower, double upper,
                   bool terminal = false);

 private:
  NodeId new_node(FactoredBelief belief, NodeId parent, std::uint32_t slot, double prob);
  void apply_bounds(BeliefNode& n);
  void recompute_q(NodeId id, std::uint32_t slot);
  /// Clipped node bounds from the current q values.
  void settle(NodeId id);

  const FactoredModel* model_ = nullptr;
  const BoundFunctions* bounds_ = nullptr;
  Profiler* profiler_ = nullptr;
  double discount_ = 0.95;
  Strategy strategy_ = Strategy::Fhhop;
  std::vector<BeliefNode> nodes_;
  std::uint64_t clip_events_ = 0;
};

/// Runs expansions from the root until the budget is spent or the root gap
/// is at most epsilon. A leaf root is always expanded once first.
SearchResult search(SearchTree& tree, const SearchConfig& config);

/// Node counts, depth histogram and root bounds as aligned text.
std::string describe_tree(const SearchTree& tree, const std::vector<RootBounds>& trace = {});

}  // namespace fhhop
