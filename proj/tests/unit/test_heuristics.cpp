#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "doctest.h"
#include "fhhop/errors.hpp"
#include "fhhop/heuristics.hpp"
#include "fhhop/search_tree.hpp"
#include "tree_oracle.hpp"

using namespace fhhop;
using namespace fhhop::testing;

TEST_CASE("cached selections agree with brute-force enumeration") {
  std::mt19937_64 rng(2024);
  int lower_defined = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const SearchTree t = random_tree(rng, TreeShape{trial % 2 == 1, 200, 5});
    const BruteForce brute = brute_force_selection(t);
    const LeafChoice& upper = brute.upper;
    const LeafChoice& lower = brute.lower;
    const HeuristicCache& c = t.node(0).cache;
    CAPTURE(trial);
    REQUIRE(c.best_u.valid() == (upper.leaf != kNoNode));
    if (c.best_u.valid()) {
      CHECK(c.best_u.value == doctest::Approx(upper.value).epsilon(1e-9));
      CHECK(path_weight(t, c.best_u.leaf) * t.node(c.best_u.leaf).gap() ==
            doctest::Approx(upper.value).epsilon(1e-9));
    }
    REQUIRE(c.best1.valid() == (lower.leaf != kNoNode));
    if (c.best1.valid()) {
      ++lower_defined;
      CHECK(c.best1.value == doctest::Approx(lower.value).epsilon(1e-9));
      CHECK(path_weight(t, c.best1.leaf) * t.node(c.best1.leaf).gap() ==
            doctest::Approx(lower.value).epsilon(1e-9));
      CHECK(count_deviations(t, c.best1.leaf) == 1);
    }
    if (c.best0.valid()) CHECK(count_deviations(t, c.best0.leaf) == 0);
  }
  CHECK(lower_defined > 100);
}

TEST_CASE("incremental refresh equals a full recompute") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    SearchTree t = random_tree(rng, TreeShape{trial % 2 == 0, 60, 3});
    for (int step = 0; step < 20; ++step) {
      std::vector<NodeId> leaves;
      for (NodeId id = 0; id < t.size(); ++id) {
        if (t.node(id).expandable()) leaves.push_back(id);
      }
      if (leaves.empty()) break;
      const NodeId leaf = leaves[rng() % leaves.size()];
      const std::uint32_t actions = 1 + rng() % 3;
      for (std::uint32_t a = 0; a < actions; ++a) {
        const std::uint32_t slot = t.add_action(leaf, a, draw_value(rng, -1.0, 1.0, false));
        const auto probs = draw_probs(rng, 1 + rng() % 3, false);
        // Children inside the parent's interval keep bounds monotone.
        const double lo = t.node(leaf).lower, hi = t.node(leaf).upper;
        for (std::size_t k = 0; k < probs.size(); ++k) {
          const double l = lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 0.5)(rng);
          const double u = hi - (hi - lo) * std::uniform_real_distribution<double>(0.0, 0.5)(rng);
          t.add_child(leaf, slot, ObservationEvent{0, static_cast<std::uint32_t>(k)}, probs[k], l, u);
        }
      }
      for (std::uint32_t a = 0; a < actions; ++a) t.backup(leaf, a);
      t.update_ancestors(leaf);
      SearchTree full = t;
      recompute_all_caches(full);
      for (NodeId id = 0; id < t.size(); ++id) {
        CAPTURE(id);
        CHECK(full.node(id).cache == t.node(id).cache);
      }
    }
  }
}

TEST_CASE("improvement statistics") {
  HybridStats s;
  CHECK(s.c_u() == 1.0);
  CHECK(s.c_l() == 1.0);
  record_expansion(s, SelectionTag::U, 0.3, -0.5);
  CHECK(s.i_u == doctest::Approx(0.8));
  CHECK(s.n_u == 1);
  CHECK(s.c_u() == doctest::Approx(0.9));
  record_expansion(s, SelectionTag::L, 1.0, -1.0);
  record_expansion(s, SelectionTag::L, 0.0, 0.0);
  CHECK(s.i_l == doctest::Approx(2.0));
  CHECK(s.n_l == 2);
  CHECK(s.c_l() == doctest::Approx(1.0));
  HybridStats t;
  t.i_u = 2.0;
  t.n_u = 3;
  CHECK(t.c_u() == doctest::Approx(0.75));
  s.reset();
  CHECK(s.n_u + s.n_l == 0);
  CHECK(s.i_u + s.i_l == 0.0);
}

TEST_CASE("leaf root offers only the upper candidate") {
  SearchTree t(0.9, 1.0, 3.0);
  const auto sel = try_choose_fhhop(t, HybridStats{});
  REQUIRE(sel);
  CHECK(sel->leaf == 0);
  CHECK(sel->tag == SelectionTag::U);
  CHECK(!sel->h_l);
  CHECK(sel->h_u == doctest::Approx(2.0));
}

TEST_CASE("terminal-only tree is exhausted") {
  SearchTree t(0.9, 0.0, 1.0);
  const auto slot = t.add_action(0, 0, 0.0);
  t.add_child(0, slot, {0, 0}, 1.0, 0.0, 0.0, true);
  t.backup(0, slot);
  recompute_all_caches(t);
  CHECK(!try_choose_fhhop(t, HybridStats{}));
  CHECK(!try_choose_aems2(t));
  CHECK_THROWS_AS(choose_best_node_fhhop(t, HybridStats{}), ExhaustedTree);
  CHECK_THROWS_AS(choose_best_node_aems2(t), ExhaustedTree);
}

namespace {

// Depth-one tree with one single-child action per entry of (q_lower, q_upper,
// leaf gap). Action q values are set directly.
SearchTree depth_one(const std::vector<std::array<double, 3>>& spec, double root_lower, double root_upper) {
  SearchTree t(0.95, root_lower, root_upper);
  for (std::uint32_t a = 0; a < spec.size(); ++a) {
    const auto slot = t.add_action(0, a, 0.0);
    t.add_child(0, slot, {0, a}, 1.0, 0.0, spec[a][2]);
    t.node(0).actions[slot].q_lower = spec[a][0];
    t.node(0).actions[slot].q_upper = spec[a][1];
  }
  recompute_all_caches(t);
  return t;
}

}  // namespace

TEST_CASE("second-best action picks the lower candidate") {
  // a1 has the best lower bound; a0 and a3 can still beat it, a2 cannot.
  const SearchTree t = depth_one({{{3.0, 9.0, 0.5}, {6.0, 7.0, 2.0}, {2.0, 5.0, 4.0}, {4.0, 8.0, 1.0}}}, 6.0, 9.0);
  const HeuristicCache& c = t.node(0).cache;
  CHECK(c.best_u.leaf == 1);
  CHECK(c.best_u.value == doctest::Approx(0.95 * 0.5));
  CHECK(c.best0.leaf == 2);
  CHECK(c.best1.leaf == 4);
  CHECK(c.best1.value == doctest::Approx(0.95 * 1.0));
}

TEST_CASE("ties in the lower bound leave no second-best") {
  const SearchTree t = depth_one({{{5.0, 9.0, 1.0}, {5.0, 7.0, 2.0}, {1.0, 4.0, 3.0}}}, 5.0, 9.0);
  const HeuristicCache& c = t.node(0).cache;
  CHECK(c.best0.leaf == 1);
  CHECK(!c.best1.valid());
  const auto sel = try_choose_fhhop(t, HybridStats{});
  REQUIRE(sel);
  CHECK(sel->tag == SelectionTag::U);
}

TEST_CASE("aems2 follows the best upper branch") {
  const SearchTree t = depth_one({{{6.0, 7.0, 3.0}, {1.0, 10.0, 0.2}}}, 6.0, 10.0);
  const auto sel = try_choose_aems2(t);
  REQUIRE(sel);
  CHECK(sel->leaf == 2);
  CHECK(sel->tag == SelectionTag::U);
}

TEST_CASE("lower selections give way to upper ones") {
  // Lower-candidate expansions that never move the root bounds shrink C_L
  // until the upper candidate wins.
  const SearchTree t = depth_one({{{5.0, 5.5, 1.0}, {0.0, 10.0, 0.27}, {4.0, 8.0, 3.0}}}, 5.0, 10.0);
  const HeuristicCache& c = t.node(0).cache;
  REQUIRE(c.best_u.leaf == 2);
  REQUIRE(c.best1.leaf == 3);
  const double h_u = c.best_u.value;
  const double root_gap = t.node(0).gap();
  double max_leaf_gap = 0.0;
  for (NodeId id = 1; id < t.size(); ++id) max_leaf_gap = std::max(max_leaf_gap, t.node(id).gap());
  HybridStats stats;
  std::size_t selections = 0;
  for (;;) {
    const auto sel = try_choose_fhhop(t, stats);
    REQUIRE(sel);
    ++selections;
    if (sel->tag == SelectionTag::U) break;
    record_expansion(stats, SelectionTag::L, 0.0, 0.0);
    REQUIRE(selections < 10000);
  }
  const double limit = std::ceil((root_gap + 1.0) * max_leaf_gap / (stats.c_u() * h_u));
  CHECK(selections == 12);
  CHECK(static_cast<double>(selections) <= limit);
}
