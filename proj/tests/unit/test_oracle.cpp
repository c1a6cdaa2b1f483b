#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "fhhop/errors.hpp"
#include "fhhop/oracle.hpp"
#include "random_models.hpp"

using namespace fhhop;
using namespace fhhop::testing;

namespace {

bool all_terminal(const FlatModel& m, const Belief& b) {
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    if (b.probs[s] > 0.0 && !m.is_terminal(s)) return false;
  }
  return true;
}

// Depth-limited expectimax on the belief MDP, independent of alpha vectors.
// Non-terminal leaves are worth `leaf`.
double expectimax(const FlatModel& m, const Belief& b, int depth, double leaf = 0.0) {
  if (all_terminal(m, b)) return 0.0;
  if (depth == 0) return leaf;
  double best = -1e300;
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    double q = belief_reward(m, b, a);
    for (std::uint32_t z = 0; z < m.num_observations; ++z) {
      const double p = obs_prob(m, b, a, z);
      if (p <= kImpossibleObservation) continue;
      q += m.discount * p * expectimax(m, belief_update(m, b, a, z).belief, depth - 1, leaf);
    }
    best = std::max(best, q);
  }
  return best;
}

double max_over(const std::vector<AlphaVector>& set, const std::vector<double>& b) {
  double best = -1e300;
  for (const auto& v : set) best = std::max(best, dot(v.values, b));
  return best;
}

}  // namespace

TEST_CASE("pruning keeps the upper surface") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<AlphaVector> vs;
    for (int i = 0; i < 30; ++i) {
      AlphaVector v{std::vector<double>(n), static_cast<std::uint32_t>(i)};
      for (auto& x : v.values) x = std::uniform_real_distribution<double>(-1, 1)(rng);
      vs.push_back(v);
    }
    vs.push_back(vs[3]);
    const auto kept = prune_vectors(vs);
    CHECK(kept.size() <= vs.size() - 1);
    for (int probe = 0; probe < 200; ++probe) {
      const auto b = random_distribution(rng, n, 0.2);
      CHECK(max_over(kept, b) == doctest::Approx(max_over(vs, b)).epsilon(1e-9));
    }
  }
}

TEST_CASE("pruning drops dominated and duplicate vectors") {
  std::vector<AlphaVector> vs{{{1.0, 1.0}, 0}, {{0.5, 0.5}, 1}, {{1.0, 1.0}, 2}, {{0.0, 1.2}, 3}, {{0.6, 0.6}, 4}};
  const auto kept = prune_vectors(vs);
  CHECK(kept.size() == 2);
}

TEST_CASE("zero rewards give a zero value function") {
  std::mt19937_64 rng(37);
  RandomFlatOptions o;
  o.states = 4;
  o.reward_low = o.reward_high = 0.0;
  const FlatModel m = random_flat_model(rng, o);
  const auto v = exact_value_iteration_oracle(m, 1e-6);
  for (const auto& alpha : v.vectors) {
    for (double x : alpha.values) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("observable chain matches the discounted path reward") {
  const FlatModel m = observable_chain(5);
  const auto v = exact_value_iteration_oracle(m, 1e-8);
  for (std::uint32_t s = 0; s + 1 < 5; ++s) {
    std::vector<double> point(5, 0.0);
    point[s] = 1.0;
    const double expected = std::pow(0.9, 3 - s);
    CHECK(value_of_belief(v, point).value == doctest::Approx(expected).epsilon(1e-7));
  }
  std::vector<double> end(5, 0.0);
  end[4] = 1.0;
  CHECK(value_of_belief(v, end).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("terminal tiger agrees with deep expectimax") {
  const FlatModel m = terminal_tiger();
  const double eps = 1e-4;
  const auto v = exact_value_iteration_oracle(m, eps);
  std::mt19937_64 rng(41);
  for (int probe = 0; probe < 10; ++probe) {
    const double p = std::uniform_real_distribution<double>(0, 1)(rng);
    const Belief b{{p, 1 - p, 0.0}};
    // At most one +10 is ever collected, and listening forever costs 20, so
    // V* lies in [-20, 10]; using those as leaf values brackets V*.
    const double low = expectimax(m, b, 14, -20.0);
    const double high = expectimax(m, b, 14, 10.0);
    const double value = value_of_belief(v, b.probs).value;
    CHECK(high - low < 0.5);
    CHECK(value >= low - eps);
    CHECK(value <= high + eps);
  }
  const Belief uniform{{0.5, 0.5, 0.0}};
  double best_q = -1e300;
  for (std::uint32_t a = 0; a < 3; ++a) best_q = std::max(best_q, oracle_q_value(m, v, uniform, a));
  CHECK(oracle_q_value(m, v, uniform, 0) == doctest::Approx(best_q));
  CHECK(best_q == doctest::Approx(value_of_belief(v, uniform.probs).value).epsilon(1e-6));
}

TEST_CASE("oracle refuses large models") {
  std::mt19937_64 rng(43);
  RandomFlatOptions o;
  o.states = 9;
  CHECK_THROWS_AS(exact_value_iteration_oracle(random_flat_model(rng, o), 1e-3), ModelTooLarge);
}

TEST_CASE("oracle is a fixed point of the Bellman backup on random episodic models") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    RandomFlatOptions o;
    o.states = 3 + trial % 3;
    o.actions = 2;
    o.observations = 2;
    o.termination = 0.6;
    const FlatModel m = random_flat_model(rng, o);
    const auto v = exact_value_iteration_oracle(m, 1e-6);
    for (int probe = 0; probe < 20; ++probe) {
      const Belief b = random_belief(rng, m.num_states, 0.2);
      double best = -1e300;
      for (std::uint32_t a = 0; a < m.num_actions; ++a) best = std::max(best, oracle_q_value(m, v, b, a));
      CHECK(best == doctest::Approx(value_of_belief(v, b.probs).value).epsilon(1e-5));
      // survival per step is at most 0.4 and |r| <= 1
      CHECK(std::abs(expectimax(m, b, 8) - best) <= std::pow(0.4, 8) / 0.6 + 1e-6);
    }
  }
}
