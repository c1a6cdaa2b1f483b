#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fhhop/sparse.hpp"

namespace fhhop {

inline constexpr double kStochasticTolerance = 1e-9;
inline constexpr double kImpossibleObservation = 1e-12;

struct Belief {
  std::vector<double> probs;

  friend bool operator==(const Belief&, const Belief&) = default;
};

struct AlphaVector {
  std::vector<double> values;
  std::uint32_t action = 0;

  friend bool operator==(const AlphaVector&, const AlphaVector&) = default;
};

struct AlphaVectorSet {
  std::vector<AlphaVector> vectors;

  friend bool operator==(const AlphaVectorSet&, const AlphaVectorSet&) = default;
};

/// Tabular POMDP. Tables are sparse; row layouts:
///   transition   row s*|A| + a,   columns s'
///   observation  row a*|S| + s',  columns z
///   reward       index s*|A| + a
struct FlatModel {
  std::uint32_t num_states = 0;
  std::uint32_t num_actions = 0;
  std::uint32_t num_observations = 0;
  SparseRows transition;
  SparseRows observation;
  std::vector<double> reward;
  double discount = 0.95;
  std::vector<std::uint8_t> terminal;
  Belief initial_belief;

  std::span<const SparseEntry> transitions(std::uint32_t s, std::uint32_t a) const noexcept {
    return transition.row(static_cast<std::size_t>(s) * num_actions + a);
  }
  std::span<const SparseEntry> observations(std::uint32_t a, std::uint32_t next) const noexcept {
    return observation.row(static_cast<std::size_t>(a) * num_states + next);
  }
  double reward_of(std::uint32_t s, std::uint32_t a) const noexcept {
    return reward[static_cast<std::size_t>(s) * num_actions + a];
  }
  bool is_terminal(std::uint32_t s) const noexcept { return terminal[s] != 0; }

  friend bool operator==(const FlatModel&, const FlatModel&) = default;
};

/// Throws ValidationError naming the first violated row.
void validate(const FlatModel& model);

/// Throws ValidationError unless `probs` is a distribution of length `size`.
void validate_distribution(std::span<const double> probs, std::size_t size, const char* what);

struct UpdateResult {
  Belief belief;
  double obs_prob = 0.0;
};

struct ValueResult {
  double value = 0.0;
  std::size_t index = 0;
};

UpdateResult belief_update(const FlatModel& model, const Belief& b, std::uint32_t a, std::uint32_t z);
double obs_prob(const FlatModel& model, const Belief& b, std::uint32_t a, std::uint32_t z);
double belief_reward(const FlatModel& model, const Belief& b, std::uint32_t a);

/// max over the set of alpha . b; ties go to the lowest index.
ValueResult value_of_belief(const AlphaVectorSet& gamma, std::span<const double> b);

double dot(std::span<const double> lhs, std::span<const double> rhs) noexcept;

/// Divides the unnormalized successor by eta, then renormalizes by the
/// resulting sum to absorb rounding drift.
void finish_belief(std::vector<double>& unnormalized, double eta);

double min_reward(const FlatModel& model);
double max_reward(const FlatModel& model);

}  // namespace fhhop
