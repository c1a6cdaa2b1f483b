#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fhhop/flat_model.hpp"
#include "fhhop/profiler.hpp"
#include "fhhop/sparse.hpp"

namespace fhhop {

/// How the agent learns the successor's fully observable component x'.
enum class XObservability : std::uint8_t {
  /// x' is a function of the observation alone (obs_to_x).
  Decoded,
  /// x' is observed directly alongside z; the observation event is (x', z).
  Direct,
};

struct FactoredBelief {
  std::uint32_t x = 0;
  std::vector<double> dist_y;

  friend bool operator==(const FactoredBelief&, const FactoredBelief&) = default;
};

/// Per-x lists of |Y|-dimensional vectors.
struct FactoredAlphaSet {
  std::vector<std::vector<AlphaVector>> per_x;

  std::size_t total_vectors() const noexcept;
  friend bool operator==(const FactoredAlphaSet&, const FactoredAlphaSet&) = default;
};

/// What the agent perceives after acting: the new x and the observation.
struct ObservationEvent {
  std::uint32_t x = 0;
  std::uint32_t z = 0;

  friend auto operator<=>(const ObservationEvent&, const ObservationEvent&) = default;
};

/// Mixed-observability model.
///   transition_x  row (x*|Y| + y)*|A| + a, columns x'
///   transition_y  one row per stored transition_x entry (same global
///                 position), columns y'; T_Y is only defined where T_X > 0
///   observation   row (a*|X| + x')*|Y| + y', columns z
///   reward        index (x*|Y| + y)*|A| + a
/// A joint state (x, y) is terminal when terminal_x[x] or terminal_y[y].
struct FactoredModel {
  std::uint32_t num_x = 0;
  std::uint32_t num_y = 0;
  std::uint32_t num_actions = 0;
  std::uint32_t num_observations = 0;
  SparseRows transition_x;
  SparseRows transition_y;
  SparseRows observation;
  std::vector<double> reward;
  double discount = 0.95;
  XObservability x_observability = XObservability::Decoded;
  std::vector<std::uint32_t> obs_to_x;
  std::vector<std::uint8_t> terminal_x;
  std::vector<std::uint8_t> terminal_y;
  std::vector<double> initial_x;
  std::vector<double> initial_y;

  std::size_t state_action_row(std::uint32_t x, std::uint32_t y, std::uint32_t a) const noexcept {
    return (static_cast<std::size_t>(x) * num_y + y) * num_actions + a;
  }
  std::span<const SparseEntry> next_x(std::uint32_t x, std::uint32_t y, std::uint32_t a) const noexcept {
    return transition_x.row(state_action_row(x, y, a));
  }
  /// T_Y row paired with the k-th entry of next_x(x, y, a).
  std::span<const SparseEntry> next_y(std::uint32_t x, std::uint32_t y, std::uint32_t a, std::size_t k) const noexcept {
    return transition_y.row(transition_x.row_begin(state_action_row(x, y, a)) + k);
  }
  std::size_t observation_row(std::uint32_t a, std::uint32_t next_x, std::uint32_t next_y) const noexcept {
    return (static_cast<std::size_t>(a) * num_x + next_x) * num_y + next_y;
  }
  std::span<const SparseEntry> observations(std::uint32_t a, std::uint32_t nx, std::uint32_t ny) const noexcept {
    return observation.row(observation_row(a, nx, ny));
  }
  double reward_of(std::uint32_t x, std::uint32_t y, std::uint32_t a) const noexcept {
    return reward[state_action_row(x, y, a)];
  }
  bool is_terminal(std::uint32_t x, std::uint32_t y) const noexcept {
    return terminal_x[x] != 0 || terminal_y[y] != 0;
  }
  std::size_t num_joint_states() const noexcept { return static_cast<std::size_t>(num_x) * num_y; }

  /// The event an observation index stands for in decoded mode.
  ObservationEvent decode(std::uint32_t z) const;

  friend bool operator==(const FactoredModel&, const FactoredModel&) = default;
};

/// Throws ValidationError naming the first violated row.
void validate(const FactoredModel& model);

struct FactoredUpdateResult {
  FactoredBelief belief;
  double obs_prob = 0.0;
};

FactoredUpdateResult factored_belief_update(const FactoredModel& model, const FactoredBelief& fb, std::uint32_t a,
                                            ObservationEvent event);
/// Decoded-mode overload: x' = obs_to_x(z).
FactoredUpdateResult factored_belief_update(const FactoredModel& model, const FactoredBelief& fb, std::uint32_t a,
                                            std::uint32_t z);
double factored_obs_prob(const FactoredModel& model, const FactoredBelief& fb, std::uint32_t a,
                         ObservationEvent event);
double factored_obs_prob(const FactoredModel& model, const FactoredBelief& fb, std::uint32_t a, std::uint32_t z);
double factored_belief_reward(const FactoredModel& model, const FactoredBelief& fb, std::uint32_t a);

/// Max over the vectors stored for fb.x only; ties go to the lowest index.
ValueResult factored_value(const FactoredAlphaSet& alpha, const FactoredBelief& fb);

struct Successor {
  ObservationEvent event;
  double prob = 0.0;
  FactoredBelief belief;
};

/// Every observation event with probability above the impossibility
/// threshold after taking `a` at `fb`, ordered by (x', z), with its
/// successor belief. Prediction and normalization are charged to the
/// belief-update family, the observation marginal to the observation family.
std::vector<Successor> successors(const FactoredModel& model, const FactoredBelief& fb, std::uint32_t a,
                                  Profiler* profiler = nullptr);

/// True when all belief mass sits on terminal joint states.
bool is_terminal_belief(const FactoredModel& model, const FactoredBelief& fb);

/// Joint states reachable from the support of initial_x x initial_y.
std::size_t count_reachable_states(const FactoredModel& model);

inline constexpr std::size_t kDefaultFlattenCap = std::size_t{1} << 22;

/// Joint model over s = x*|Y| + y. In direct mode the flat observation is the
/// pair index x'*|Z| + z so that it still reveals x'.
FlatModel to_flat(const FactoredModel& model, std::size_t max_states = kDefaultFlattenCap);

/// |X| = 1 wrapper: every observation decodes to x = 0.
FactoredModel from_flat(const FlatModel& model);

/// Flat index of the observation event produced by to_flat.
std::uint32_t flat_observation_index(const FactoredModel& model, ObservationEvent event);

/// Joint belief of (x, b_Y) with all mass on block x.
Belief embed_belief(const FactoredModel& model, const FactoredBelief& fb);

}  // namespace fhhop
