#include "fhhop/factored_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fhhop/errors.hpp"

namespace fhhop {
namespace {

std::string cell(std::initializer_list<std::pair<const char*, std::size_t>> parts) {
  std::string out = "(";
  bool first = true;
  for (const auto& [name, value] : parts) {
    if (!first) out += ", ";
    out += name;
    out += "=";
    out += std::to_string(value);
    first = false;
  }
  return out + ")";
}

void check_stochastic(std::span<const SparseEntry> row, std::uint32_t limit, const std::string& label) {
  double total = 0.0;
  for (const auto& e : row) {
    if (e.index >= limit) throw ValidationError(label + " has out-of-range column " + std::to_string(e.index));
    if (!(e.value >= 0.0 && e.value <= 1.0)) {
      throw ValidationError(label + " has entry " + std::to_string(e.index) + " outside [0,1]");
    }
    total += e.value;
  }
  if (std::abs(total - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << label << " sums to " << total;
    throw ValidationError(msg.str());
  }
}

}  // namespace

std::size_t FactoredAlphaSet::total_vectors() const noexcept {
  std::size_t total = 0;
  for (const auto& block : per_x) total += block.size();
  return total;
}

ObservationEvent FactoredModel::decode(std::uint32_t z) const {
  if (x_observability != XObservability::Decoded) {
    throw std::logic_error("observation alone does not determine x in a directly observed model");
  }
  return {obs_to_x.at(z), z};
}

void validate(const FactoredModel& m) {
  if (m.num_x == 0 || m.num_y == 0 || m.num_actions == 0 || m.num_observations == 0) {
    throw ValidationError("model dimensions must be positive");
  }
  if (!(m.discount > 0.0 && m.discount < 1.0)) throw ValidationError("discount must lie in (0,1)");
  const std::size_t xya = m.num_joint_states() * m.num_actions;
  if (m.transition_x.num_rows() != xya) throw ValidationError("T_X table has wrong row count");
  if (m.transition_y.num_rows() != m.transition_x.nnz()) throw ValidationError("T_Y table is not aligned with T_X");
  if (m.observation.num_rows() != static_cast<std::size_t>(m.num_actions) * m.num_joint_states()) {
    throw ValidationError("observation table has wrong row count");
  }
  if (m.reward.size() != xya) throw ValidationError("reward table has wrong size");
  if (m.terminal_x.size() != m.num_x) throw ValidationError("terminal_x has wrong size");
  if (m.terminal_y.size() != m.num_y) throw ValidationError("terminal_y has wrong size");

  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      for (std::uint32_t a = 0; a < m.num_actions; ++a) {
        const auto row = m.next_x(x, y, a);
        check_stochastic(row, m.num_x, "T_X row " + cell({{"x", x}, {"y", y}, {"a", a}}));
        for (std::size_t k = 0; k < row.size(); ++k) {
          check_stochastic(m.next_y(x, y, a, k), m.num_y,
                           "T_Y row " + cell({{"x", x}, {"y", y}, {"a", a}, {"x'", row[k].index}}));
        }
      }
    }
  }
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    for (std::uint32_t nx = 0; nx < m.num_x; ++nx) {
      for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
        check_stochastic(m.observations(a, nx, ny), m.num_observations,
                         "O row " + cell({{"a", a}, {"x'", nx}, {"y'", ny}}));
      }
    }
  }

  if (m.x_observability == XObservability::Decoded) {
    if (m.obs_to_x.size() != m.num_observations) throw ValidationError("obs_to_x must map every observation");
    for (std::uint32_t z = 0; z < m.num_observations; ++z) {
      if (m.obs_to_x[z] >= m.num_x) throw ValidationError("obs_to_x maps observation " + std::to_string(z) +
                                                          " outside X");
    }
    for (std::uint32_t a = 0; a < m.num_actions; ++a) {
      for (std::uint32_t nx = 0; nx < m.num_x; ++nx) {
        for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
          for (const auto& e : m.observations(a, nx, ny)) {
            if (m.obs_to_x[e.index] != nx) {
              throw ValidationError("observation " + std::to_string(e.index) + " is emitted from x'=" +
                                    std::to_string(nx) + " but decodes to x=" + std::to_string(m.obs_to_x[e.index]) +
                                    " in O row " + cell({{"a", a}, {"x'", nx}, {"y'", ny}}));
            }
          }
        }
      }
    }
  } else if (!m.obs_to_x.empty()) {
    throw ValidationError("obs_to_x must be empty when x is directly observed");
  }

  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      if (!m.is_terminal(x, y)) continue;
      for (std::uint32_t a = 0; a < m.num_actions; ++a) {
        const auto row = m.next_x(x, y, a);
        const bool loops = row.size() == 1 && row[0].index == x && m.next_y(x, y, a, 0).size() == 1 &&
                           m.next_y(x, y, a, 0)[0].index == y;
        if (!loops || m.reward_of(x, y, a) != 0.0) {
          throw ValidationError("terminal state " + cell({{"x", x}, {"y", y}}) +
                                " must self-loop with zero reward under action " + std::to_string(a));
        }
      }
    }
  }
  validate_distribution(m.initial_x, m.num_x, "initial x distribution");
  validate_distribution(m.initial_y, m.num_y, "initial y distribution");
}

namespace {

// Unnormalized one-step prediction over y' restricted to successor block nx.
std::vector<double> predict_block(const FactoredModel& m, const FactoredBelief& fb, std::uint32_t a,
                                  std::uint32_t nx) {
  std::vector<double> pred(m.num_y, 0.0);
  for (std::uint32_t y = 0; y < m.num_y; ++y) {
    const double weight = fb.dist_y[y];
    if (weight == 0.0) continue;
    const auto row = m.next_x(fb.x, y, a);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k].index != nx) continue;
      const double px = row[k].value;
      for (const auto& e : m.next_y(fb.x, y, a, k)) pred[e.index] += (px * e.value) * weight;
    }
  }
  return pred;
}

}  // namespace

FactoredUpdateResult factored_belief_update(const FactoredModel& m, const FactoredBelief& fb, std::uint32_t a,
                                            ObservationEvent event) {
  std::vector<double> next = predict_block(m, fb, a, event.x);
  double eta = 0.0;
  for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
    if (next[ny] == 0.0) continue;
    next[ny] *= m.observation.at(m.observation_row(a, event.x, ny), event.z);
    eta += next[ny];
  }
  if (eta < kImpossibleObservation) {
    throw ImpossibleObservation("event (x'=" + std::to_string(event.x) + ", z=" + std::to_string(event.z) +
                                ") has probability " + std::to_string(eta) + " after action " + std::to_string(a));
  }
  finish_belief(next, eta);
  return {FactoredBelief{event.x, std::move(next)}, eta};
}

FactoredUpdateResult factored_belief_update(const FactoredModel& m, const FactoredBelief& fb, std::uint32_t a,
                                            std::uint32_t z) {
  return factored_belief_update(m, fb, a, m.decode(z));
}

double factored_obs_prob(const FactoredModel& m, const FactoredBelief& fb, std::uint32_t a, ObservationEvent event) {
  const std::vector<double> pred = predict_block(m, fb, a, event.x);
  double eta = 0.0;
  for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
    if (pred[ny] == 0.0) continue;
    eta += pred[ny] * m.observation.at(m.observation_row(a, event.x, ny), event.z);
  }
  return eta;
}

double factored_obs_prob(const FactoredModel& m, const FactoredBelief& fb, std::uint32_t a, std::uint32_t z) {
  return factored_obs_prob(m, fb, a, m.decode(z));
}

double factored_belief_reward(const FactoredModel& m, const FactoredBelief& fb, std::uint32_t a) {
  double total = 0.0;
  for (std::uint32_t y = 0; y < m.num_y; ++y) {
    if (fb.dist_y[y] != 0.0) total += m.reward_of(fb.x, y, a) * fb.dist_y[y];
  }
  return total;
}

ValueResult factored_value(const FactoredAlphaSet& alpha, const FactoredBelief& fb) {
  const auto& block = alpha.per_x[fb.x];
  ValueResult best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < block.size(); ++i) {
    const double v = dot(block[i].values, fb.dist_y);
    if (v > best.value) best = {v, i};
  }
  return best;
}

std::vector<Successor> successors(const FactoredModel& m, const FactoredBelief& fb, std::uint32_t a,
                                  Profiler* profiler) {
  struct Block {
    std::uint32_t x;
    std::vector<double> pred;
  };
  std::vector<Block> blocks;
  {
    ProfileScope scope(profiler, PrimitiveFamily::BeliefUpdate);
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      const double weight = fb.dist_y[y];
      if (weight == 0.0) continue;
      const auto row = m.next_x(fb.x, y, a);
      for (std::size_t k = 0; k < row.size(); ++k) {
        auto it = std::find_if(blocks.begin(), blocks.end(), [&](const Block& b) { return b.x == row[k].index; });
        if (it == blocks.end()) {
          blocks.push_back({row[k].index, std::vector<double>(m.num_y, 0.0)});
          it = std::prev(blocks.end());
        }
        const double px = row[k].value;
        for (const auto& e : m.next_y(fb.x, y, a, k)) it->pred[e.index] += (px * e.value) * weight;
      }
    }
    std::sort(blocks.begin(), blocks.end(), [](const Block& l, const Block& r) { return l.x < r.x; });
  }

  std::vector<Successor> out;
  std::vector<double> marginal(m.num_observations, 0.0);
  std::vector<std::uint8_t> seen(m.num_observations, 0);
  std::vector<std::uint32_t> touched;
  for (const Block& block : blocks) {
    touched.clear();
    {
      ProfileScope scope(profiler, PrimitiveFamily::ObservationProbability);
      for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
        const double p = block.pred[ny];
        if (p == 0.0) continue;
        for (const auto& e : m.observations(a, block.x, ny)) {
          if (!seen[e.index]) {
            seen[e.index] = 1;
            touched.push_back(e.index);
          }
          marginal[e.index] += p * e.value;
        }
      }
      std::sort(touched.begin(), touched.end());
    }
    {
      ProfileScope scope(profiler, PrimitiveFamily::BeliefUpdate);
      for (std::uint32_t z : touched) {
        const double eta = marginal[z];
        if (eta > kImpossibleObservation) {
          std::vector<double> next(m.num_y, 0.0);
          for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
            const double p = block.pred[ny];
            if (p == 0.0) continue;
            next[ny] = p * m.observation.at(m.observation_row(a, block.x, ny), z);
          }
          finish_belief(next, eta);
          out.push_back({ObservationEvent{block.x, z}, eta, FactoredBelief{block.x, std::move(next)}});
        }
        marginal[z] = 0.0;
        seen[z] = 0;
      }
    }
  }
  return out;
}

std::size_t count_reachable_states(const FactoredModel& m) {
  std::vector<std::uint8_t> seen(m.num_joint_states(), 0);
  std::vector<std::size_t> frontier;
  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      if (m.initial_x[x] > 0.0 && m.initial_y[y] > 0.0) {
        seen[static_cast<std::size_t>(x) * m.num_y + y] = 1;
        frontier.push_back(static_cast<std::size_t>(x) * m.num_y + y);
      }
    }
  }
  std::size_t count = frontier.size();
  while (!frontier.empty()) {
    const std::size_t s = frontier.back();
    frontier.pop_back();
    const auto x = static_cast<std::uint32_t>(s / m.num_y);
    const auto y = static_cast<std::uint32_t>(s % m.num_y);
    for (std::uint32_t a = 0; a < m.num_actions; ++a) {
      const auto xs = m.next_x(x, y, a);
      for (std::size_t k = 0; k < xs.size(); ++k) {
        for (const auto& e : m.next_y(x, y, a, k)) {
          const std::size_t t = static_cast<std::size_t>(xs[k].index) * m.num_y + e.index;
          if (seen[t]) continue;
          seen[t] = 1;
          ++count;
          frontier.push_back(t);
        }
      }
    }
  }
  return count;
}

bool is_terminal_belief(const FactoredModel& m, const FactoredBelief& fb) {
  if (m.terminal_x[fb.x] != 0) return true;
  bool any_mass = false;
  for (std::uint32_t y = 0; y < m.num_y; ++y) {
    if (fb.dist_y[y] == 0.0) continue;
    if (m.terminal_y[y] == 0) return false;
    any_mass = true;
  }
  return any_mass;
}

std::uint32_t flat_observation_index(const FactoredModel& m, ObservationEvent event) {
  if (m.x_observability == XObservability::Decoded) return event.z;
  return event.x * m.num_observations + event.z;
}

Belief embed_belief(const FactoredModel& m, const FactoredBelief& fb) {
  Belief b{std::vector<double>(m.num_joint_states(), 0.0)};
  std::copy(fb.dist_y.begin(), fb.dist_y.end(), b.probs.begin() + static_cast<std::ptrdiff_t>(fb.x) * m.num_y);
  return b;
}

FlatModel to_flat(const FactoredModel& m, std::size_t max_states) {
  const std::size_t states = m.num_joint_states();
  if (states > max_states) {
    throw ModelTooLarge("flattening would create " + std::to_string(states) + " states (cap " +
                        std::to_string(max_states) + ")");
  }
  const bool direct = m.x_observability == XObservability::Direct;
  const std::size_t flat_obs = direct ? static_cast<std::size_t>(m.num_x) * m.num_observations : m.num_observations;
  if (flat_obs > std::numeric_limits<std::uint32_t>::max()) throw ModelTooLarge("flat observation space too large");

  FlatModel f;
  f.num_states = static_cast<std::uint32_t>(states);
  f.num_actions = m.num_actions;
  f.num_observations = static_cast<std::uint32_t>(flat_obs);
  f.discount = m.discount;
  f.reward = m.reward;

  f.transition.reserve(states * m.num_actions, m.transition_y.nnz());
  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      for (std::uint32_t a = 0; a < m.num_actions; ++a) {
        const auto row = m.next_x(x, y, a);
        for (std::size_t k = 0; k < row.size(); ++k) {
          const double px = row[k].value;
          const std::uint32_t base = row[k].index * m.num_y;
          for (const auto& e : m.next_y(x, y, a, k)) f.transition.append(base + e.index, px * e.value);
        }
        f.transition.close_row();
      }
    }
  }

  f.observation.reserve(states * m.num_actions, m.observation.nnz());
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    for (std::uint32_t nx = 0; nx < m.num_x; ++nx) {
      for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
        for (const auto& e : m.observations(a, nx, ny)) {
          f.observation.append(direct ? nx * m.num_observations + e.index : e.index, e.value);
        }
        f.observation.close_row();
      }
    }
  }

  f.terminal.resize(states);
  f.initial_belief.probs.resize(states);
  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      const std::size_t s = static_cast<std::size_t>(x) * m.num_y + y;
      f.terminal[s] = m.is_terminal(x, y) ? 1 : 0;
      f.initial_belief.probs[s] = m.initial_x[x] * m.initial_y[y];
    }
  }
  return f;
}

FactoredModel from_flat(const FlatModel& f) {
  FactoredModel m;
  m.num_x = 1;
  m.num_y = f.num_states;
  m.num_actions = f.num_actions;
  m.num_observations = f.num_observations;
  m.discount = f.discount;
  m.x_observability = XObservability::Decoded;
  m.obs_to_x.assign(f.num_observations, 0);
  m.reward = f.reward;
  m.transition_x.reserve(f.transition.num_rows(), f.transition.num_rows());
  for (std::size_t r = 0; r < f.transition.num_rows(); ++r) {
    m.transition_x.append(0, 1.0);
    m.transition_x.close_row();
  }
  m.transition_y = f.transition;
  m.observation = f.observation;
  m.terminal_x.assign(1, 0);
  m.terminal_y = f.terminal;
  m.initial_x.assign(1, 1.0);
  m.initial_y = f.initial_belief.probs;
  return m;
}

}  // namespace fhhop
