#include "fhhop/flat_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "fhhop/errors.hpp"

namespace fhhop {
namespace {

double row_sum(std::span<const SparseEntry> row) {
  double total = 0.0;
  for (const auto& e : row) total += e.value;
  return total;
}

void check_row(std::span<const SparseEntry> row, const std::string& label) {
  for (const auto& e : row) {
    if (!(e.value >= 0.0 && e.value <= 1.0)) {
      throw ValidationError(label + " has entry " + std::to_string(e.index) + " outside [0,1]");
    }
  }
  const double total = row_sum(row);
  if (std::abs(total - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << label << " sums to " << total;
    throw ValidationError(msg.str());
  }
}

}  // namespace

void validate_distribution(std::span<const double> probs, std::size_t size, const char* what) {
  if (probs.size() != size) {
    throw ValidationError(std::string(what) + " has length " + std::to_string(probs.size()) + ", expected " +
                          std::to_string(size));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      throw ValidationError(std::string(what) + " entry " + std::to_string(i) + " outside [0,1]");
    }
    total += probs[i];
  }
  if (std::abs(total - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " sums to " << total;
    throw ValidationError(msg.str());
  }
}

void validate(const FlatModel& m) {
  if (m.num_states == 0 || m.num_actions == 0 || m.num_observations == 0) {
    throw ValidationError("model dimensions must be positive");
  }
  if (!(m.discount > 0.0 && m.discount < 1.0)) throw ValidationError("discount must lie in (0,1)");
  const std::size_t sa = static_cast<std::size_t>(m.num_states) * m.num_actions;
  if (m.transition.num_rows() != sa) throw ValidationError("transition table has wrong row count");
  if (m.observation.num_rows() != sa) throw ValidationError("observation table has wrong row count");
  if (m.reward.size() != sa) throw ValidationError("reward table has wrong size");
  if (m.terminal.size() != m.num_states) throw ValidationError("terminal flags have wrong size");

  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    for (std::uint32_t a = 0; a < m.num_actions; ++a) {
      const auto row = m.transitions(s, a);
      for (const auto& e : row) {
        if (e.index >= m.num_states) throw ValidationError("T row (s=" + std::to_string(s) + ", a=" +
                                                           std::to_string(a) + ") has out-of-range successor");
      }
      check_row(row, "T row (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")");
    }
  }
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
      const auto row = m.observations(a, s);
      for (const auto& e : row) {
        if (e.index >= m.num_observations) {
          throw ValidationError("O row (a=" + std::to_string(a) + ", s'=" + std::to_string(s) +
                                ") has out-of-range observation");
        }
      }
      check_row(row, "O row (a=" + std::to_string(a) + ", s'=" + std::to_string(s) + ")");
    }
  }
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    if (!m.is_terminal(s)) continue;
    for (std::uint32_t a = 0; a < m.num_actions; ++a) {
      const auto row = m.transitions(s, a);
      if (row.size() != 1 || row[0].index != s || m.reward_of(s, a) != 0.0) {
        throw ValidationError("terminal state " + std::to_string(s) +
                              " must self-loop with zero reward under action " + std::to_string(a));
      }
    }
  }
  validate_distribution(m.initial_belief.probs, m.num_states, "initial belief");
}

void finish_belief(std::vector<double>& unnormalized, double eta) {
  double total = 0.0;
  for (double& p : unnormalized) {
    p /= eta;
    total += p;
  }
  if (total != 1.0) {
    for (double& p : unnormalized) p /= total;
  }
}

namespace {

std::vector<double> predict(const FlatModel& m, const Belief& b, std::uint32_t a) {
  std::vector<double> pred(m.num_states, 0.0);
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    const double weight = b.probs[s];
    if (weight == 0.0) continue;
    for (const auto& e : m.transitions(s, a)) pred[e.index] += e.value * weight;
  }
  return pred;
}

}  // namespace

UpdateResult belief_update(const FlatModel& m, const Belief& b, std::uint32_t a, std::uint32_t z) {
  std::vector<double> next = predict(m, b, a);
  double eta = 0.0;
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    if (next[s] == 0.0) continue;
    next[s] *= m.observation.at(static_cast<std::size_t>(a) * m.num_states + s, z);
    eta += next[s];
  }
  if (eta < kImpossibleObservation) {
    throw ImpossibleObservation("observation " + std::to_string(z) + " has probability " + std::to_string(eta) +
                                " after action " + std::to_string(a));
  }
  finish_belief(next, eta);
  return {Belief{std::move(next)}, eta};
}

double obs_prob(const FlatModel& m, const Belief& b, std::uint32_t a, std::uint32_t z) {
  const std::vector<double> pred = predict(m, b, a);
  double eta = 0.0;
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    if (pred[s] == 0.0) continue;
    eta += pred[s] * m.observation.at(static_cast<std::size_t>(a) * m.num_states + s, z);
  }
  return eta;
}

double belief_reward(const FlatModel& m, const Belief& b, std::uint32_t a) {
  double total = 0.0;
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    if (b.probs[s] != 0.0) total += m.reward_of(s, a) * b.probs[s];
  }
  return total;
}

double dot(std::span<const double> lhs, std::span<const double> rhs) noexcept {
  double total = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) total += lhs[i] * rhs[i];
  return total;
}

ValueResult value_of_belief(const AlphaVectorSet& gamma, std::span<const double> b) {
  ValueResult best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < gamma.vectors.size(); ++i) {
    const double v = dot(gamma.vectors[i].values, b);
    if (v > best.value) best = {v, i};
  }
  return best;
}

double min_reward(const FlatModel& m) { return *std::min_element(m.reward.begin(), m.reward.end()); }
double max_reward(const FlatModel& m) { return *std::max_element(m.reward.begin(), m.reward.end()); }

}  // namespace fhhop
