#include "fhhop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fhhop/errors.hpp"

namespace fhhop {
namespace {

struct LpSolution {
  double value = 0.0;
  std::vector<double> x;
};

// maximize c.x subject to A x <= rhs, x >= 0, with rhs >= 0 so the slack
// basis is feasible. Bland's rule keeps degenerate pivots from cycling.
LpSolution simplex_max(const std::vector<std::vector<double>>& a, const std::vector<double>& rhs,
                       const std::vector<double>& c) {
  constexpr double kEps = 1e-12;
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  const std::size_t width = n + m + 1;
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(a[i].begin(), a[i].end(), t[i].begin());
    t[i][n + i] = 1.0;
    t[i][width - 1] = rhs[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];

  for (;;) {
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (t[m][j] < -kEps) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= kEps) continue;
      const double ratio = t[i][width - 1] / t[i][enter];
      if (ratio < best_ratio - kEps || (std::abs(ratio - best_ratio) <= kEps && leave < m && basis[i] < basis[leave])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == m) break;  // unbounded; cannot happen for the witness LP
    const double pivot = t[leave][enter];
    for (double& v : t[leave]) v /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave || t[i][enter] == 0.0) continue;
      const double factor = t[i][enter];
      for (std::size_t j = 0; j < width; ++j) t[i][j] -= factor * t[leave][j];
    }
    basis[leave] = enter;
  }
  LpSolution out;
  out.value = t[m][width - 1];
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = t[i][width - 1];
  }
  return out;
}

struct Witness {
  double margin = 0.0;
  std::vector<double> belief;
};

// Largest d such that some belief b has w.b >= f.b + d for every f in
// frontier. Shifted by K so all coefficients are positive and d' >= 0.
Witness find_witness(const AlphaVector& w, const std::vector<AlphaVector>& frontier) {
  const std::size_t n = w.values.size();
  double k = 1.0;
  for (const auto& f : frontier) {
    for (std::size_t s = 0; s < n; ++s) k = std::max(k, std::abs(w.values[s] - f.values[s]) + 1.0);
  }
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  rows.reserve(frontier.size() + 1);
  for (const auto& f : frontier) {
    std::vector<double> row(n + 1, 0.0);
    for (std::size_t s = 0; s < n; ++s) row[s] = -(w.values[s] - f.values[s] + k);
    row[n] = 1.0;
    rows.push_back(std::move(row));
    rhs.push_back(0.0);
  }
  std::vector<double> simplex_row(n + 1, 1.0);
  simplex_row[n] = 0.0;
  rows.push_back(std::move(simplex_row));
  rhs.push_back(1.0);
  std::vector<double> objective(n + 1, 0.0);
  objective[n] = 1.0;
  LpSolution sol = simplex_max(rows, rhs, objective);
  Witness out;
  out.margin = sol.value - k;
  out.belief.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

bool lexicographically_greater(const AlphaVector& a, const AlphaVector& b) {
  return std::lexicographical_compare(b.values.begin(), b.values.end(), a.values.begin(), a.values.end());
}

std::vector<AlphaVector> remove_dominated(std::vector<AlphaVector> in) {
  std::vector<std::uint8_t> keep(in.size(), 0);
  for (std::size_t i = 0; i < in.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < in.size() && !dominated; ++j) {
      if (i == j) continue;
      bool geq = true;
      bool equal = true;
      for (std::size_t s = 0; s < in[i].values.size(); ++s) {
        if (in[j].values[s] < in[i].values[s]) {
          geq = false;
          break;
        }
        if (in[j].values[s] != in[i].values[s]) equal = false;
      }
      // identical vectors: keep the first occurrence
      if (geq && (!equal || j < i)) dominated = true;
    }
    keep[i] = dominated ? 0 : 1;
  }
  std::vector<AlphaVector> out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (keep[i]) out.push_back(std::move(in[i]));
  }
  return out;
}

std::vector<AlphaVector> cross_sum(const std::vector<AlphaVector>& lhs, const std::vector<AlphaVector>& rhs) {
  std::vector<AlphaVector> out;
  out.reserve(lhs.size() * rhs.size());
  for (const auto& l : lhs) {
    for (const auto& r : rhs) {
      AlphaVector v{l.values, l.action};
      for (std::size_t s = 0; s < v.values.size(); ++s) v.values[s] += r.values[s];
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace

std::vector<AlphaVector> prune_vectors(std::vector<AlphaVector> candidates, double tolerance) {
  std::vector<AlphaVector> pending = remove_dominated(std::move(candidates));
  if (pending.size() <= 1) return pending;
  const std::size_t n = pending.front().values.size();

  std::vector<AlphaVector> frontier;
  auto take_best_at = [&](const std::vector<double>& b) {
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const double v = dot(pending[i].values, b);
      if (v > best_value + 1e-15 ||
          (std::abs(v - best_value) <= 1e-15 && lexicographically_greater(pending[i], pending[best]))) {
        best = i;
        best_value = v;
      }
    }
    frontier.push_back(std::move(pending[best]));
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
  };
  for (std::size_t s = 0; s < n && !pending.empty(); ++s) {
    std::vector<double> corner(n, 0.0);
    corner[s] = 1.0;
    take_best_at(corner);
  }
  while (!pending.empty()) {
    const Witness w = find_witness(pending.back(), frontier);
    if (w.margin <= tolerance) {
      pending.pop_back();
    } else {
      take_best_at(w.belief);
    }
  }
  return frontier;
}

AlphaVectorSet exact_value_iteration_oracle(const FlatModel& m, double horizon_epsilon, const OracleLimits& limits) {
  if (m.num_states > limits.max_states || m.num_actions > limits.max_actions ||
      m.num_observations > limits.max_observations) {
    throw ModelTooLarge("oracle is limited to " + std::to_string(limits.max_states) + " states, " +
                        std::to_string(limits.max_actions) + " actions and " +
                        std::to_string(limits.max_observations) + " observations");
  }
  const double gamma = m.discount;
  const double low = std::min(0.0, min_reward(m)) / (1.0 - gamma);
  const double high = std::max(0.0, max_reward(m)) / (1.0 - gamma);
  const double spread = high - low;

  // Terminal states hold value 0 under both V* and the initial guess, so the
  // truncation error shrinks by gamma times the largest probability of
  // staying out of the terminal set.
  double survive = 0.0;
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    if (m.is_terminal(s)) continue;
    for (std::uint32_t a = 0; a < m.num_actions; ++a) {
      double mass = 0.0;
      for (const auto& t : m.transitions(s, a)) {
        if (!m.is_terminal(t.index)) mass += t.value;
      }
      survive = std::max(survive, std::min(1.0, mass));
    }
  }
  // Half of the budget goes to truncation. The other half absorbs pruning:
  // a sweep prunes 2|Z| times, each dropping at most delta, and the loss
  // compounds to (2|Z| delta) / (1 - c).
  const double contraction = gamma * survive;
  const double delta = 0.5 * horizon_epsilon * (1.0 - contraction) / (2.0 * m.num_observations);
  std::size_t horizon = 1;
  for (double err = spread * contraction; err > 0.5 * horizon_epsilon; err *= contraction) ++horizon;

  AlphaVector start{std::vector<double>(m.num_states, low), 0};
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    if (m.is_terminal(s)) start.values[s] = 0.0;
  }
  std::vector<AlphaVector> gamma_set{start};
  const double share = 1.0 / m.num_observations;

  for (std::size_t h = 0; h < horizon; ++h) {
    std::vector<AlphaVector> next;
    for (std::uint32_t a = 0; a < m.num_actions; ++a) {
      std::vector<AlphaVector> acc;
      for (std::uint32_t z = 0; z < m.num_observations; ++z) {
        std::vector<AlphaVector> projected;
        projected.reserve(gamma_set.size());
        for (const auto& alpha : gamma_set) {
          AlphaVector g{std::vector<double>(m.num_states, 0.0), a};
          for (std::uint32_t s = 0; s < m.num_states; ++s) {
            double future = 0.0;
            for (const auto& t : m.transitions(s, a)) {
              future += t.value * m.observation.at(static_cast<std::size_t>(a) * m.num_states + t.index, z) *
                        alpha.values[t.index];
            }
            g.values[s] = m.reward_of(s, a) * share + gamma * future;
          }
          projected.push_back(std::move(g));
        }
        projected = prune_vectors(std::move(projected), delta);
        acc = acc.empty() ? std::move(projected) : prune_vectors(cross_sum(acc, projected), delta);
      }
      for (auto& v : acc) {
        v.action = a;
        next.push_back(std::move(v));
      }
    }
    gamma_set = prune_vectors(std::move(next), delta);
  }
  return AlphaVectorSet{std::move(gamma_set)};
}

double oracle_q_value(const FlatModel& m, const AlphaVectorSet& value, const Belief& b, std::uint32_t a) {
  double q = belief_reward(m, b, a);
  for (std::uint32_t z = 0; z < m.num_observations; ++z) {
    const double p = obs_prob(m, b, a, z);
    if (p <= kImpossibleObservation) continue;
    const auto next = belief_update(m, b, a, z);
    q += m.discount * next.obs_prob * value_of_belief(value, next.belief.probs).value;
  }
  return q;
}

}  // namespace fhhop
