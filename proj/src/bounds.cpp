#include "fhhop/bounds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "fhhop/errors.hpp"
#include "json.hpp"

namespace fhhop {
namespace {

using Json = nlohmann::json;

bool has_terminal(const FlatModel& m) {
  return std::any_of(m.terminal.begin(), m.terminal.end(), [](std::uint8_t t) { return t != 0; });
}

// Constant start points on the safe side of the fixed point. Terminal states
// are pinned to 0, so with terminals present the range must include 0.
double lower_start(const FlatModel& m) {
  const double r = has_terminal(m) ? std::min(0.0, min_reward(m)) : min_reward(m);
  return r / (1.0 - m.discount);
}

double upper_start(const FlatModel& m) {
  const double r = has_terminal(m) ? std::max(0.0, max_reward(m)) : max_reward(m);
  return r / (1.0 - m.discount);
}

// q is laid out s*|A| + a.
std::vector<double> initial_table(const FlatModel& m, double value) {
  std::vector<double> q(static_cast<std::size_t>(m.num_states) * m.num_actions, value);
  for (std::uint32_t s = 0; s < m.num_states; ++s) {
    if (!m.is_terminal(s)) continue;
    std::fill_n(q.begin() + static_cast<std::ptrdiff_t>(s) * m.num_actions, m.num_actions, 0.0);
  }
  return q;
}

template <typename Sweep>
std::vector<double> solve(std::vector<double> q, const BoundOptions& options, const char* what,
                          SolveTrace* trace, Sweep sweep) {
  std::vector<double> next(q.size());
  double residual = 0.0;
  for (std::size_t k = 0; k < options.max_sweeps; ++k) {
    sweep(q, next);
    residual = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) residual = std::max(residual, std::abs(next[i] - q[i]));
    q.swap(next);
    if (trace != nullptr) trace->residuals.push_back(residual);
    if (residual <= options.tolerance) return q;
  }
  if (residual > options.failure_residual) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: residual %.3g after %zu sweeps", what, residual, options.max_sweeps);
    throw ConvergenceFailure(buf);
  }
  return q;
}

AlphaVectorSet to_vectors(const FlatModel& m, const std::vector<double>& q) {
  AlphaVectorSet out;
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    AlphaVector v{std::vector<double>(m.num_states), a};
    for (std::uint32_t s = 0; s < m.num_states; ++s) v.values[s] = q[static_cast<std::size_t>(s) * m.num_actions + a];
    out.vectors.push_back(std::move(v));
  }
  return out;
}

Json vectors_to_json(const FactoredAlphaSet& set) {
  Json per_x = Json::array();
  for (const auto& vs : set.per_x) {
    Json list = Json::array();
    for (const auto& v : vs) list.push_back(Json{{"action", v.action}, {"values", v.values}});
    per_x.push_back(std::move(list));
  }
  return per_x;
}

FactoredAlphaSet vectors_from_json(const Json& j) {
  FactoredAlphaSet set;
  for (const auto& list : j) {
    std::vector<AlphaVector> vs;
    for (const auto& v : list) vs.push_back(AlphaVector{v.at("values").get<std::vector<double>>(), v.at("action").get<std::uint32_t>()});
    set.per_x.push_back(std::move(vs));
  }
  return set;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

constexpr const char* kCacheSchema = "fhhop-bounds/1";

}  // namespace

AlphaVectorSet blind_vectors(const FlatModel& m, const BoundOptions& options, SolveTrace* trace) {
  const std::uint32_t na = m.num_actions;
  auto sweep = [&](const std::vector<double>& q, std::vector<double>& next) {
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
      for (std::uint32_t a = 0; a < na; ++a) {
        const std::size_t i = static_cast<std::size_t>(s) * na + a;
        if (m.is_terminal(s)) {
          next[i] = 0.0;
          continue;
        }
        double future = 0.0;
        for (const auto& e : m.transitions(s, a)) future += e.value * q[static_cast<std::size_t>(e.index) * na + a];
        next[i] = m.reward_of(s, a) + m.discount * future;
      }
    }
  };
  return to_vectors(m, solve(initial_table(m, lower_start(m)), options, "blind bound", trace, sweep));
}

AlphaVectorSet fib_vectors(const FlatModel& m, const BoundOptions& options, SolveTrace* trace) {
  const std::uint32_t na = m.num_actions;
  std::vector<double> acc(static_cast<std::size_t>(m.num_observations) * na, 0.0);
  std::vector<std::uint8_t> seen(m.num_observations, 0);
  std::vector<std::uint32_t> touched;
  auto sweep = [&](const std::vector<double>& q, std::vector<double>& next) {
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
      for (std::uint32_t a = 0; a < na; ++a) {
        const std::size_t i = static_cast<std::size_t>(s) * na + a;
        if (m.is_terminal(s)) {
          next[i] = 0.0;
          continue;
        }
        touched.clear();
        for (const auto& t : m.transitions(s, a)) {
          const double* qs = &q[static_cast<std::size_t>(t.index) * na];
          for (const auto& o : m.observations(a, t.index)) {
            if (!seen[o.index]) {
              seen[o.index] = 1;
              touched.push_back(o.index);
            }
            const double w = t.value * o.value;
            double* row = &acc[static_cast<std::size_t>(o.index) * na];
            for (std::uint32_t b = 0; b < na; ++b) row[b] += w * qs[b];
          }
        }
        double future = 0.0;
        for (std::uint32_t z : touched) {
          double* row = &acc[static_cast<std::size_t>(z) * na];
          future += *std::max_element(row, row + na);
          std::fill_n(row, na, 0.0);
          seen[z] = 0;
        }
        next[i] = m.reward_of(s, a) + m.discount * future;
      }
    }
  };
  return to_vectors(m, solve(initial_table(m, upper_start(m)), options, "FIB bound", trace, sweep));
}

FactoredAlphaSet project_to_factored(const AlphaVectorSet& joint, const FactoredModel& model) {
  FactoredAlphaSet out;
  out.per_x.resize(model.num_x);
  const std::size_t ny = model.num_y;
  for (std::uint32_t x = 0; x < model.num_x; ++x) {
    out.per_x[x].reserve(joint.vectors.size());
    for (const auto& v : joint.vectors) {
      const auto first = v.values.begin() + static_cast<std::ptrdiff_t>(x * ny);
      out.per_x[x].push_back(AlphaVector{std::vector<double>(first, first + static_cast<std::ptrdiff_t>(ny)), v.action});
    }
  }
  return out;
}

FactoredAlphaSet blind_lower_bound(const FactoredModel& model, const BoundOptions& options) {
  return project_to_factored(blind_vectors(to_flat(model, options.flatten_cap), options), model);
}

FactoredAlphaSet fib_upper_bound(const FactoredModel& model, const BoundOptions& options) {
  return project_to_factored(fib_vectors(to_flat(model, options.flatten_cap), options), model);
}

BoundFunctions compute_bounds(const FactoredModel& model, const BoundOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const FlatModel flat = to_flat(model, options.flatten_cap);
  BoundFunctions out;
  out.lower = project_to_factored(blind_vectors(flat, options, &out.lower_trace), model);
  out.upper = project_to_factored(fib_vectors(flat, options, &out.upper_trace), model);
  out.offline_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::optional<BoundFunctions> load_bounds_cache(const std::filesystem::path& path, std::uint64_t model_hash) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const Json j = Json::parse(in);
    if (j.at("schema") != kCacheSchema || j.at("model_hash") != hex(model_hash)) return std::nullopt;
    BoundFunctions b;
    b.lower = vectors_from_json(j.at("lower"));
    b.upper = vectors_from_json(j.at("upper"));
    b.lower_trace.residuals = j.at("lower_residuals").get<std::vector<double>>();
    b.upper_trace.residuals = j.at("upper_residuals").get<std::vector<double>>();
    b.offline_seconds = j.at("offline_seconds").get<double>();
    return b;
  } catch (const Json::exception&) {
    return std::nullopt;
  }
}

void save_bounds_cache(const std::filesystem::path& path, std::uint64_t model_hash, const BoundFunctions& bounds) {
  Json j;
  j["schema"] = kCacheSchema;
  j["model_hash"] = hex(model_hash);
  j["offline_seconds"] = bounds.offline_seconds;
  j["lower_residuals"] = bounds.lower_trace.residuals;
  j["upper_residuals"] = bounds.upper_trace.residuals;
  j["lower"] = vectors_to_json(bounds.lower);
  j["upper"] = vectors_to_json(bounds.upper);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write bounds cache " + path.string());
  out << j.dump();
  if (!out) throw IoError("failed writing bounds cache " + path.string());
}

}  // namespace fhhop
