#include "fhhop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "fhhop/domains.hpp"
#include "fhhop/errors.hpp"
#include "json.hpp"

namespace fhhop {
namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t sample_entry(std::span<const SparseEntry> row, double u) {
  double cumulative = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    cumulative += row[k].value;
    if (u < cumulative) return k;
  }
  return row.size() - 1;
}

bool deterministic(const SearchConfig& c) { return c.deterministic_expansions > 0; }

Json timing(bool hide, double value) { return hide ? Json(nullptr) : Json(value); }

Json profile_json(const std::optional<ProfileFractions>& p) {
  if (!p) return nullptr;
  return Json{{"belief_update", p->belief_update},
              {"observation_probability", p->observation_probability},
              {"value_evaluation", p->value_evaluation},
              {"other", p->other},
              {"planning_seconds", p->total_seconds}};
}

}  // namespace

std::string to_string(EpisodeEnd end) { return end == EpisodeEnd::Goal ? "goal" : "step-cap"; }

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::size_t sample_index(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last = i;
    if (u < cumulative) return i;
  }
  return last;
}

EpisodeResult simulate_episode(const FactoredModel& model, const BoundFunctions& bounds, const SearchConfig& config,
                               std::uint64_t seed, bool profile) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  auto x = static_cast<std::uint32_t>(sample_index(model.initial_x, uniform01(rng)));
  auto y = static_cast<std::uint32_t>(sample_index(model.initial_y, uniform01(rng)));

  Profiler profiler;
  EpisodeResult out;
  const auto built = Clock::now();
  SearchTree tree(model, bounds, FactoredBelief{x, model.initial_y}, config.strategy, profile ? &profiler : nullptr);
  out.planning_seconds += seconds_since(built);
  double weight = 1.0;
  // Pruning the tree after an observation delays the next decision, so its
  // wall time is charged to the budget of the step it precedes.
  double carry = 0.0;
  for (;;) {
    if (model.is_terminal(x, y)) {
      out.end = EpisodeEnd::Goal;
      break;
    }
    if (out.steps >= config.max_episode_steps) {
      out.end = EpisodeEnd::StepCap;
      break;
    }
    SearchConfig step_config = config;
    step_config.tau = std::max(0.0, config.tau - carry);
    const SearchResult r = search(tree, step_config);
    StepRecord step;
    step.action = r.action;
    step.expansions = r.expansions;
    step.n_u = r.hybrid.n_u;
    step.n_l = r.hybrid.n_l;
    step.root_lower = tree.node(tree.root()).lower;
    step.root_upper = tree.node(tree.root()).upper;
    step.seconds = carry + r.seconds;
    step.reward = model.reward_of(x, y, r.action);
    out.discounted_return += weight * step.reward;
    weight *= model.discount;

    const auto next_x = model.next_x(x, y, r.action);
    const std::size_t k = sample_entry(next_x, uniform01(rng));
    const auto next_y = model.next_y(x, y, r.action, k);
    const std::uint32_t nx = next_x[k].index;
    const std::uint32_t ny = next_y[sample_entry(next_y, uniform01(rng))].index;
    const auto obs = model.observations(r.action, nx, ny);
    const std::uint32_t z = obs[sample_entry(obs, uniform01(rng))].index;
    const ObservationEvent event =
        model.x_observability == XObservability::Direct ? ObservationEvent{nx, z} : model.decode(z);
    const auto advance = Clock::now();
    tree.advance_root(r.action, event);
    carry = seconds_since(advance);
    out.planning_seconds += step.seconds;
    out.trace.push_back(step);
    x = nx;
    y = ny;
    ++out.steps;
  }
  out.planning_seconds += carry;
  out.profile = profiler.totals();
  return out;
}

ProfileFractions fractions(const ProfileTotals& totals, double planning_seconds) {
  ProfileFractions f;
  f.total_seconds = planning_seconds;
  if (planning_seconds <= 0.0) return f;
  auto share = [&](PrimitiveFamily fam) {
    return std::clamp(totals.seconds[static_cast<std::size_t>(fam)] / planning_seconds, 0.0, 1.0);
  };
  f.belief_update = share(PrimitiveFamily::BeliefUpdate);
  f.observation_probability = share(PrimitiveFamily::ObservationProbability);
  f.value_evaluation = share(PrimitiveFamily::ValueEvaluation);
  const double used = f.instrumented();
  if (used > 1.0) {
    f.belief_update /= used;
    f.observation_probability /= used;
    f.value_evaluation /= used;
  }
  f.other = std::max(0.0, 1.0 - f.instrumented());
  return f;
}

SampleStats sample_stats(std::span<const double> values) {
  SampleStats s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.half_width = 1.96 * s.stddev / std::sqrt(static_cast<double>(values.size()));
  return s;
}

BenchmarkReport evaluate(const FactoredModel& model, const BoundFunctions& bounds, const SearchConfig& config,
                         const EvaluateOptions& options, const std::string& model_name) {
  if (options.episodes < 2) throw InvalidSpec("evaluate needs at least 2 episodes");
  std::vector<EpisodeResult> results(options.episodes);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < options.episodes;) {
      try {
        results[i] = simulate_episode(model, bounds, config, options.base_seed + i, options.profile);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = options.episodes;
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, options.episodes);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  BenchmarkReport r;
  r.model_name = model_name;
  r.states = count_reachable_states(model);
  r.num_x = model.num_x;
  r.num_y = model.num_y;
  r.num_actions = model.num_actions;
  r.num_observations = model.num_observations;
  r.config = config;
  r.base_seed = options.base_seed;
  r.episodes = options.episodes;
  r.offline_seconds = bounds.offline_seconds;
  std::vector<double> returns;
  ProfileTotals totals;
  double planning = 0.0;
  std::size_t steps = 0;
  for (const auto& e : results) {
    returns.push_back(e.discounted_return);
    EpisodeSummary s{e.discounted_return, e.steps, e.end, 0, 0, 0};
    for (const auto& st : e.trace) {
      s.n_u += st.n_u;
      s.n_l += st.n_l;
      s.expansions += st.expansions;
    }
    r.per_episode.push_back(s);
    totals += e.profile;
    planning += e.planning_seconds;
    steps += e.steps;
  }
  const SampleStats stats = sample_stats(returns);
  r.mean = stats.mean;
  r.stddev = stats.stddev;
  r.half_width = stats.half_width;
  r.mean_step_seconds = steps > 0 ? planning / static_cast<double>(steps) : 0.0;
  if (options.profile) r.profile = fractions(totals, planning);
  return r;
}

ProfileFractions profile_run(const FactoredModel& model, const BoundFunctions& bounds, const SearchConfig& config,
                             std::size_t episodes, std::uint64_t base_seed) {
  ProfileTotals totals;
  double planning = 0.0;
  for (std::size_t i = 0; i < episodes; ++i) {
    const EpisodeResult e = simulate_episode(model, bounds, config, base_seed + i, true);
    totals += e.profile;
    planning += e.planning_seconds;
  }
  return fractions(totals, planning);
}

std::string report_json(const BenchmarkReport& r) {
  const bool hide = deterministic(r.config);
  std::size_t goals = 0, steps = 0, expansions = 0;
  std::uint64_t n_u = 0, n_l = 0;
  Json episodes = Json::array();
  for (const auto& e : r.per_episode) {
    goals += e.end == EpisodeEnd::Goal;
    steps += e.steps;
    expansions += e.expansions;
    n_u += e.n_u;
    n_l += e.n_l;
    episodes.push_back(Json{{"return", e.discounted_return},
                            {"steps", e.steps},
                            {"end", to_string(e.end)},
                            {"expansions", e.expansions},
                            {"n_u", e.n_u},
                            {"n_l", e.n_l}});
  }
  const double n = r.per_episode.empty() ? 1.0 : static_cast<double>(r.per_episode.size());
  Json j;
  j["schema"] = kReportSchema;
  j["model"] = Json{{"name", r.model_name},
                    {"states", r.states},
                    {"x", r.num_x},
                    {"y", r.num_y},
                    {"actions", r.num_actions},
                    {"observations", r.num_observations}};
  j["config"] = Json{{"strategy", to_string(r.config.strategy)},
                     {"tau", timing(hide, r.config.tau)},
                     {"epsilon", r.config.epsilon},
                     {"max_steps", r.config.max_episode_steps},
                     {"deterministic_expansions", r.config.deterministic_expansions},
                     {"episodes", r.episodes},
                     {"base_seed", r.base_seed}};
  j["reward"] = Json{{"mean", r.mean}, {"stddev", r.stddev}, {"half_width", r.half_width}};
  j["outcomes"] = Json{{"goal", goals},
                       {"step_cap", r.per_episode.size() - goals},
                       {"mean_steps", static_cast<double>(steps) / n}};
  j["attribution"] = Json{{"expansions", expansions}, {"n_u", n_u}, {"n_l", n_l}};
  j["offline_seconds"] = timing(hide, r.offline_seconds);
  j["mean_step_seconds"] = timing(hide, r.mean_step_seconds);
  j["profile"] = hide ? Json(nullptr) : profile_json(r.profile);
  j["episodes"] = std::move(episodes);
  return j.dump(2) + "\n";
}

std::string report_text(const BenchmarkReport& r) {
  const bool hide = deterministic(r.config);
  std::string out;
  char line[256];
  auto add = [&](const char* key, const std::string& value) {
    std::snprintf(line, sizeof line, "%-20s %s\n", key, value.c_str());
    out += line;
  };
  auto num = [](double v, const char* fmt = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  add("model", r.model_name);
  add("dimensions", "S=" + std::to_string(r.states) + " X=" + std::to_string(r.num_x) + " Y=" +
                        std::to_string(r.num_y) + " A=" + std::to_string(r.num_actions) +
                        " Z=" + std::to_string(r.num_observations));
  add("strategy", to_string(r.config.strategy));
  add("budget", hide ? std::to_string(r.config.deterministic_expansions) + " expansions/step"
                     : num(r.config.tau, "%.3f") + " s/step");
  add("epsilon", num(r.config.epsilon, "%g"));
  add("episodes", std::to_string(r.episodes));
  add("reward", num(r.mean) + " +/- " + num(r.half_width) + "  (sd " + num(r.stddev) + ")");
  std::size_t goals = 0;
  for (const auto& e : r.per_episode) goals += e.end == EpisodeEnd::Goal;
  add("goal / step-cap", std::to_string(goals) + " / " + std::to_string(r.per_episode.size() - goals));
  if (!hide) {
    add("offline time", num(r.offline_seconds, "%.3f") + " s");
    add("mean step time", num(r.mean_step_seconds, "%.4f") + " s");
  }
  if (r.profile && !hide) {
    add("belief update", num(100.0 * r.profile->belief_update, "%.1f") + " %");
    add("obs probability", num(100.0 * r.profile->observation_probability, "%.1f") + " %");
    add("value evaluation", num(100.0 * r.profile->value_evaluation, "%.1f") + " %");
    add("other", num(100.0 * r.profile->other, "%.1f") + " %");
  }
  return out;
}

std::string episode_json(const EpisodeResult& e, const SearchConfig& config, std::uint64_t seed) {
  const bool hide = deterministic(config);
  Json steps = Json::array();
  for (const auto& s : e.trace) {
    steps.push_back(Json{{"action", s.action},
                         {"reward", s.reward},
                         {"expansions", s.expansions},
                         {"n_u", s.n_u},
                         {"n_l", s.n_l},
                         {"root_lower", s.root_lower},
                         {"root_upper", s.root_upper},
                         {"seconds", timing(hide, s.seconds)}});
  }
  Json j;
  j["schema"] = "fhhop-episode/1";
  j["strategy"] = to_string(config.strategy);
  j["seed"] = seed;
  j["return"] = e.discounted_return;
  j["steps"] = e.steps;
  j["end"] = to_string(e.end);
  j["trace"] = std::move(steps);
  return j.dump(2) + "\n";
}

std::string episode_text(const EpisodeResult& e, const SearchConfig& config, std::uint64_t seed) {
  const bool hide = deterministic(config);
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "seed %llu  strategy %s  return %.4f  steps %zu  end %s\n",
                static_cast<unsigned long long>(seed), to_string(config.strategy).c_str(), e.discounted_return,
                e.steps, to_string(e.end).c_str());
  out += line;
  out += "  step  action    reward  expansions    n_u    n_l        lower        upper\n";
  for (std::size_t t = 0; t < e.trace.size(); ++t) {
    const auto& s = e.trace[t];
    std::snprintf(line, sizeof line, "  %4zu  %6u  %8.3f  %10zu  %5llu  %5llu  %11.4f  %11.4f", t, s.action,
                  s.reward, s.expansions, static_cast<unsigned long long>(s.n_u),
                  static_cast<unsigned long long>(s.n_l), s.root_lower, s.root_upper);
    out += line;
    if (!hide) {
      std::snprintf(line, sizeof line, "  %.4fs", s.seconds);
      out += line;
    }
    out += "\n";
  }
  return out;
}

ModelDocument load_model_source(const std::string& source) {
  if (std::filesystem::exists(source)) return load_document(source);
  DomainSpec spec;
  try {
    spec = parse_domain_name(source);
  } catch (const InvalidSpec&) {
    throw IoError("'" + source + "' is neither a readable model file nor a domain name");
  }
  ModelDocument doc;
  doc.name = domain_name(spec);
  doc.payload = make_domain(spec);
  return doc;
}

BoundFunctions bounds_for(const ModelDocument& document, const FactoredModel& model, const std::string& cache_path) {
  if (cache_path.empty()) return compute_bounds(model);
  const std::uint64_t hash = content_hash(document);
  if (auto cached = load_bounds_cache(cache_path, hash)) return std::move(*cached);
  BoundFunctions b = compute_bounds(model);
  save_bounds_cache(cache_path, hash, b);
  return b;
}

}  // namespace fhhop
