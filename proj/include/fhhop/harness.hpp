#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fhhop/bounds.hpp"
#include "fhhop/factored_model.hpp"
#include "fhhop/model_io.hpp"
#include "fhhop/profiler.hpp"
#include "fhhop/search_tree.hpp"

namespace fhhop {

enum class EpisodeEnd : std::uint8_t { Goal, StepCap };

std::string to_string(EpisodeEnd end);

struct StepRecord {
  std::uint32_t action = 0;
  double reward = 0.0;
  std::size_t expansions = 0;
  std::uint64_t n_u = 0;
  std::uint64_t n_l = 0;
  /// Planning wall time: search plus pruning the tree after the previous
  /// observation.
  double seconds = 0.0;
  double root_lower = 0.0;
  double root_upper = 0.0;
};

struct EpisodeResult {
  double discounted_return = 0.0;
  std::size_t steps = 0;
  EpisodeEnd end = EpisodeEnd::StepCap;
  std::vector<StepRecord> trace;
  ProfileTotals profile;
  double planning_seconds = 0.0;
};

/// Samples the hidden start from the initial distributions and runs the
/// plan, act, observe, advance loop until a terminal state or
/// config.max_episode_steps. The environment draws from an mt19937_64 seeded
/// with `seed` alone, so the trajectory depends on the planner only through
/// the actions it returns.
EpisodeResult simulate_episode(const FactoredModel& model, const BoundFunctions& bounds, const SearchConfig& config,
                               std::uint64_t seed, bool profile = false);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(std::mt19937_64& rng);

/// Index of a draw from an explicit distribution; falls back to the last
/// positive entry when rounding leaves the cumulative sum short of u.
std::size_t sample_index(std::span<const double> probs, double u);

struct ProfileFractions {
  double belief_update = 0.0;
  double observation_probability = 0.0;
  double value_evaluation = 0.0;
  double other = 0.0;
  double total_seconds = 0.0;

  double instrumented() const noexcept { return belief_update + observation_probability + value_evaluation; }
};

ProfileFractions fractions(const ProfileTotals& totals, double planning_seconds);

struct EvaluateOptions {
  std::size_t episodes = 500;
  std::uint64_t base_seed = 1;
  /// Worker threads; episodes are independent and results are reduced in
  /// episode order, so the report does not depend on this.
  std::size_t jobs = 1;
  bool profile = false;
};

struct EpisodeSummary {
  double discounted_return = 0.0;
  std::size_t steps = 0;
  EpisodeEnd end = EpisodeEnd::StepCap;
  std::uint64_t n_u = 0;
  std::uint64_t n_l = 0;
  std::size_t expansions = 0;
};

struct BenchmarkReport {
  std::string model_name;
  std::size_t states = 0;
  std::uint32_t num_x = 0;
  std::uint32_t num_y = 0;
  std::uint32_t num_actions = 0;
  std::uint32_t num_observations = 0;
  SearchConfig config;
  std::uint64_t base_seed = 0;
  std::size_t episodes = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double half_width = 0.0;
  double offline_seconds = 0.0;
  double mean_step_seconds = 0.0;
  std::optional<ProfileFractions> profile;
  std::vector<EpisodeSummary> per_episode;
};

/// Episode i uses seed base_seed + i. Throws InvalidSpec for fewer than two
/// episodes.
BenchmarkReport evaluate(const FactoredModel& model, const BoundFunctions& bounds, const SearchConfig& config,
                         const EvaluateOptions& options, const std::string& model_name = "");

/// Planning-time fractions of the three instrumented families over
/// `episodes` episodes.
ProfileFractions profile_run(const FactoredModel& model, const BoundFunctions& bounds, const SearchConfig& config,
                             std::size_t episodes, std::uint64_t base_seed = 1);

struct SampleStats {
  double mean = 0.0;
  double stddev = 0.0;
  double half_width = 0.0;
};

/// Mean, sample standard deviation and 1.96 s / sqrt(n).
SampleStats sample_stats(std::span<const double> values);

inline constexpr const char* kReportSchema = "fhhop-report/1";

/// Wall-clock fields are null in deterministic mode so that equal seeds give
/// byte-identical output.
std::string report_json(const BenchmarkReport& report);
std::string report_text(const BenchmarkReport& report);
std::string episode_json(const EpisodeResult& episode, const SearchConfig& config, std::uint64_t seed);
std::string episode_text(const EpisodeResult& episode, const SearchConfig& config, std::uint64_t seed);

/// A model file path, or a domain name such as tag or rocksample_7_8.
ModelDocument load_model_source(const std::string& source);

/// Reads bounds from `cache_path` when it holds bounds for this document,
/// otherwise computes them and, given a path, writes the cache.
BoundFunctions bounds_for(const ModelDocument& document, const FactoredModel& model, const std::string& cache_path);

}  // namespace fhhop
