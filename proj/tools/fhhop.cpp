// fhhop: generate, validate and benchmark models from the command line.
//
// Exit codes: 0 success, 1 invalid input or model, 2 I/O failure,
// 3 internal invariant violation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fhhop/bounds.hpp"
#include "fhhop/domains.hpp"
#include "fhhop/errors.hpp"
#include "fhhop/harness.hpp"
#include "fhhop/model_io.hpp"
#include "json.hpp"

using namespace fhhop;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

struct RunFlags {
  std::string model;
  std::string strategy = "fhhop";
  double tau = 0.1;
  double eps = 0.0;
  std::size_t episodes = 1;
  std::size_t max_steps = 100;
  std::uint64_t seed = 1;
  std::size_t deterministic_expansions = 0;
  std::string report = "text";
  std::string bounds_cache;
  std::string output;
  std::size_t jobs = 1;
  bool profile = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_model) {
  if (with_model) cmd->add_option("--model", f.model, "Model file or domain name (tag, rocksample_7_8, ...)")->required();
  cmd->add_option("--strategy", f.strategy, "fhhop or aems2")->check(CLI::IsMember({"fhhop", "aems2"}));
  cmd->add_option("--tau", f.tau, "Planning time per step in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--eps", f.eps, "Target root gap")->check(CLI::NonNegativeNumber);
  cmd->add_option("--episodes", f.episodes, "Episode count")->check(CLI::PositiveNumber);
  cmd->add_option("--max-steps", f.max_steps, "Step cap per episode")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Base seed; episode i uses seed + i");
  cmd->add_option("--deterministic-expansions", f.deterministic_expansions,
                  "Fixed expansions per step instead of a time budget");
  cmd->add_option("--report", f.report, "json or text")->check(CLI::IsMember({"json", "text"}));
  cmd->add_option("--bounds-cache", f.bounds_cache, "Bounds cache file (directory for bench)");
  cmd->add_option("--output", f.output, "Write the report here instead of stdout");
  cmd->add_option("--jobs", f.jobs, "Episodes run in parallel")->check(CLI::PositiveNumber);
}

SearchConfig search_config(const RunFlags& f) {
  SearchConfig c;
  c.tau = f.tau;
  c.epsilon = f.eps;
  c.max_episode_steps = f.max_steps;
  c.strategy = parse_strategy(f.strategy);
  c.deterministic_expansions = f.deterministic_expansions;
  return c;
}

void emit(const RunFlags& f, const std::string& text) {
  if (f.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(f.output, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + f.output);
}

std::vector<Cell> parse_rocks(const std::string& text) {
  std::vector<Cell> rocks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    int x = 0, y = 0;
    char comma = 0;
    std::stringstream cell(item);
    if (!(cell >> x >> comma >> y) || comma != ',') throw InvalidSpec("bad rock coordinate '" + item + "' (want x,y)");
    rocks.push_back({x, y});
  }
  return rocks;
}

std::string dimensions(const FactoredModel& m) {
  return "S=" + std::to_string(count_reachable_states(m)) + " X=" + std::to_string(m.num_x) +
         " Y=" + std::to_string(m.num_y) + " A=" + std::to_string(m.num_actions) +
         " Z=" + std::to_string(m.num_observations);
}

struct GenFlags {
  std::string family;
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  std::string rocks;
  std::uint64_t seed = 0;
  double discount = 0.95;
  double half_distance = 20.0;
  std::string out;
};

int run_gen(const GenFlags& g) {
  DomainSpec spec;
  if (g.family == "tag") {
    spec.family = DomainFamily::Tag;
  } else if (g.family == "rocksample" || g.family == "fvrs") {
    spec.family = g.family == "fvrs" ? DomainFamily::Fvrs : DomainFamily::RockSample;
    spec.n = g.n;
    spec.k = g.k;
  } else {
    spec = parse_domain_name(g.family);
  }
  if (!g.rocks.empty()) {
    spec.rocks = parse_rocks(g.rocks);
    spec.k = static_cast<std::uint32_t>(spec.rocks.size());
  }
  spec.seed = g.seed;
  spec.discount = g.discount;
  spec.sensor_half_distance = g.half_distance;
  ModelDocument doc;
  doc.name = domain_name(spec);
  doc.payload = make_domain(spec);
  if (spec.family != DomainFamily::Tag) {
    std::string layout;
    for (const Cell& c : resolve_rocks(spec)) {
      layout += (layout.empty() ? "" : ";") + std::to_string(c.x) + "," + std::to_string(c.y);
    }
    doc.metadata["rocks"] = layout;
  }
  const std::string path = g.out.empty() ? doc.name + ".fmomdp" : g.out;
  save_document(path, doc);
  std::cout << "wrote " << path << "  " << dimensions(doc.factored()) << "\n";
  return 0;
}

int run_validate(const std::string& path) {
  const ModelDocument doc = load_document(path);
  const FactoredModel m = as_factored(doc);
  std::cout << "ok  " << path << "  " << (doc.kind() == ModelKind::Flat ? "flat" : "factored") << "  "
            << dimensions(m) << "\n";
  return 0;
}

int run_solve(const RunFlags& f) {
  const ModelDocument doc = load_model_source(f.model);
  const FactoredModel m = as_factored(doc);
  const BoundFunctions b = bounds_for(doc, m, f.bounds_cache);
  const SearchConfig c = search_config(f);
  if (f.episodes == 1) {
    const EpisodeResult e = simulate_episode(m, b, c, f.seed, f.profile);
    emit(f, f.report == "json" ? episode_json(e, c, f.seed) : episode_text(e, c, f.seed));
    return 0;
  }
  const BenchmarkReport r = evaluate(m, b, c, EvaluateOptions{f.episodes, f.seed, f.jobs, f.profile}, doc.name);
  emit(f, f.report == "json" ? report_json(r) : report_text(r));
  return 0;
}

int run_profile(const RunFlags& f, bool flat) {
  const ModelDocument doc = load_model_source(f.model);
  FactoredModel m = as_factored(doc);
  std::string name = doc.name;
  if (flat) {
    m = from_flat(to_flat(m));
    name = "flat(" + name + ")";
  }
  const BoundFunctions b = f.bounds_cache.empty() || flat ? compute_bounds(m) : bounds_for(doc, m, f.bounds_cache);
  SearchConfig c = search_config(f);
  const ProfileFractions p = profile_run(m, b, c, f.episodes, f.seed);
  if (f.report == "json") {
    nlohmann::ordered_json j{{"schema", "fhhop-profile/1"},
                             {"model", name},
                             {"strategy", f.strategy},
                             {"episodes", f.episodes},
                             {"planning_seconds", p.total_seconds},
                             {"belief_update", p.belief_update},
                             {"observation_probability", p.observation_probability},
                             {"value_evaluation", p.value_evaluation},
                             {"other", p.other}};
    emit(f, j.dump(2) + "\n");
    return 0;
  }
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "model               %s\nstrategy            %s\nplanning time       %.3f s\n"
                "belief update       %5.1f %%\nobs probability     %5.1f %%\nvalue evaluation    %5.1f %%\n"
                "other               %5.1f %%\n",
                name.c_str(), f.strategy.c_str(), p.total_seconds, 100.0 * p.belief_update,
                100.0 * p.observation_probability, 100.0 * p.value_evaluation, 100.0 * p.other);
  emit(f, buf);
  return 0;
}

int run_bench(const RunFlags& f, std::vector<std::string> domains, std::vector<std::string> strategies) {
  if (domains.empty()) domains = {"tag", "rocksample_7_8", "fvrs_5_5"};
  if (strategies.empty()) strategies = {"fhhop", "aems2"};
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  std::string table;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %8s %4s %5s  %-9s %18s %18s %14s\n", "Domain", "|S|", "|A|", "|Z|",
                "Algorithm", "Reward", "Online Time tau", "Offline Time");
  table += line;
  for (const auto& source : domains) {
    const ModelDocument doc = load_model_source(source);
    const FactoredModel m = as_factored(doc);
    std::string cache;
    if (!f.bounds_cache.empty()) {
      std::filesystem::create_directories(f.bounds_cache);
      cache = (std::filesystem::path(f.bounds_cache) / (doc.name + ".bounds.json")).string();
    }
    const BoundFunctions b = bounds_for(doc, m, cache);
    const std::size_t states = count_reachable_states(m);
    for (const auto& s : strategies) {
      RunFlags g = f;
      g.strategy = s;
      const SearchConfig c = search_config(g);
      const std::size_t episodes = std::max<std::size_t>(f.episodes, 2);
      const BenchmarkReport r = evaluate(m, b, c, EvaluateOptions{episodes, f.seed, f.jobs, false}, doc.name);
      all.push_back(nlohmann::ordered_json::parse(report_json(r)));
      char reward[64], online[64], offline[64];
      std::snprintf(reward, sizeof reward, "%.2f +/- %.2f", r.mean, r.half_width);
      if (c.deterministic_expansions > 0) {
        std::snprintf(online, sizeof online, "%zu exp", c.deterministic_expansions);
        std::snprintf(offline, sizeof offline, "-");
      } else {
        std::snprintf(online, sizeof online, "%.2f", c.tau);
        std::snprintf(offline, sizeof offline, "%.2f", b.offline_seconds);
      }
      std::snprintf(line, sizeof line, "%-18s %8zu %4u %5u  %-9s %18s %18s %14s\n", doc.name.c_str(), states,
                    m.num_actions, m.num_observations, s.c_str(), reward, online, offline);
      table += line;
      if (f.report == "text" && f.output.empty()) std::cerr << line << std::flush;
    }
  }
  emit(f, f.report == "json" ? all.dump(2) + "\n" : table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online POMDP planning with hybrid heuristic search"};
  app.require_subcommand(1);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a domain model file");
  gen_cmd->add_option("family", gen.family, "tag, rocksample, fvrs, or a full name like rocksample_7_8")->required();
  gen_cmd->add_option("--n", gen.n, "Grid size");
  gen_cmd->add_option("--k", gen.k, "Rock count");
  gen_cmd->add_option("--rocks", gen.rocks, "Rock cells as x,y;x,y;...");
  gen_cmd->add_option("--seed", gen.seed, "Seed for rock placement when no layout is given");
  gen_cmd->add_option("--discount", gen.discount, "Discount factor");
  gen_cmd->add_option("--sensor-half-distance", gen.half_distance, "Distance at which sensor accuracy is 0.75");
  gen_cmd->add_option("--out", gen.out, "Output path");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a model file");
  validate_cmd->add_option("--model,model", validate_path, "Model file")->required();

  RunFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run one episode, or evaluate several");
  add_run_flags(solve_cmd, solve, true);
  solve_cmd->add_flag("--profile", solve.profile, "Attribute planning time to primitive families");

  RunFlags bench;
  bench.episodes = 500;
  std::vector<std::string> bench_domains, bench_strategies;
  auto* bench_cmd = app.add_subcommand("bench", "Reward table over domains and strategies");
  add_run_flags(bench_cmd, bench, false);
  bench_cmd->add_option("--domain", bench_domains, "Domain name or model file; repeatable");
  bench_cmd->add_option("--strategies", bench_strategies, "Strategies to compare")
      ->check(CLI::IsMember({"fhhop", "aems2"}));

  RunFlags prof;
  prof.strategy = "aems2";
  prof.episodes = 3;
  bool flat = false;
  auto* prof_cmd = app.add_subcommand("profile", "Planning-time breakdown by primitive family");
  add_run_flags(prof_cmd, prof, true);
  prof_cmd->add_flag("--flat", flat, "Plan on the flattened model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*validate_cmd) return run_validate(validate_path);
    if (*solve_cmd) return run_solve(solve);
    if (*bench_cmd) return run_bench(bench, bench_domains, bench_strategies);
    if (*prof_cmd) return run_profile(prof, flat);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: invalid model: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const InvalidSpec& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ModelTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
