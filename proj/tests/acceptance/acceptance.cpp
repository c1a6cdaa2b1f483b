// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any selected criterion fails.
//
//   fhhop_acceptance [--only N] [--cli PATH]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fhhop/bounds.hpp"
#include "fhhop/counted_kernels.hpp"
#include "fhhop/domains.hpp"
#include "fhhop/harness.hpp"
#include "fhhop/heuristics.hpp"
#include "fhhop/model_io.hpp"
#include "fhhop/oracle.hpp"
#include "fhhop/search_tree.hpp"
#include "random_models.hpp"
#include "tree_oracle.hpp"

using namespace fhhop;
using namespace fhhop::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Collects failures; keeps only the first few messages.
struct Tally {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::string first;
  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failures++ < 3) first += (first.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures == 0) return {true, summary + fmt(", %zu checks", checks)};
    return {false, fmt("%zu of %zu checks failed: ", failures, checks) + first};
  }
};

// 1 ---------------------------------------------------------------------

struct Tuple {
  std::string name;
  std::size_t s;
  std::uint32_t x, y, a, z;
};

Outcome dimensions() {
  const std::vector<Tuple> want{{"hallway", 61, 1, 61, 5, 21},
                                {"tag", 870, 30, 29, 5, 30},
                                {"rocksample_7_8", 12545, 50, 256, 13, 2},
                                {"rocksample_10_10", 102401, 101, 1024, 15, 2},
                                {"rocksample_11_11", 247809, 122, 2048, 16, 2},
                                {"fvrs_5_5", 801, 26, 32, 5, 32},
                                {"fvrs_5_7", 3201, 26, 128, 5, 128}};
  Tally t;
  for (const auto& w : want) {
    const std::string source =
        w.name == "hallway" ? std::string(FHHOP_SOURCE_DIR) + "/data/hallway.flatpomdp" : w.name;
    const FactoredModel m = as_factored(load_model_source(source));
    const Tuple got{w.name, count_reachable_states(m), m.num_x, m.num_y, m.num_actions, m.num_observations};
    t.expect(got.s == w.s && got.x == w.x && got.y == w.y && got.a == w.a && got.z == w.z,
             fmt("%s gave (%zu,%u,%u,%u,%u)", w.name.c_str(), got.s, got.x, got.y, got.a, got.z));
  }
  return t.outcome("all 7 size tuples match");
}

// 2 ---------------------------------------------------------------------

Outcome cost_accounting() {
  std::mt19937_64 rng(2);
  Tally t;
  for (std::uint32_t nx : {1u, 2u, 5u, 10u}) {
    for (std::uint32_t ny : {2u, 5u, 10u}) {
      RandomFactoredOptions o;
      o.num_x = nx;
      o.num_y = ny;
      o.observations = 3;
      const FactoredModel m = random_factored_model(rng, o);
      const FlatModel f = to_flat(m);
      const DenseFactoredTables ft(m);
      const DenseFlatTables dt(f);
      const std::uint64_t X = nx, Y = ny;
      const FactoredBelief fb{0, random_distribution(rng, ny)};
      const Belief b = embed_belief(m, fb);
      const ObservationEvent event = successors(m, fb, 0).front().event;
      const std::uint32_t z = flat_observation_index(m, event);

      MulCounter fu, gu, fo, go, fv, gv;
      counted::belief_update(dt, b, 0, z, fu);
      counted::factored_belief_update(ft, fb, 0, event, gu);
      counted::obs_prob(dt, b, 0, z, fo);
      counted::factored_obs_prob(ft, fb, 0, event, go);

      const std::size_t gamma = 4;
      AlphaVectorSet joint;
      FactoredAlphaSet sliced;
      sliced.per_x.resize(nx);
      for (std::size_t i = 0; i < gamma; ++i) {
        AlphaVector v{random_distribution(rng, X * Y), 0};
        for (std::uint32_t x = 0; x < nx; ++x) {
          sliced.per_x[x].push_back({std::vector<double>(v.values.begin() + x * ny, v.values.begin() + (x + 1) * ny), 0});
        }
        joint.vectors.push_back(std::move(v));
      }
      counted::value_of_belief(joint, b, fv);
      counted::factored_value(sliced, fb, gv);

      const auto cell = fmt("(|X|=%u,|Y|=%u)", nx, ny);
      t.expect(fu.count == X * X * Y * Y + 2 * X * Y, cell + " flat update");
      t.expect(gu.count == 2 * Y * Y + 2 * Y, cell + " factored update");
      t.expect(fo.count == X * X * Y * Y, cell + " flat obs prob");
      t.expect(go.count == 2 * Y * Y, cell + " factored obs prob");
      t.expect(fv.count == gamma * X * Y, cell + " flat value");
      t.expect(gv.count == sliced.per_x[0].size() * Y, cell + " factored value");
    }
  }
  return t.outcome("12 dimension pairs, 6 counters each");
}

// 3 ---------------------------------------------------------------------

constexpr double kEquivalenceTolerance = 1e-9;

Outcome flat_factored_equivalence() {
  Tally t;
  double worst_belief = 0.0, worst_bound = 0.0;
  for (const std::string name : {"tag", "fvrs_5_5"}) {
    const FactoredModel m = make_domain(parse_domain_name(name));
    const FlatModel f = to_flat(m);
    const BoundFunctions fb = compute_bounds(m);
    const AlphaVectorSet lower = blind_vectors(f);
    const AlphaVectorSet upper = fib_vectors(f);
    std::mt19937_64 rng(name == "tag" ? 31 : 37);
    for (int seq = 0; seq < 100; ++seq) {
      std::uint32_t x0 = 0;
      while (m.initial_x[x0] <= 0.0) ++x0;
      x0 += static_cast<std::uint32_t>(rng() % 3);
      if (x0 >= m.num_x || m.initial_x[x0] <= 0.0 || m.terminal_x[x0]) x0 = 0;
      FactoredBelief b{x0, m.initial_y};
      Belief flat = embed_belief(m, b);
      for (int step = 0; step < 20 && !is_terminal_belief(m, b); ++step) {
        const auto a = static_cast<std::uint32_t>(rng() % m.num_actions);
        const auto succ = successors(m, b, a);
        std::vector<double> probs;
        for (const auto& s : succ) probs.push_back(s.prob);
        const Successor& pick = succ[sample_index(probs, uniform01(rng))];
        const FactoredUpdateResult next = factored_belief_update(m, b, a, pick.event);
        const UpdateResult flat_next = belief_update(f, flat, a, flat_observation_index(m, pick.event));
        b = next.belief;
        flat = flat_next.belief;
        const Belief embedded = embed_belief(m, b);
        double diff = std::abs(next.obs_prob - flat_next.obs_prob);
        for (std::size_t s = 0; s < flat.probs.size(); ++s) {
          diff = std::max(diff, std::abs(embedded.probs[s] - flat.probs[s]));
        }
        const double dl =
            std::abs(factored_value(fb.lower, b).value - value_of_belief(lower, flat.probs).value);
        const double du =
            std::abs(factored_value(fb.upper, b).value - value_of_belief(upper, flat.probs).value);
        worst_belief = std::max(worst_belief, diff);
        worst_bound = std::max({worst_bound, dl, du});
        t.expect(diff <= kEquivalenceTolerance, fmt("%s seq %d step %d belief differs by %.3g", name.c_str(), seq, step, diff));
        t.expect(dl <= kEquivalenceTolerance && du <= kEquivalenceTolerance,
                 fmt("%s seq %d step %d bounds differ by %.3g/%.3g", name.c_str(), seq, step, dl, du));
      }
    }
  }
  return t.outcome(fmt("max belief diff %.2g, max bound diff %.2g", worst_belief, worst_bound));
}

// 4 ---------------------------------------------------------------------

constexpr double kHeuristicTolerance = 1e-9;

Outcome heuristic_oracle() {
  std::mt19937_64 rng(4);
  Tally t;
  std::size_t with_lower = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const SearchTree tree = random_tree(rng, TreeShape{trial % 2 == 1, 200, 5});
    const BruteForce brute = brute_force_selection(tree);
    const HeuristicCache& c = tree.node(0).cache;
    auto close = [](double a, double b) { return std::abs(a - b) <= kHeuristicTolerance * std::max(1.0, std::abs(b)); };
    t.expect(c.best_u.valid() == (brute.upper.leaf != kNoNode), fmt("tree %d: H_U definedness", trial));
    if (c.best_u.valid() && brute.upper.leaf != kNoNode) {
      t.expect(close(c.best_u.value, brute.upper.value), fmt("tree %d: H_U value", trial));
      t.expect(close(path_weight(tree, c.best_u.leaf) * tree.node(c.best_u.leaf).gap(), brute.upper.value),
               fmt("tree %d: H_U leaf does not attain the max", trial));
    }
    t.expect(c.best1.valid() == (brute.lower.leaf != kNoNode), fmt("tree %d: H_L definedness", trial));
    if (c.best1.valid() && brute.lower.leaf != kNoNode) {
      ++with_lower;
      t.expect(close(c.best1.value, brute.lower.value), fmt("tree %d: H_L value", trial));
      t.expect(close(path_weight(tree, c.best1.leaf) * tree.node(c.best1.leaf).gap(), brute.lower.value),
               fmt("tree %d: H_L leaf does not attain the max", trial));
      t.expect(count_deviations(tree, c.best1.leaf) == 1, fmt("tree %d: H_L path deviations", trial));
    }
  }
  return t.outcome(fmt("500 trees, %zu with H_L defined", with_lower));
}

// 5 ---------------------------------------------------------------------

constexpr double kTargetGap = 1e-3;
constexpr double kOracleEpsilon = 1e-4;
// Q values come from an oracle V within kOracleEpsilon, so comparing two of
// them can be off by twice that.
constexpr double kOracleSlack = 2 * kOracleEpsilon;
constexpr std::size_t kExpansionCap = 200000;

std::vector<std::pair<std::string, FlatModel>> small_models() {
  std::vector<std::pair<std::string, FlatModel>> out{{"terminal_tiger", terminal_tiger()}};
  for (std::uint32_t n = 3; n <= 8; ++n) out.push_back({"chain_" + std::to_string(n), observable_chain(n)});
  std::mt19937_64 rng(5);
  for (int i = 0; i < 12; ++i) {
    RandomFlatOptions o;
    o.states = 3 + i % 4;
    o.actions = 2 + i % 2;
    o.observations = 2;
    o.termination = 0.15;
    o.discount = 0.8;
    out.push_back({"random_" + std::to_string(i), random_flat_model(rng, o)});
  }
  return out;
}

Outcome convergence_and_liveness() {
  Tally t;
  std::string stats;
  std::size_t most = 0;
  for (const auto& [name, flat] : small_models()) {
    const FactoredModel m = from_flat(flat);
    const BoundFunctions b = compute_bounds(m);
    SearchTree tree(m, b, FactoredBelief{0, flat.initial_belief.probs}, Strategy::Fhhop);
    SearchConfig c;
    c.epsilon = kTargetGap;
    c.deterministic_expansions = kExpansionCap;
    const SearchResult r = search(tree, c);
    most = std::max(most, r.expansions);
    const double gap = tree.node(0).gap();
    t.expect(gap <= kTargetGap, fmt("%s: gap %.3g after %zu expansions", name.c_str(), gap, r.expansions));
    const AlphaVectorSet v = exact_value_iteration_oracle(flat, kOracleEpsilon);
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint32_t a = 0; a < flat.num_actions; ++a) {
      best = std::max(best, oracle_q_value(flat, v, flat.initial_belief, a));
    }
    const double chosen = oracle_q_value(flat, v, flat.initial_belief, r.action);
    t.expect(chosen >= best - kTargetGap - kOracleSlack,
             fmt("%s: action %u has Q* %.6f vs best %.6f", name.c_str(), r.action, chosen, best));
  }

  // Liveness: lower-candidate expansions that never move the root bounds.
  SearchTree tree(0.95, 5.0, 10.0);
  const double spec[3][3] = {{5.0, 5.5, 1.0}, {0.0, 10.0, 0.27}, {4.0, 8.0, 3.0}};
  for (std::uint32_t a = 0; a < 3; ++a) {
    const auto slot = tree.add_action(0, a, 0.0);
    tree.add_child(0, slot, {0, a}, 1.0, 0.0, spec[a][2]);
    tree.node(0).actions[slot].q_lower = spec[a][0];
    tree.node(0).actions[slot].q_upper = spec[a][1];
  }
  recompute_all_caches(tree);
  const double h_u = tree.node(0).cache.best_u.value;
  double max_gap = 0.0;
  for (NodeId id = 1; id < tree.size(); ++id) max_gap = std::max(max_gap, tree.node(id).gap());
  HybridStats hs;
  std::size_t selections = 0;
  bool upper_seen = false;
  const double limit = std::ceil((tree.node(0).gap() + 1.0) * max_gap / (hs.c_u() * h_u));
  while (!upper_seen && selections < 100000) {
    const auto sel = try_choose_fhhop(tree, hs);
    ++selections;
    if (!sel) break;
    if (sel->tag == SelectionTag::U) upper_seen = true;
    else record_expansion(hs, SelectionTag::L, 0.0, 0.0);
  }
  t.expect(upper_seen && static_cast<double>(selections) <= limit,
           fmt("liveness: U after %zu selections, bound %.0f", selections, limit));
  return t.outcome(fmt("%zu small models, most expansions %zu; liveness U at selection %zu <= %.0f",
                       small_models().size(), most, selections, limit));
}

// 6 ---------------------------------------------------------------------

constexpr double kInvariantSlack = 1e-9;

struct InvariantCheck {
  Tally& t;
  int case_id;

  void sandwich_and_shape(const SearchTree& tree) {
    for (NodeId id = 0; id < tree.size(); ++id) {
      const BeliefNode& n = tree.node(id);
      t.expect(n.lower <= n.upper + kInvariantSlack, fmt("case %d node %u: lower > upper", case_id, id));
      double mass = 0.0;
      for (double p : n.belief.dist_y) mass += p;
      t.expect(std::abs(mass - 1.0) <= kInvariantSlack, fmt("case %d node %u: belief mass %.12f", case_id, id, mass));
      for (const auto& act : n.actions) {
        double p = 0.0;
        for (const auto& c : act.children) p += c.prob;
        t.expect(std::abs(p - 1.0) <= kInvariantSlack, fmt("case %d node %u: sum_z P = %.12f", case_id, id, p));
        t.expect(act.q_lower <= act.q_upper + kInvariantSlack, fmt("case %d node %u: q sandwich", case_id, id));
      }
    }
  }
};

Outcome invariant_suite() {
  std::mt19937_64 rng(6);
  Tally t;
  constexpr int kCases = 1000;
  for (int i = 0; i < kCases; ++i) {
    FactoredModel m;
    if (i % 2 == 0) {
      RandomFlatOptions o;
      o.states = 2 + rng() % 6;
      o.actions = 2 + rng() % 2;
      o.observations = 2 + rng() % 3;
      o.termination = i % 4 == 0 ? 0.2 : 0.0;
      m = from_flat(random_flat_model(rng, o));
    } else {
      RandomFactoredOptions o;
      o.num_x = 1 + rng() % 3;
      o.num_y = 2 + rng() % 4;
      o.mode = i % 4 == 1 ? XObservability::Direct : XObservability::Decoded;
      o.observations = o.mode == XObservability::Decoded ? o.num_x * 2 : 3;
      o.terminal_x = o.num_x > 1;
      m = random_factored_model(rng, o);
    }
    const BoundFunctions b = compute_bounds(m);
    std::uint32_t x0 = 0;
    while (m.initial_x[x0] <= 0.0) ++x0;
    SearchTree tree(m, b, FactoredBelief{x0, m.initial_y}, i % 3 == 0 ? Strategy::Aems2 : Strategy::Fhhop);
    InvariantCheck check{t, i};
    HybridStats hs;
    for (int round = 0; round < 2; ++round) {
      for (int e = 0; e < 25; ++e) {
        std::vector<std::pair<double, double>> before;
        for (NodeId id = 0; id < tree.size(); ++id) before.push_back({tree.node(id).lower, tree.node(id).upper});
        std::optional<Selection> sel;
        if (tree.node(0).expandable()) {
          sel = Selection{0, SelectionTag::U, 0.0, std::nullopt};
        } else {
          sel = tree.strategy() == Strategy::Fhhop ? try_choose_fhhop(tree, hs) : try_choose_aems2(tree);
        }
        if (!sel) break;
        tree.expand(sel->leaf);
        tree.update_ancestors(sel->leaf);
        for (NodeId id = 0; id < before.size(); ++id) {
          t.expect(tree.node(id).lower >= before[id].first && tree.node(id).upper <= before[id].second,
                   fmt("case %d node %u: bounds loosened", i, id));
        }
      }
      check.sandwich_and_shape(tree);
      if (tree.node(0).terminal || tree.node(0).is_leaf()) break;
      const std::uint32_t a = tree.best_lower_action();
      const auto& kids = tree.node(0).actions[a].children;
      const ObservationChild pick = kids[rng() % kids.size()];
      const double lo = tree.node(pick.node).lower, hi = tree.node(pick.node).upper;
      tree.advance_root(a, pick.event);
      t.expect(tree.node(0).lower == lo && tree.node(0).upper == hi, fmt("case %d: reuse changed bounds", i));
      check.sandwich_and_shape(tree);
    }
  }
  return t.outcome(fmt("%d fuzzed models", kCases));
}

// 7 ---------------------------------------------------------------------

constexpr double kTagFloor = -7.0;
constexpr double kRockSampleFloor = 19.0;
constexpr double kTau = 0.1;

Outcome reward_reproduction() {
  SearchConfig c;
  c.tau = kTau;
  auto run = [&](const std::string& name, Strategy s, std::size_t episodes) {
    const ModelDocument doc = load_model_source(name);
    const FactoredModel m = as_factored(doc);
    const BoundFunctions b = compute_bounds(m);
    c.strategy = s;
    const BenchmarkReport r = evaluate(m, b, c, EvaluateOptions{episodes, 1, 1, false}, name);
    std::cout << report_text(r) << std::flush;
    return r;
  };
  const BenchmarkReport tag_f = run("tag", Strategy::Fhhop, 500);
  const BenchmarkReport tag_a = run("tag", Strategy::Aems2, 500);
  const BenchmarkReport rs = run("rocksample_7_8", Strategy::Fhhop, 200);
  const bool ok_tag = tag_f.mean >= kTagFloor;
  const bool ok_cmp = tag_f.mean >= tag_a.mean - (tag_f.half_width + tag_a.half_width);
  const bool ok_rs = rs.mean >= kRockSampleFloor;
  return {ok_tag && ok_cmp && ok_rs,
          fmt("Tag FHHOP %.2f+/-%.2f (>= %.1f: %s), AEMS2 %.2f+/-%.2f (dominance: %s), RS_7_8 FHHOP %.2f+/-%.2f "
              "(>= %.1f: %s)",
              tag_f.mean, tag_f.half_width, kTagFloor, ok_tag ? "yes" : "no", tag_a.mean, tag_a.half_width,
              ok_cmp ? "yes" : "no", rs.mean, rs.half_width, kRockSampleFloor, ok_rs ? "yes" : "no")};
}

// 8 ---------------------------------------------------------------------

constexpr double kInstrumentedFloor = 0.90;

Outcome profiling() {
  const FactoredModel flat = from_flat(to_flat(make_domain(parse_domain_name("rocksample_7_8"))));
  const BoundFunctions b = compute_bounds(flat);
  SearchConfig c;
  c.tau = kTau;
  c.strategy = Strategy::Aems2;
  c.max_episode_steps = 20;
  const ProfileFractions p = profile_run(flat, b, c, 3);
  return {p.instrumented() >= kInstrumentedFloor,
          fmt("belief update %.1f%%, obs prob %.1f%%, value %.1f%%, other %.1f%% over %.1f s (floor %.0f%%)",
              100 * p.belief_update, 100 * p.observation_probability, 100 * p.value_evaluation, 100 * p.other,
              p.total_seconds, 100 * kInstrumentedFloor)};
}

// 9 ---------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  const auto dir = std::filesystem::temp_directory_path() / "fhhop_acceptance_determinism";
  std::filesystem::create_directories(dir);
  std::vector<std::string> outputs;
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / ("report" + std::to_string(run) + ".json");
    std::filesystem::remove(out);
    const std::string cmd = "\"" + cli +
                            "\" solve --model tag --episodes 4 --seed 11 --deterministic-expansions 200 "
                            "--report json --output \"" +
                            out.string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "cli exited nonzero: " + cmd};
    outputs.push_back(slurp(out));
  }
  std::filesystem::remove_all(dir);
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, fmt("two runs, %zu bytes each, %s", outputs[0].size(), same ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string cli = FHHOP_CLI_PATH;
  app.add_option("--only", only, "Run a single criterion (1-9)")->check(CLI::Range(0, 9));
  app.add_option("--cli", cli, "Path to the fhhop executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dimension reproduction", dimensions},
      {"cost accounting", cost_accounting},
      {"flat/factored equivalence", flat_factored_equivalence},
      {"heuristic oracle equivalence", heuristic_oracle},
      {"convergence and liveness", convergence_and_liveness},
      {"invariant suite", invariant_suite},
      {"reward reproduction", reward_reproduction},
      {"profiling sanity", profiling},
      {"determinism", [&] { return determinism(cli); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu (%s): %s  [%.1fs] %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
