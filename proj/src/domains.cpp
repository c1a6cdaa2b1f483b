#include "fhhop/domains.hpp"

#include <cmath>
#include <map>
#include <random>
#include <regex>

#include "fhhop/errors.hpp"

namespace fhhop {
namespace {

struct Outcome {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  double p = 0.0;
};

struct StepResult {
  std::vector<Outcome> outcomes;
  double reward = 0.0;
};

using ObsRow = std::map<std::uint32_t, double>;

// Fills T_X, T_Y, O and R by visiting every (x, y, a) and (a, x', y') in
// table order.
template <typename Step, typename Observe>
void fill_tables(FactoredModel& m, Step step, Observe observe) {
  m.reward.assign(m.num_joint_states() * m.num_actions, 0.0);
  std::vector<std::map<std::uint32_t, double>> ty_rows;
  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      for (std::uint32_t a = 0; a < m.num_actions; ++a) {
        const StepResult r = step(x, y, a);
        m.reward[m.state_action_row(x, y, a)] = r.reward;
        std::map<std::uint32_t, std::map<std::uint32_t, double>> joint;
        for (const auto& o : r.outcomes) {
          if (o.p > 0.0) joint[o.x][o.y] += o.p;
        }
        for (const auto& [nx, ys] : joint) {
          double px = 0.0;
          for (const auto& [ny, p] : ys) px += p;
          m.transition_x.append(nx, px);
          std::map<std::uint32_t, double> row;
          for (const auto& [ny, p] : ys) row[ny] = p / px;
          ty_rows.push_back(std::move(row));
        }
        m.transition_x.close_row();
      }
    }
  }
  for (const auto& row : ty_rows) {
    for (const auto& [ny, p] : row) m.transition_y.append(ny, p);
    m.transition_y.close_row();
  }
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    for (std::uint32_t nx = 0; nx < m.num_x; ++nx) {
      for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
        for (const auto& [z, p] : observe(a, nx, ny)) {
          if (p > 0.0) m.observation.append(z, p);
        }
        m.observation.close_row();
      }
    }
  }
}

double distance(Cell a, Cell b) { return std::hypot(double(a.x - b.x), double(a.y - b.y)); }

void check_rocks(std::uint32_t n, const std::vector<Cell>& rocks) {
  if (n == 0) throw InvalidSpec("grid size must be positive");
  if (rocks.size() > 20) throw InvalidSpec("at most 20 rocks are supported");
  for (std::size_t i = 0; i < rocks.size(); ++i) {
    const Cell c = rocks[i];
    if (c.x < 0 || c.y < 0 || c.x >= std::int32_t(n) || c.y >= std::int32_t(n)) {
      throw InvalidSpec("rock " + std::to_string(i) + " at (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                        ") lies outside the " + std::to_string(n) + "x" + std::to_string(n) + " grid");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (rocks[j] == c) throw InvalidSpec("rocks " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
    }
  }
}

// Shared grid mechanics of RockSample and its field-vision variant.
struct RockGrid {
  std::uint32_t n;
  std::vector<Cell> rocks;
  std::uint32_t terminal() const { return n * n; }
  Cell cell(std::uint32_t x) const { return {std::int32_t(x % n), std::int32_t(x / n)}; }
  std::uint32_t index(Cell c) const { return std::uint32_t(c.y) * n + std::uint32_t(c.x); }
  int rock_at(Cell c) const {
    for (std::size_t m = 0; m < rocks.size(); ++m) {
      if (rocks[m] == c) return int(m);
    }
    return -1;
  }

  // Actions 0-3 are North, South, East, West; 4 is Sample.
  StepResult move_or_sample(std::uint32_t x, std::uint32_t y, std::uint32_t a) const {
    if (x == terminal()) return {{{x, y, 1.0}}, 0.0};
    Cell c = cell(x);
    switch (a) {
      case 0:
        if (c.y + 1 < std::int32_t(n)) ++c.y;
        break;
      case 1:
        if (c.y > 0) --c.y;
        break;
      case 2:
        // Rock values no longer matter once the rover has left.
        if (c.x + 1 == std::int32_t(n)) return {{{terminal(), 0, 1.0}}, 10.0};
        ++c.x;
        break;
      case 3:
        if (c.x > 0) --c.x;
        break;
      default: {
        const int r = rock_at(c);
        if (r < 0) return {{{x, y, 1.0}}, -10.0};
        const bool good = (y >> r) & 1u;
        return {{{x, y & ~(1u << r), 1.0}}, good ? 10.0 : -10.0};
      }
    }
    return {{{index(c), y, 1.0}}, 0.0};
  }
};

}  // namespace

double sensor_accuracy(double d, double half_distance) { return 0.5 * (1.0 + std::exp2(-d / half_distance)); }

Cell rocksample_start(std::uint32_t n) { return {0, std::int32_t(n / 2)}; }

const std::vector<Cell>& tag_cells() {
  static const std::vector<Cell> cells = [] {
    std::vector<Cell> out;
    for (std::int32_t y = 0; y < 5; ++y) {
      for (std::int32_t x = 0; x < 10; ++x) {
        if (y < 2 || (x >= 5 && x <= 7)) out.push_back({x, y});
      }
    }
    return out;
  }();
  return cells;
}

FactoredModel make_tag(double discount) {
  const auto& cells = tag_cells();
  const std::uint32_t nc = std::uint32_t(cells.size());
  auto find = [&](Cell c) -> int {
    for (std::uint32_t i = 0; i < nc; ++i) {
      if (cells[i] == c) return int(i);
    }
    return -1;
  };
  static constexpr Cell kDirs[4] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
  auto step_from = [&](std::uint32_t i, std::uint32_t dir) -> std::uint32_t {
    const Cell c{cells[i].x + kDirs[dir].x, cells[i].y + kDirs[dir].y};
    const int j = find(c);
    return j < 0 ? i : std::uint32_t(j);
  };
  // Opponent distribution given its cell and the robot's cell before moving:
  // 0.4 along each axis away from the robot (split when level on that axis),
  // 0.2 stay; a move into a wall stays.
  auto flee = [&](std::uint32_t robot, std::uint32_t opp) {
    std::vector<std::pair<std::uint32_t, double>> out{{opp, 0.2}};
    auto axis = [&](std::int32_t r, std::int32_t o, std::uint32_t up, std::uint32_t down) {
      if (r < o) out.push_back({step_from(opp, up), 0.4});
      if (r > o) out.push_back({step_from(opp, down), 0.4});
      if (r == o) {
        out.push_back({step_from(opp, up), 0.2});
        out.push_back({step_from(opp, down), 0.2});
      }
    };
    axis(cells[robot].x, cells[opp].x, 2, 3);
    axis(cells[robot].y, cells[opp].y, 0, 1);
    return out;
  };

  FactoredModel m;
  m.num_x = nc + 1;
  m.num_y = nc;
  m.num_actions = 5;
  m.num_observations = nc + 1;
  m.discount = discount;
  m.x_observability = XObservability::Direct;
  m.terminal_x.assign(m.num_x, 0);
  m.terminal_x[nc] = 1;
  m.terminal_y.assign(m.num_y, 0);
  m.initial_x.assign(m.num_x, 1.0 / nc);
  m.initial_x[nc] = 0.0;
  m.initial_y.assign(m.num_y, 1.0 / nc);

  fill_tables(
      m,
      [&](std::uint32_t x, std::uint32_t y, std::uint32_t a) {
        StepResult r;
        if (x == nc) {
          r.outcomes.push_back({x, y, 1.0});
          return r;
        }
        if (a == 4 && x == y) {
          r.outcomes.push_back({nc, y, 1.0});
          r.reward = 10.0;
          return r;
        }
        const std::uint32_t nx = a == 4 ? x : step_from(x, a);
        r.reward = a == 4 ? -10.0 : -1.0;
        for (auto [ny, p] : flee(x, y)) r.outcomes.push_back({nx, ny, p});
        return r;
      },
      [&](std::uint32_t, std::uint32_t nx, std::uint32_t ny) {
        return ObsRow{{nx == ny ? ny : nc, 1.0}};
      });
  validate(m);
  return m;
}

FactoredModel make_rocksample(std::uint32_t n, const std::vector<Cell>& rocks, double discount, double d0) {
  check_rocks(n, rocks);
  const RockGrid g{n, rocks};
  const std::uint32_t k = std::uint32_t(rocks.size());
  FactoredModel m;
  m.num_x = n * n + 1;
  m.num_y = 1u << k;
  m.num_actions = k + 5;
  m.num_observations = 2;
  m.discount = discount;
  m.x_observability = XObservability::Direct;
  m.terminal_x.assign(m.num_x, 0);
  m.terminal_x[g.terminal()] = 1;
  m.terminal_y.assign(m.num_y, 0);
  m.initial_x.assign(m.num_x, 0.0);
  m.initial_x[g.index(rocksample_start(n))] = 1.0;
  m.initial_y.assign(m.num_y, 1.0 / m.num_y);

  fill_tables(
      m,
      [&](std::uint32_t x, std::uint32_t y, std::uint32_t a) {
        if (a < 5 || x == g.terminal()) return g.move_or_sample(x, y, std::min(a, 4u));
        return StepResult{{{x, y, 1.0}}, 0.0};
      },
      [&](std::uint32_t a, std::uint32_t nx, std::uint32_t ny) {
        if (a < 5 || nx == g.terminal()) return ObsRow{{0, 1.0}};
        const std::uint32_t r = a - 5;
        const double acc = sensor_accuracy(distance(g.cell(nx), rocks[r]), d0);
        const std::uint32_t truth = (ny >> r) & 1u;
        ObsRow row;
        row[truth] += acc;
        row[1 - truth] += 1.0 - acc;
        return row;
      });
  validate(m);
  return m;
}

FactoredModel make_fvrs(std::uint32_t n, const std::vector<Cell>& rocks, double discount, double d0) {
  check_rocks(n, rocks);
  const RockGrid g{n, rocks};
  const std::uint32_t k = std::uint32_t(rocks.size());
  FactoredModel m;
  m.num_x = n * n + 1;
  m.num_y = 1u << k;
  m.num_actions = 5;
  m.num_observations = 1u << k;
  m.discount = discount;
  m.x_observability = XObservability::Direct;
  m.terminal_x.assign(m.num_x, 0);
  m.terminal_x[g.terminal()] = 1;
  m.terminal_y.assign(m.num_y, 0);
  m.initial_x.assign(m.num_x, 0.0);
  m.initial_x[g.index(rocksample_start(n))] = 1.0;
  m.initial_y.assign(m.num_y, 1.0 / m.num_y);

  std::vector<double> acc_at(static_cast<std::size_t>(n) * n * k);
  for (std::uint32_t x = 0; x < n * n; ++x) {
    for (std::uint32_t r = 0; r < k; ++r) acc_at[x * k + r] = sensor_accuracy(distance(g.cell(x), rocks[r]), d0);
  }
  fill_tables(
      m, [&](std::uint32_t x, std::uint32_t y, std::uint32_t a) { return g.move_or_sample(x, y, a); },
      [&](std::uint32_t, std::uint32_t nx, std::uint32_t ny) {
        ObsRow row;
        if (nx == g.terminal()) {
          row[0] = 1.0;
          return row;
        }
        for (std::uint32_t z = 0; z < m.num_observations; ++z) {
          double p = 1.0;
          for (std::uint32_t r = 0; r < k; ++r) {
            const double acc = acc_at[nx * k + r];
            p *= ((z >> r) & 1u) == ((ny >> r) & 1u) ? acc : 1.0 - acc;
          }
          row[z] = p;
        }
        return row;
      });
  validate(m);
  return m;
}

std::optional<std::vector<Cell>> canonical_rocks(std::uint32_t n, std::uint32_t k) {
  if (n == 7 && k == 8) return std::vector<Cell>{{2, 0}, {0, 1}, {3, 1}, {6, 3}, {2, 4}, {3, 4}, {5, 5}, {1, 6}};
  if (n == 11 && k == 11) {
    return std::vector<Cell>{{0, 3}, {0, 7}, {1, 8}, {2, 4}, {3, 3}, {3, 8}, {4, 3}, {5, 8}, {6, 1}, {9, 3}, {9, 9}};
  }
  return std::nullopt;
}

std::vector<Cell> seeded_rocks(std::uint32_t n, std::uint32_t k, std::uint64_t seed) {
  if (std::uint64_t(k) > std::uint64_t(n) * n) throw InvalidSpec("more rocks than grid cells");
  std::vector<std::uint32_t> cells(static_cast<std::size_t>(n) * n);
  for (std::uint32_t i = 0; i < cells.size(); ++i) cells[i] = i;
  std::mt19937_64 rng(seed);
  std::vector<Cell> out;
  for (std::uint32_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng() % (cells.size() - i);
    std::swap(cells[i], cells[j]);
    out.push_back({std::int32_t(cells[i] % n), std::int32_t(cells[i] / n)});
  }
  return out;
}

std::vector<Cell> resolve_rocks(const DomainSpec& spec) {
  std::vector<Cell> rocks = spec.rocks;
  if (rocks.empty() && spec.k > 0) {
    if (spec.family == DomainFamily::RockSample) {
      if (auto c = canonical_rocks(spec.n, spec.k)) rocks = *c;
    }
    if (rocks.empty()) rocks = seeded_rocks(spec.n, spec.k, spec.seed);
  }
  if (rocks.size() != spec.k) throw InvalidSpec("rock count does not match k");
  check_rocks(spec.n, rocks);
  return rocks;
}

FactoredModel make_domain(const DomainSpec& spec) {
  switch (spec.family) {
    case DomainFamily::Tag:
      return make_tag(spec.discount);
    case DomainFamily::RockSample:
      return make_rocksample(spec.n, resolve_rocks(spec), spec.discount, spec.sensor_half_distance);
    case DomainFamily::Fvrs:
      return make_fvrs(spec.n, resolve_rocks(spec), spec.discount, spec.sensor_half_distance);
  }
  throw InvalidSpec("unknown domain family");
}

DomainSpec parse_domain_name(const std::string& name) {
  DomainSpec spec;
  if (name == "tag") return spec;
  static const std::regex pattern(R"((rocksample|rs|fvrs)_(\d+)_(\d+))");
  std::smatch match;
  if (!std::regex_match(name, match, pattern)) throw InvalidSpec("unknown domain '" + name + "'");
  spec.family = match[1] == "fvrs" ? DomainFamily::Fvrs : DomainFamily::RockSample;
  spec.n = std::uint32_t(std::stoul(match[2]));
  spec.k = std::uint32_t(std::stoul(match[3]));
  if (spec.n == 0 || spec.n > 64 || spec.k > 20) throw InvalidSpec("domain size out of range in '" + name + "'");
  return spec;
}

std::string domain_name(const DomainSpec& spec) {
  switch (spec.family) {
    case DomainFamily::Tag:
      return "tag";
    case DomainFamily::RockSample:
      return "rocksample_" + std::to_string(spec.n) + "_" + std::to_string(spec.k);
    case DomainFamily::Fvrs:
      return "fvrs_" + std::to_string(spec.n) + "_" + std::to_string(spec.k);
  }
  return "unknown";
}

}  // namespace fhhop
