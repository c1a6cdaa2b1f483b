#include "fhhop/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "fhhop/errors.hpp"

namespace fhhop {
namespace {

constexpr std::uint32_t kUnmapped = std::numeric_limits<std::uint32_t>::max();

struct Token {
  std::string_view text;
  std::size_t column = 0;
};

struct Line {
  std::size_t number = 0;
  std::string_view directive;
  std::size_t directive_column = 0;
  std::string_view rest;
  std::vector<Token> args;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<Line> lex(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    pos = end + 1;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);

    std::size_t first = 0;
    while (first < raw.size() && is_space(raw[first])) ++first;
    if (first == raw.size()) {
      if (end == text.size()) break;
      continue;
    }
    const std::size_t colon = raw.find(':', first);
    if (colon == std::string_view::npos) throw ParseError(number, first + 1, "expected 'directive:'");
    std::size_t dir_end = colon;
    while (dir_end > first && is_space(raw[dir_end - 1])) --dir_end;
    Line line;
    line.number = number;
    line.directive = raw.substr(first, dir_end - first);
    line.directive_column = first + 1;
    for (char c : line.directive) {
      if (is_space(c)) throw ParseError(number, first + 1, "directive names contain no whitespace");
    }

    std::size_t rest_begin = colon + 1;
    while (rest_begin < raw.size() && is_space(raw[rest_begin])) ++rest_begin;
    std::size_t rest_end = raw.size();
    while (rest_end > rest_begin && is_space(raw[rest_end - 1])) --rest_end;
    line.rest = raw.substr(rest_begin, rest_end - rest_begin);

    std::size_t i = colon + 1;
    while (i < raw.size()) {
      if (is_space(raw[i]) || raw[i] == ':') {
        ++i;
        continue;
      }
      const std::size_t start = i;
      while (i < raw.size() && !is_space(raw[i]) && raw[i] != ':') ++i;
      line.args.push_back({raw.substr(start, i - start), start + 1});
    }
    lines.push_back(std::move(line));
    if (end == text.size()) break;
  }
  return lines;
}

[[noreturn]] void fail(const Line& line, const Token& token, const std::string& reason) {
  throw ParseError(line.number, token.column, reason);
}

[[noreturn]] void fail(const Line& line, const std::string& reason) {
  throw ParseError(line.number, line.directive_column, reason);
}

double parse_number(const Line& line, const Token& token) {
  std::string_view s = token.text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    fail(line, token, "expected a number, got '" + std::string(token.text) + "'");
  }
  return value;
}

std::uint32_t parse_unsigned(const Line& line, const Token& token) {
  std::uint32_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.text.data(), token.text.data() + token.text.size(), value);
  if (ec != std::errc{} || ptr != token.text.data() + token.text.size()) {
    fail(line, token, "expected a non-negative integer, got '" + std::string(token.text) + "'");
  }
  return value;
}

bool is_unsigned(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

struct Axis {
  explicit Axis(const char* l) : label(l) {}

  const char* label;
  std::uint32_t size = 0;
  bool declared = false;
  std::map<std::string, std::uint32_t, std::less<>> names;

  void declare(const Line& line) {
    if (declared) fail(line, std::string("'") + label + "' declared twice");
    if (line.args.empty()) fail(line, std::string("'") + label + "' needs a count or a list of names");
    if (line.args.size() == 1 && is_unsigned(line.args[0].text)) {
      size = parse_unsigned(line, line.args[0]);
      if (size == 0) fail(line, line.args[0], std::string(label) + " count must be positive");
    } else {
      for (const auto& t : line.args) {
        if (!names.emplace(std::string(t.text), size).second) {
          fail(line, t, "duplicate name '" + std::string(t.text) + "'");
        }
        ++size;
      }
    }
    declared = true;
  }

  void require(const Line& line) const {
    if (!declared) fail(line, std::string("'") + label + "' must be declared before this entry");
  }
};

// A single index or the '*' wildcard.
struct IndexRange {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

IndexRange resolve(const Line& line, const Token& token, const Axis& axis) {
  axis.require(line);
  if (token.text == "*") return {0, axis.size};
  std::uint32_t value = 0;
  if (is_unsigned(token.text)) {
    value = parse_unsigned(line, token);
  } else {
    const auto it = axis.names.find(token.text);
    if (it == axis.names.end()) fail(line, token, std::string("unknown ") + axis.label + " '" + std::string(token.text) + "'");
    value = it->second;
  }
  if (value >= axis.size) {
    fail(line, token, std::string(axis.label) + " index " + std::to_string(value) + " out of range");
  }
  return {value, value + 1};
}

void expect_args(const Line& line, std::size_t count, const char* shape) {
  if (line.args.size() != count) fail(line, std::string("expected '") + shape + "'");
}

std::vector<double> parse_distribution(const Line& line, const Axis& axis) {
  axis.require(line);
  if (line.args.size() == 1 && line.args[0].text == "uniform") {
    return std::vector<double>(axis.size, 1.0 / axis.size);
  }
  if (line.args.size() != axis.size) {
    fail(line, "expected 'uniform' or " + std::to_string(axis.size) + " probabilities");
  }
  std::vector<double> out;
  out.reserve(axis.size);
  for (const auto& t : line.args) out.push_back(parse_number(line, t));
  return out;
}

std::vector<std::uint8_t> parse_flags(const Line& line, const Axis& axis) {
  std::vector<std::uint8_t> out(axis.size, 0);
  for (const auto& t : line.args) {
    const auto r = resolve(line, t, axis);
    for (std::uint32_t i = r.begin; i < r.end; ++i) out[i] = 1;
  }
  return out;
}

double parse_discount(const Line& line) {
  expect_args(line, 1, "discount: g");
  const double g = parse_number(line, line.args[0]);
  if (!(g > 0.0 && g < 1.0)) fail(line, line.args[0], "discount must lie in (0,1)");
  return g;
}

bool parse_common(const Line& line, ModelDocument& doc) {
  if (line.directive == "name") {
    doc.name = std::string(line.rest);
    return true;
  }
  if (line.directive == "meta") {
    if (line.args.empty()) fail(line, "expected 'meta: key value'");
    const std::string_view key = line.args[0].text;
    std::string_view value = line.rest.substr(std::min(line.rest.size(), key.size()));
    while (!value.empty() && is_space(value.front())) value.remove_prefix(1);
    doc.metadata[std::string(key)] = std::string(value);
    return true;
  }
  return false;
}

// Reported at the end of the document.
[[noreturn]] void missing(std::string_view text, const char* what) {
  const std::size_t last_line = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
  throw ParseError(last_line, 1, std::string("missing required '") + what + ":' declaration");
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ModelDocument parse_flat_document(std::string_view text) {
  ModelDocument doc;
  Axis states{"state"}, actions{"action"}, observations{"observation"};
  std::optional<double> discount;
  std::vector<Triplet> t_entries, o_entries;
  std::vector<double> reward;
  std::optional<std::vector<double>> start;
  std::vector<std::uint8_t> terminal;

  auto ensure_reward = [&](const Line& line) {
    states.require(line);
    actions.require(line);
    if (reward.empty()) reward.assign(static_cast<std::size_t>(states.size) * actions.size, 0.0);
  };

  for (const Line& line : lex(text)) {
    const auto& d = line.directive;
    if (parse_common(line, doc)) continue;
    if (d == "discount") {
      discount = parse_discount(line);
    } else if (d == "values") {
      if (line.args.size() != 1 || line.args[0].text != "reward") fail(line, "only 'values: reward' is supported");
    } else if (d == "states") {
      states.declare(line);
    } else if (d == "actions") {
      actions.declare(line);
    } else if (d == "observations") {
      observations.declare(line);
    } else if (d == "start") {
      start = parse_distribution(line, states);
    } else if (d == "terminal") {
      states.require(line);
      terminal = parse_flags(line, states);
    } else if (d == "T") {
      expect_args(line, 4, "T: a : s : s' p");
      const auto ra = resolve(line, line.args[0], actions);
      const auto rs = resolve(line, line.args[1], states);
      const auto rn = resolve(line, line.args[2], states);
      const double p = parse_number(line, line.args[3]);
      for (auto a = ra.begin; a < ra.end; ++a)
        for (auto s = rs.begin; s < rs.end; ++s)
          for (auto n = rn.begin; n < rn.end; ++n)
            t_entries.push_back({static_cast<std::size_t>(s) * actions.size + a, n, p});
    } else if (d == "O") {
      expect_args(line, 4, "O: a : s' : z p");
      const auto ra = resolve(line, line.args[0], actions);
      const auto rn = resolve(line, line.args[1], states);
      const auto rz = resolve(line, line.args[2], observations);
      const double p = parse_number(line, line.args[3]);
      for (auto a = ra.begin; a < ra.end; ++a)
        for (auto n = rn.begin; n < rn.end; ++n)
          for (auto z = rz.begin; z < rz.end; ++z)
            o_entries.push_back({static_cast<std::size_t>(a) * states.size + n, z, p});
    } else if (d == "R") {
      expect_args(line, 3, "R: a : s r");
      ensure_reward(line);
      const auto ra = resolve(line, line.args[0], actions);
      const auto rs = resolve(line, line.args[1], states);
      const double r = parse_number(line, line.args[2]);
      for (auto a = ra.begin; a < ra.end; ++a)
        for (auto s = rs.begin; s < rs.end; ++s) reward[static_cast<std::size_t>(s) * actions.size + a] = r;
    } else {
      fail(line, "unknown directive '" + std::string(d) + "'");
    }
  }
  if (!discount) missing(text, "discount");
  if (!states.declared) missing(text, "states");
  if (!actions.declared) missing(text, "actions");
  if (!observations.declared) missing(text, "observations");

  FlatModel m;
  m.num_states = states.size;
  m.num_actions = actions.size;
  m.num_observations = observations.size;
  m.discount = *discount;
  const std::size_t sa = static_cast<std::size_t>(m.num_states) * m.num_actions;
  m.transition = SparseRows::from_triplets(sa, std::move(t_entries));
  m.observation = SparseRows::from_triplets(sa, std::move(o_entries));
  m.reward = reward.empty() ? std::vector<double>(sa, 0.0) : std::move(reward);
  m.terminal = terminal.empty() ? std::vector<std::uint8_t>(m.num_states, 0) : std::move(terminal);
  m.initial_belief.probs = start ? std::move(*start) : std::vector<double>(m.num_states, 1.0 / m.num_states);
  validate(m);
  doc.payload = std::move(m);
  return doc;
}

FlatModel parse_flat(std::string_view text) { return std::get<FlatModel>(parse_flat_document(text).payload); }

ModelDocument parse_factored_document(std::string_view text) {
  ModelDocument doc;
  Axis xs{"x"}, ys{"y"}, actions{"action"}, observations{"observation"};
  std::optional<double> discount;
  std::optional<XObservability> mode;
  std::vector<std::uint32_t> obs_to_x;
  std::vector<std::uint8_t> terminal_x, terminal_y;
  std::optional<std::vector<double>> initial_x, initial_y;
  std::vector<Triplet> tx_entries, o_entries;
  struct TyEntry {
    std::size_t line;
    std::size_t column;
    std::size_t row;
    std::uint32_t nx;
    std::uint32_t ny;
    double p;
    bool wildcard;
  };
  std::vector<TyEntry> ty_entries;
  std::vector<double> reward;

  const auto lines = lex(text);
  if (lines.empty() || lines.front().directive != "fmomdp") {
    throw ParseError(lines.empty() ? 1 : lines.front().number, 1, "factored documents start with 'fmomdp: 1'");
  }
  {
    const Line& header = lines.front();
    expect_args(header, 1, "fmomdp: 1");
    if (header.args[0].text != "1") fail(header, header.args[0], "unsupported format version");
  }
  auto row_of = [&](std::uint32_t x, std::uint32_t y, std::uint32_t a) {
    return (static_cast<std::size_t>(x) * ys.size + y) * actions.size + a;
  };

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const Line& line = lines[li];
    const auto& d = line.directive;
    if (parse_common(line, doc)) continue;
    if (d == "discount") {
      discount = parse_discount(line);
    } else if (d == "x") {
      xs.declare(line);
    } else if (d == "y") {
      ys.declare(line);
    } else if (d == "actions") {
      actions.declare(line);
    } else if (d == "observations") {
      observations.declare(line);
    } else if (d == "x_observability") {
      expect_args(line, 1, "x_observability: direct|decoded");
      if (line.args[0].text == "direct") {
        mode = XObservability::Direct;
      } else if (line.args[0].text == "decoded") {
        mode = XObservability::Decoded;
      } else {
        fail(line, line.args[0], "expected 'direct' or 'decoded'");
      }
    } else if (d == "obs_to_x") {
      expect_args(line, 2, "obs_to_x: z x");
      const auto rz = resolve(line, line.args[0], observations);
      const auto rx = resolve(line, line.args[1], xs);
      if (rx.end - rx.begin != 1) fail(line, line.args[1], "obs_to_x needs a single x");
      if (obs_to_x.empty()) obs_to_x.assign(observations.size, kUnmapped);
      for (auto z = rz.begin; z < rz.end; ++z) obs_to_x[z] = rx.begin;
    } else if (d == "terminal_x") {
      xs.require(line);
      terminal_x = parse_flags(line, xs);
    } else if (d == "terminal_y") {
      ys.require(line);
      terminal_y = parse_flags(line, ys);
    } else if (d == "initial_x") {
      initial_x = parse_distribution(line, xs);
    } else if (d == "initial_y") {
      initial_y = parse_distribution(line, ys);
    } else if (d == "TX") {
      expect_args(line, 5, "TX: x y a x' p");
      const auto rx = resolve(line, line.args[0], xs);
      const auto ry = resolve(line, line.args[1], ys);
      const auto ra = resolve(line, line.args[2], actions);
      const auto rn = resolve(line, line.args[3], xs);
      const double p = parse_number(line, line.args[4]);
      for (auto x = rx.begin; x < rx.end; ++x)
        for (auto y = ry.begin; y < ry.end; ++y)
          for (auto a = ra.begin; a < ra.end; ++a)
            for (auto n = rn.begin; n < rn.end; ++n) tx_entries.push_back({row_of(x, y, a), n, p});
    } else if (d == "TY") {
      expect_args(line, 6, "TY: x y a x' y' p");
      const auto rx = resolve(line, line.args[0], xs);
      const auto ry = resolve(line, line.args[1], ys);
      const auto ra = resolve(line, line.args[2], actions);
      const auto rn = resolve(line, line.args[3], xs);
      const auto rm = resolve(line, line.args[4], ys);
      const double p = parse_number(line, line.args[5]);
      bool wildcard = false;
      for (std::size_t i = 0; i < 5; ++i) wildcard = wildcard || line.args[i].text == "*";
      for (auto x = rx.begin; x < rx.end; ++x)
        for (auto y = ry.begin; y < ry.end; ++y)
          for (auto a = ra.begin; a < ra.end; ++a)
            for (auto n = rn.begin; n < rn.end; ++n)
              for (auto m = rm.begin; m < rm.end; ++m)
                ty_entries.push_back({line.number, line.args[3].column, row_of(x, y, a), n, m, p, wildcard});
    } else if (d == "O") {
      expect_args(line, 5, "O: a x' y' z p");
      const auto ra = resolve(line, line.args[0], actions);
      const auto rn = resolve(line, line.args[1], xs);
      const auto rm = resolve(line, line.args[2], ys);
      const auto rz = resolve(line, line.args[3], observations);
      const double p = parse_number(line, line.args[4]);
      for (auto a = ra.begin; a < ra.end; ++a)
        for (auto n = rn.begin; n < rn.end; ++n)
          for (auto m = rm.begin; m < rm.end; ++m)
            for (auto z = rz.begin; z < rz.end; ++z)
              o_entries.push_back({(static_cast<std::size_t>(a) * xs.size + n) * ys.size + m, z, p});
    } else if (d == "R") {
      expect_args(line, 4, "R: x y a r");
      const auto rx = resolve(line, line.args[0], xs);
      const auto ry = resolve(line, line.args[1], ys);
      const auto ra = resolve(line, line.args[2], actions);
      const double r = parse_number(line, line.args[3]);
      if (reward.empty()) reward.assign(static_cast<std::size_t>(xs.size) * ys.size * actions.size, 0.0);
      for (auto x = rx.begin; x < rx.end; ++x)
        for (auto y = ry.begin; y < ry.end; ++y)
          for (auto a = ra.begin; a < ra.end; ++a) reward[row_of(x, y, a)] = r;
    } else {
      fail(line, "unknown directive '" + std::string(d) + "'");
    }
  }
  if (!discount) missing(text, "discount");
  if (!xs.declared) missing(text, "x");
  if (!ys.declared) missing(text, "y");
  if (!actions.declared) missing(text, "actions");
  if (!observations.declared) missing(text, "observations");
  if (!mode) missing(text, "x_observability");

  FactoredModel m;
  m.num_x = xs.size;
  m.num_y = ys.size;
  m.num_actions = actions.size;
  m.num_observations = observations.size;
  m.discount = *discount;
  m.x_observability = *mode;
  const std::size_t rows = static_cast<std::size_t>(m.num_x) * m.num_y * m.num_actions;
  m.transition_x = SparseRows::from_triplets(rows, std::move(tx_entries));

  std::vector<Triplet> ty_triplets;
  ty_triplets.reserve(ty_entries.size());
  for (const auto& e : ty_entries) {
    const auto row = m.transition_x.row(e.row);
    const auto it = std::lower_bound(row.begin(), row.end(), e.nx,
                                     [](const SparseEntry& s, std::uint32_t col) { return s.index < col; });
    if (it == row.end() || it->index != e.nx) {
      // wildcards only fill cells that T_X makes reachable
      if (e.p == 0.0 || e.wildcard) continue;
      throw ValidationError("TY entry at line " + std::to_string(e.line) + " has no matching TX entry for x'=" +
                            std::to_string(e.nx));
    }
    const std::size_t k = static_cast<std::size_t>(it - row.begin());
    ty_triplets.push_back({m.transition_x.row_begin(e.row) + k, e.ny, e.p});
  }
  m.transition_y = SparseRows::from_triplets(m.transition_x.nnz(), std::move(ty_triplets));
  m.observation =
      SparseRows::from_triplets(static_cast<std::size_t>(m.num_actions) * m.num_x * m.num_y, std::move(o_entries));
  m.reward = reward.empty() ? std::vector<double>(rows, 0.0) : std::move(reward);
  if (m.x_observability == XObservability::Decoded) {
    if (obs_to_x.empty()) obs_to_x.assign(m.num_observations, kUnmapped);
    for (std::uint32_t z = 0; z < m.num_observations; ++z) {
      if (obs_to_x[z] == kUnmapped) throw ValidationError("obs_to_x has no entry for observation " + std::to_string(z));
    }
    m.obs_to_x = std::move(obs_to_x);
  } else if (!obs_to_x.empty()) {
    throw ValidationError("obs_to_x given for a directly observed x");
  }
  m.terminal_x = terminal_x.empty() ? std::vector<std::uint8_t>(m.num_x, 0) : std::move(terminal_x);
  m.terminal_y = terminal_y.empty() ? std::vector<std::uint8_t>(m.num_y, 0) : std::move(terminal_y);
  m.initial_x = initial_x ? std::move(*initial_x) : std::vector<double>(m.num_x, 1.0 / m.num_x);
  m.initial_y = initial_y ? std::move(*initial_y) : std::vector<double>(m.num_y, 1.0 / m.num_y);
  validate(m);
  doc.payload = std::move(m);
  return doc;
}

FactoredModel parse_factored(std::string_view text) {
  return std::get<FactoredModel>(parse_factored_document(text).payload);
}

ModelDocument parse_document(std::string_view text) {
  const auto lines = lex(text);
  if (!lines.empty() && lines.front().directive == "fmomdp") return parse_factored_document(text);
  return parse_flat_document(text);
}

namespace {

void write_header(std::string& out, const ModelDocument& doc) {
  if (!doc.name.empty()) out += "name: " + doc.name + "\n";
  for (const auto& [key, value] : doc.metadata) {
    out += "meta: " + key;
    if (!value.empty()) out += " " + value;
    out += "\n";
  }
}

void write_list(std::string& out, const char* directive, const std::vector<double>& values) {
  out += directive;
  out += ":";
  for (double v : values) out += " " + format_number(v);
  out += "\n";
}

void write_flags(std::string& out, const char* directive, const std::vector<std::uint8_t>& flags) {
  bool any = false;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] == 0) continue;
    if (!any) {
      out += directive;
      out += ":";
      any = true;
    }
    out += " " + std::to_string(i);
  }
  if (any) out += "\n";
}

void serialize_flat(std::string& out, const FlatModel& m) {
  out += "discount: " + format_number(m.discount) + "\n";
  out += "values: reward\n";
  out += "states: " + std::to_string(m.num_states) + "\n";
  out += "actions: " + std::to_string(m.num_actions) + "\n";
  out += "observations: " + std::to_string(m.num_observations) + "\n";
  write_list(out, "start", m.initial_belief.probs);
  write_flags(out, "terminal", m.terminal);
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
      for (const auto& e : m.transitions(s, a)) {
        out += "T: " + std::to_string(a) + " : " + std::to_string(s) + " : " + std::to_string(e.index) + " " +
               format_number(e.value) + "\n";
      }
    }
  }
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
      for (const auto& e : m.observations(a, s)) {
        out += "O: " + std::to_string(a) + " : " + std::to_string(s) + " : " + std::to_string(e.index) + " " +
               format_number(e.value) + "\n";
      }
    }
  }
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
      const double r = m.reward_of(s, a);
      if (r != 0.0) out += "R: " + std::to_string(a) + " : " + std::to_string(s) + " " + format_number(r) + "\n";
    }
  }
}

void serialize_factored(std::string& out, const FactoredModel& m) {
  out += "discount: " + format_number(m.discount) + "\n";
  out += "x: " + std::to_string(m.num_x) + "\n";
  out += "y: " + std::to_string(m.num_y) + "\n";
  out += "actions: " + std::to_string(m.num_actions) + "\n";
  out += "observations: " + std::to_string(m.num_observations) + "\n";
  out += std::string("x_observability: ") +
         (m.x_observability == XObservability::Direct ? "direct" : "decoded") + "\n";
  for (std::size_t z = 0; z < m.obs_to_x.size(); ++z) {
    out += "obs_to_x: " + std::to_string(z) + " " + std::to_string(m.obs_to_x[z]) + "\n";
  }
  write_flags(out, "terminal_x", m.terminal_x);
  write_flags(out, "terminal_y", m.terminal_y);
  write_list(out, "initial_x", m.initial_x);
  write_list(out, "initial_y", m.initial_y);
  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      for (std::uint32_t a = 0; a < m.num_actions; ++a) {
        const std::string prefix = std::to_string(x) + " " + std::to_string(y) + " " + std::to_string(a) + " ";
        for (const auto& e : m.next_x(x, y, a)) {
          out += "TX: " + prefix + std::to_string(e.index) + " " + format_number(e.value) + "\n";
        }
      }
    }
  }
  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      for (std::uint32_t a = 0; a < m.num_actions; ++a) {
        const std::string prefix = std::to_string(x) + " " + std::to_string(y) + " " + std::to_string(a) + " ";
        const auto row = m.next_x(x, y, a);
        for (std::size_t k = 0; k < row.size(); ++k) {
          for (const auto& e : m.next_y(x, y, a, k)) {
            out += "TY: " + prefix + std::to_string(row[k].index) + " " + std::to_string(e.index) + " " +
                   format_number(e.value) + "\n";
          }
        }
      }
    }
  }
  for (std::uint32_t a = 0; a < m.num_actions; ++a) {
    for (std::uint32_t nx = 0; nx < m.num_x; ++nx) {
      for (std::uint32_t ny = 0; ny < m.num_y; ++ny) {
        for (const auto& e : m.observations(a, nx, ny)) {
          out += "O: " + std::to_string(a) + " " + std::to_string(nx) + " " + std::to_string(ny) + " " +
                 std::to_string(e.index) + " " + format_number(e.value) + "\n";
        }
      }
    }
  }
  for (std::uint32_t x = 0; x < m.num_x; ++x) {
    for (std::uint32_t y = 0; y < m.num_y; ++y) {
      for (std::uint32_t a = 0; a < m.num_actions; ++a) {
        const double r = m.reward_of(x, y, a);
        if (r != 0.0) {
          out += "R: " + std::to_string(x) + " " + std::to_string(y) + " " + std::to_string(a) + " " +
                 format_number(r) + "\n";
        }
      }
    }
  }
}

}  // namespace

std::string serialize(const ModelDocument& doc) {
  std::string out;
  if (doc.kind() == ModelKind::Factored) {
    out += "fmomdp: 1\n";
    write_header(out, doc);
    serialize_factored(out, doc.factored());
  } else {
    write_header(out, doc);
    serialize_flat(out, doc.flat());
  }
  return out;
}

ModelDocument load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return parse_document(buffer.str());
}

void save_document(const std::filesystem::path& path, const ModelDocument& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << serialize(doc);
  if (!out.flush()) throw IoError("failed writing '" + path.string() + "'");
}

FactoredModel as_factored(const ModelDocument& doc) {
  if (doc.kind() == ModelKind::Factored) return doc.factored();
  return from_flat(doc.flat());
}

std::uint64_t content_hash(const ModelDocument& doc) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : serialize(doc)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace fhhop
