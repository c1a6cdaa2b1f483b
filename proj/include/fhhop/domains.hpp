#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fhhop/factored_model.hpp"

namespace fhhop {

enum class DomainFamily { Tag, RockSample, Fvrs };

/// Grid cell; x grows eastward, y grows northward.
struct Cell {
  std::int32_t x = 0;
  std::int32_t y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct DomainSpec {
  DomainFamily family = DomainFamily::Tag;
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  /// Empty means the canonical layout when one exists, else seeded placement.
  std::vector<Cell> rocks;
  double sensor_half_distance = 20.0;
  double discount = 0.95;
  std::uint64_t seed = 0;
};

FactoredModel make_tag(double discount = 0.95);

/// x = y_pos*n + x_pos for grid cells, x = n*n is the terminal marker.
/// Bit m of y is 1 when rock m is good.
FactoredModel make_rocksample(std::uint32_t n, const std::vector<Cell>& rocks, double discount = 0.95,
                              double sensor_half_distance = 20.0);
FactoredModel make_fvrs(std::uint32_t n, const std::vector<Cell>& rocks, double discount = 0.95,
                        double sensor_half_distance = 20.0);

/// Probability that a check at Euclidean distance d reads the true value.
double sensor_accuracy(double distance, double half_distance = 20.0);

Cell rocksample_start(std::uint32_t n);

/// Published layouts for 7x7 with 8 rocks and 11x11 with 11 rocks.
std::optional<std::vector<Cell>> canonical_rocks(std::uint32_t n, std::uint32_t k);

/// k distinct cells drawn from the n x n grid by a seeded Fisher-Yates pass.
std::vector<Cell> seeded_rocks(std::uint32_t n, std::uint32_t k, std::uint64_t seed);

/// Rock layout a spec resolves to. Throws InvalidSpec on bad coordinates.
std::vector<Cell> resolve_rocks(const DomainSpec& spec);

FactoredModel make_domain(const DomainSpec& spec);

/// "tag", "rocksample_7_8", "fvrs_5_5" and the like.
DomainSpec parse_domain_name(const std::string& name);
std::string domain_name(const DomainSpec& spec);

/// Tag map cells in index order; rows 0-1 span columns 0-9, rows 2-4 span 5-7.
const std::vector<Cell>& tag_cells();

}  // namespace fhhop
