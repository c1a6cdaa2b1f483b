#include "fhhop/sparse.hpp"

#include <algorithm>
#include <cassert>

namespace fhhop {

void SparseRows::append(std::uint32_t col, double value) {
  assert(entries_.size() == offsets_.back() || entries_.back().index < col);
  if (value == 0.0) return;
  entries_.push_back({col, value});
}

void SparseRows::close_row() { offsets_.push_back(entries_.size()); }

void SparseRows::reserve(std::size_t rows, std::size_t entries) {
  offsets_.reserve(rows + 1);
  entries_.reserve(entries);
}

double SparseRows::at(std::size_t r, std::uint32_t col) const noexcept {
  const auto cells = row(r);
  const auto it = std::lower_bound(cells.begin(), cells.end(), col,
                                   [](const SparseEntry& e, std::uint32_t c) { return e.index < c; });
  return (it != cells.end() && it->index == col) ? it->value : 0.0;
}

SparseRows SparseRows::from_triplets(std::size_t num_rows, std::vector<Triplet> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseRows out;
  out.reserve(num_rows, triplets.size());
  std::size_t next = 0;
  for (std::size_t r = 0; r < num_rows; ++r) {
    while (next < triplets.size() && triplets[next].row == r) {
      // last write wins among duplicates of the same cell
      std::size_t last = next;
      while (last + 1 < triplets.size() && triplets[last + 1].row == r &&
             triplets[last + 1].col == triplets[next].col) {
        ++last;
      }
      out.append(triplets[last].col, triplets[last].value);
      next = last + 1;
    }
    out.close_row();
  }
  return out;
}

}  // namespace fhhop
