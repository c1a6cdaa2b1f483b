#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fhhop {

struct SparseEntry {
  std::uint32_t index = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

struct Triplet {
  std::size_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;
};

// Compressed row storage. Columns are strictly ascending within a row and
// stored values are never zero.
class SparseRows {
 public:
  SparseRows() : offsets_{0} {}

  /// Appends an entry to the row currently being built.
  void append(std::uint32_t col, double value);
  void close_row();
  void reserve(std::size_t rows, std::size_t entries);

  std::size_t num_rows() const noexcept { return offsets_.size() - 1; }
  std::size_t nnz() const noexcept { return entries_.size(); }

  std::span<const SparseEntry> row(std::size_t r) const noexcept {
    return {entries_.data() + offsets_[r], entries_.data() + offsets_[r + 1]};
  }
  std::size_t row_begin(std::size_t r) const noexcept { return offsets_[r]; }

  /// Value at (r, col) or 0 when absent.
  double at(std::size_t r, std::uint32_t col) const noexcept;

  /// Builds `num_rows` rows from unordered triplets. Later triplets for the
  /// same cell overwrite earlier ones; zero values are dropped.
  static SparseRows from_triplets(std::size_t num_rows, std::vector<Triplet> triplets);

  friend bool operator==(const SparseRows&, const SparseRows&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<SparseEntry> entries_;
};

}  // namespace fhhop
