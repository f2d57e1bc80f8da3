#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "data_model.hpp"

namespace secoda {

// Where numerical bin ranges come from on each iteration.
enum class RangePolicy {
  WorkingSet,  // recompute lo/hi from the rows still being scored
  Global       // lo/hi fixed from the full original dataset
};

// Equiwidth bin layout of one numerical attribute.
//
// bins == arity normally; a constant attribute collapses to a single
// bin and an attribute with no observed values at all has bins == 0 and
// yields only the missing token.
struct BinEdges {
  int arity = 0;
  int bins = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> edges;  // bins + 1 boundaries when bins >= 1
  bool all_missing = false;

  // Token id reserved for Missing; one past the last bin.
  uint32_t missing_token() const {
    return static_cast<uint32_t>(bins == 0 ? 0 : bins);
  }
  uint32_t radix() const { return static_cast<uint32_t>(bins) + 1; }
};

BinEdges make_edges(double lo, double hi, int arity);
BinEdges bin_edges(std::span<const double> values,
                   std::span<const uint8_t> missing, int arity);

// Bin index of value. Bins are left-closed, right-open; the last bin
// also contains the upper boundary. Throws std::domain_error when value
// lies outside [lo, hi] or the layout has no bins.
int assign_bin(double value, const BinEdges& edges);

// Observed lo/hi of each attribute over the given rows. Categorical
// entries are placeholders (numeric == false).
struct ColumnRange {
  double lo = 0.0;
  double hi = 0.0;
  bool all_missing = true;
  bool numeric = false;
};

std::vector<ColumnRange> column_ranges(const Dataset& data,
                                       std::span<const uint32_t> rows);

// Dictionary-encoded discretization of a row subset.
//
// Every cell becomes a small token id: the bin index for numerical
// attributes, the dictionary code for categorical ones, and a reserved
// per-column id for Missing. Tokens of column c are < radix[c]. Two rows
// have equal token tuples iff they fall into the same constellation.
struct TokenView {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<uint32_t> tokens;  // row-major
  std::vector<uint64_t> radix;

  uint32_t at(size_t row, size_t col) const { return tokens[row * cols + col]; }
};

// ranges must come from column_ranges over these rows (WorkingSet
// policy) or over the original dataset (Global policy); either way each
// value of a listed row falls inside its column's range.
TokenView discretize(const Dataset& data, std::span<const uint32_t> rows,
                     int arity, const std::vector<ColumnRange>& ranges,
                     int threads = 1);

}  // namespace secoda
