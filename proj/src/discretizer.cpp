#include "discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parallel.hpp"

namespace secoda {

BinEdges make_edges(double lo, double hi, int arity) {
  if (arity < 1) throw std::invalid_argument("bin arity must be positive");
  BinEdges e;
  e.arity = arity;
  e.lo = lo;
  e.hi = hi;
  if (!(lo <= hi)) throw std::invalid_argument("bin range with lo > hi");
  if (lo == hi) {
    // Constant attribute: one bin carrying every value.
    e.bins = 1;
    e.edges = {lo, hi};
    return e;
  }
  e.bins = arity;
  e.edges.resize(static_cast<size_t>(arity) + 1);
  double width = hi - lo;
  for (int k = 0; k <= arity; ++k) {
    e.edges[static_cast<size_t>(k)] = lo + width * k / arity;
  }
  // Guard against rounding at the ends; interior edges may land where
  // they like as long as they are monotone, which the formula gives.
  e.edges.front() = lo;
  e.edges.back() = hi;
  return e;
}

BinEdges bin_edges(std::span<const double> values,
                   std::span<const uint8_t> missing, int arity) {
  double lo = 0.0, hi = 0.0;
  bool seen = false;
  for (size_t i = 0; i < values.size(); ++i) {
    if (!missing.empty() && missing[i]) continue;
    if (!seen) {
      lo = hi = values[i];
      seen = true;
    } else {
      lo = std::min(lo, values[i]);
      hi = std::max(hi, values[i]);
    }
  }
  if (!seen) {
    BinEdges e;
    e.arity = arity;
    e.all_missing = true;
    return e;
  }
  return make_edges(lo, hi, arity);
}

int assign_bin(double value, const BinEdges& edges) {
  if (edges.bins == 0) throw std::domain_error("bin layout has no bins");
  if (!(value >= edges.lo) || !(value <= edges.hi)) {
    throw std::domain_error("value outside the discretized range");
  }
  if (edges.bins == 1) return 0;
  auto it = std::upper_bound(edges.edges.begin(), edges.edges.end(), value);
  int idx = static_cast<int>(it - edges.edges.begin()) - 1;
  // value == hi lands past the last edge; the last bin is closed.
  return std::min(idx, edges.bins - 1);
}

std::vector<ColumnRange> column_ranges(const Dataset& data,
                                       std::span<const uint32_t> rows) {
  std::vector<ColumnRange> out(data.cols());
  for (size_t col = 0; col < data.cols(); ++col) {
    if (data.schema().attributes[col].kind != AttrKind::Numerical) continue;
    const NumericColumn& column = data.numeric_column(col);
    ColumnRange r;
    r.numeric = true;
    for (uint32_t row : rows) {
      if (column.missing[row]) continue;
      double v = column.values[row];
      if (r.all_missing) {
        r.lo = r.hi = v;
        r.all_missing = false;
      } else {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
      }
    }
    out[col] = r;
  }
  return out;
}

TokenView discretize(const Dataset& data, std::span<const uint32_t> rows,
                     int arity, const std::vector<ColumnRange>& ranges,
                     int threads) {
  if (ranges.size() != data.cols()) {
    throw std::invalid_argument("ranges do not cover the dataset's columns");
  }
  TokenView view;
  view.rows = rows.size();
  view.cols = data.cols();
  view.tokens.resize(view.rows * view.cols);
  view.radix.resize(view.cols);

  for (size_t col = 0; col < data.cols(); ++col) {
    uint32_t* out = view.tokens.data() + col;
    size_t stride = view.cols;
    if (data.schema().attributes[col].kind == AttrKind::Categorical) {
      const CategoricalColumn& column = data.categorical_column(col);
      uint32_t missing_token =
          static_cast<uint32_t>(column.dictionary.size());
      view.radix[col] = static_cast<uint64_t>(missing_token) + 1;
      parallel_chunks(rows.size(), threads, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
          uint32_t row = rows[i];
          out[i * stride] =
              column.missing[row] ? missing_token : column.codes[row];
        }
      });
      continue;
    }
    const NumericColumn& column = data.numeric_column(col);
    const ColumnRange& r = ranges[col];
    if (!r.numeric) {
      throw std::invalid_argument("range entry does not match column kind");
    }
    if (r.all_missing) {
      view.radix[col] = 1;
      parallel_chunks(rows.size(), threads, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) out[i * stride] = 0;
      });
      continue;
    }
    BinEdges edges = make_edges(r.lo, r.hi, arity);
    view.radix[col] = edges.radix();
    uint32_t missing_token = edges.missing_token();
    parallel_chunks(rows.size(), threads, [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i) {
        uint32_t row = rows[i];
        out[i * stride] =
            column.missing[row]
                ? missing_token
                : static_cast<uint32_t>(assign_bin(column.values[row], edges));
      }
    });
  }
  return view;
}

}  // namespace secoda
