#include "detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <utility>

#include "parallel.hpp"

namespace secoda {

void DetectionConfig::validate() const {
  if (!(anomaly_fraction > 0.0) || !(anomaly_fraction < 1.0)) {
    throw std::invalid_argument("anomaly fraction must be in (0, 1)");
  }
  if (!(prune_quantile > 0.0) || !(prune_quantile <= 1.0)) {
    throw std::invalid_argument("prune quantile must be in (0, 1]");
  }
  if (prune_start_iteration < 1) {
    throw std::invalid_argument("prune start iteration must be at least 1");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("max iterations must be at least 1");
  }
  if (initial_arity < 2) {
    throw std::invalid_argument("initial arity must be at least 2");
  }
  double tenths = initial_stop_point * 10.0;
  if (!(initial_stop_point >= 0.0) ||
      std::abs(tenths - std::round(tenths)) > 1e-9) {
    throw std::invalid_argument(
        "initial stop point must be a non-negative multiple of 0.1");
  }
  if (threads < 1) {
    throw std::invalid_argument("thread count must be at least 1");
  }
}

MaxIterationsError::MaxIterationsError(std::vector<IterationRecord> trace_)
    : Error("no convergence after " + std::to_string(trace_.size()) +
            " iterations"),
      trace(std::move(trace_)) {}

void schedule_step(int i, long& s_tenths, long& b, bool accelerated) {
  if (i <= 10) {
    s_tenths += 1;
    b += 1;
  } else {
    s_tenths += 10;
    b += accelerated ? s_tenths / 10 - 2 : 1;
  }
}

namespace {

enum class KeyTier { Packed64, Packed128, RowSort };

KeyTier pick_tier(const std::vector<uint64_t>& radix) {
  constexpr unsigned __int128 kAll = ~static_cast<unsigned __int128>(0);
  const unsigned __int128 limit64 = static_cast<unsigned __int128>(1) << 64;
  unsigned __int128 prod = 1;
  for (uint64_t r : radix) {
    if (prod > kAll / r) return KeyTier::RowSort;
    prod *= r;
  }
  return prod <= limit64 ? KeyTier::Packed64 : KeyTier::Packed128;
}

template <typename K>
std::vector<K> pack_keys(const TokenView& view, int threads) {
  std::vector<K> keys(view.rows);
  parallel_chunks(view.rows, threads, [&](size_t begin, size_t end) {
    for (size_t r = begin; r < end; ++r) {
      const uint32_t* row = view.tokens.data() + r * view.cols;
      K key = 0;
      for (size_t c = 0; c < view.cols; ++c) {
        key = key * static_cast<K>(view.radix[c]) + row[c];
      }
      keys[r] = key;
    }
  });
  return keys;
}

// Sorts (key, row) pairs and writes each run's length to every member.
template <typename K>
void count_by_key(std::vector<K>&& keys, std::vector<uint32_t>& cf) {
  size_t n = keys.size();
  std::vector<std::pair<K, uint32_t>> keyed(n);
  for (size_t r = 0; r < n; ++r) keyed[r] = {keys[r], static_cast<uint32_t>(r)};
  std::sort(keyed.begin(), keyed.end());
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && keyed[j].first == keyed[i].first) ++j;
    uint32_t run = static_cast<uint32_t>(j - i);
    for (size_t k = i; k < j; ++k) cf[keyed[k].second] = run;
    i = j;
  }
}

void count_by_row_sort(const TokenView& view, std::vector<uint32_t>& cf) {
  size_t n = view.rows;
  size_t bytes = view.cols * sizeof(uint32_t);
  const uint32_t* t = view.tokens.data();
  size_t cols = view.cols;
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Any strict total order groups equal tuples together; byte order is
  // the cheapest one.
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return std::memcmp(t + a * cols, t + b * cols, bytes) < 0;
  });
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n &&
           std::memcmp(t + order[j] * cols, t + order[i] * cols, bytes) == 0) {
      ++j;
    }
    uint32_t run = static_cast<uint32_t>(j - i);
    for (size_t k = i; k < j; ++k) cf[order[k]] = run;
    i = j;
  }
}

}  // namespace

std::optional<std::vector<uint64_t>> packed_keys64(const TokenView& view,
                                                   int threads) {
  if (view.cols == 0 || pick_tier(view.radix) != KeyTier::Packed64) {
    return std::nullopt;
  }
  return pack_keys<uint64_t>(view, threads);
}

std::vector<uint32_t> constellation_frequencies(const TokenView& view,
                                                int threads) {
  std::vector<uint32_t> cf(view.rows);
  if (view.rows == 0) return cf;
  if (view.cols == 0) {
    std::fill(cf.begin(), cf.end(), static_cast<uint32_t>(view.rows));
    return cf;
  }
  switch (pick_tier(view.radix)) {
    case KeyTier::Packed64:
      count_by_key(pack_keys<uint64_t>(view, threads), cf);
      break;
    case KeyTier::Packed128:
      count_by_key(pack_keys<unsigned __int128>(view, threads), cf);
      break;
    case KeyTier::RowSort:
      count_by_row_sort(view, cf);
      break;
  }
  return cf;
}

void ScoreAccumulator::start(size_t n, bool weighted_mode) {
  weighted = weighted_mode;
  iterations = 0;
  aas.assign(n, 0.0);
  cf_sum.clear();
  if (!weighted) cf_sum.assign(n, 0.0);
}

void ScoreAccumulator::update(std::span<const uint32_t> cf) {
  ++iterations;
  size_t n = aas.size();
  if (weighted) {
    if (iterations == 1) {
      for (size_t i = 0; i < n; ++i) aas[i] = cf[i];
    } else {
      for (size_t i = 0; i < n; ++i) aas[i] = 0.5 * (aas[i] + cf[i]);
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      cf_sum[i] += cf[i];
      aas[i] = cf_sum[i] / iterations;
    }
  }
}

void ScoreAccumulator::compact(std::span<const uint32_t> positions) {
  std::vector<double> next_aas(positions.size());
  for (size_t i = 0; i < positions.size(); ++i) {
    next_aas[i] = aas[positions[i]];
  }
  aas = std::move(next_aas);
  if (!weighted) {
    std::vector<double> next_sum(positions.size());
    for (size_t i = 0; i < positions.size(); ++i) {
      next_sum[i] = cf_sum[positions[i]];
    }
    cf_sum = std::move(next_sum);
  }
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("quantile level outside [0, 1]");
  }
  size_t n = values.size();
  size_t j = static_cast<size_t>(std::floor(q * static_cast<double>(n))) + 1;
  if (j > n) j = n;
  std::nth_element(values.begin(), values.begin() + (j - 1), values.end());
  return values[j - 1];
}

PruneOutcome prune_positions(std::span<const double> aas, double quantile) {
  PruneOutcome out;
  size_t m = aas.size();
  if (m == 0) {
    out.skipped = true;
    return out;
  }
  out.cutoff =
      nearest_rank_quantile(std::vector<double>(aas.begin(), aas.end()),
                            quantile);
  out.frozen.reserve(m / 16);
  out.retained.reserve(m);
  for (size_t pos = 0; pos < m; ++pos) {
    if (aas[pos] >= out.cutoff) {
      out.frozen.push_back(static_cast<uint32_t>(pos));
    } else {
      out.retained.push_back(static_cast<uint32_t>(pos));
    }
  }
  if (out.retained.size() < 2) {
    out.skipped = true;
    out.frozen.clear();
    out.retained.resize(m);
    std::iota(out.retained.begin(), out.retained.end(), 0);
  }
  return out;
}

DetectionResult detect(const Dataset& data, const DetectionConfig& config) {
  config.validate();
  if (data.cols() == 0) {
    throw std::invalid_argument("dataset has no attributes");
  }
  if (data.rows() == 0) {
    throw std::invalid_argument("dataset has no cases");
  }
  const size_t n0 = data.rows();

  std::vector<uint32_t> working(n0);
  std::iota(working.begin(), working.end(), 0);

  std::vector<double> final_scores(n0, 0.0);
  ScoreAccumulator scores;
  scores.start(n0, config.weighted_scores);

  std::vector<ColumnRange> global_ranges;
  if (config.range_policy == RangePolicy::Global) {
    global_ranges = column_ranges(data, working);
  }

  long b = config.initial_arity;
  long s_tenths = std::lround(config.initial_stop_point * 10.0);
  std::vector<IterationRecord> trace;

  int i = 0;
  while (true) {
    ++i;
    std::vector<ColumnRange> working_ranges;
    const std::vector<ColumnRange>* ranges = &global_ranges;
    if (config.range_policy == RangePolicy::WorkingSet) {
      working_ranges = column_ranges(data, working);
      ranges = &working_ranges;
    }
    TokenView view = discretize(data, working, static_cast<int>(b), *ranges,
                                config.threads);
    std::vector<uint32_t> cf = constellation_frequencies(view, config.threads);
    scores.update(cf);

    int arity_used = static_cast<int>(b);
    schedule_step(i, s_tenths, b, config.accelerated_stepping);
    // s stays exact: tenths are integers and every score is a dyadic
    // rational, so aas <= s never wobbles.
    double s = static_cast<double>(s_tenths) / 10.0;

    PruneOutcome pruned;
    bool prune_now =
        config.pruning_enabled && i >= config.prune_start_iteration;
    if (prune_now) {
      pruned = prune_positions(scores.aas, config.prune_quantile);
      if (pruned.skipped) prune_now = false;
    }

    // Convergence counts the set this iteration scored, before pruning
    // thins it for the next one.
    uint64_t below = 0;
    for (double a : scores.aas) {
      if (a <= s) ++below;
    }
    trace.push_back({i, arity_used, s, working.size(),
                     prune_now ? pruned.frozen.size() : uint64_t{0}, below});

    if (static_cast<double>(below) / static_cast<double>(n0) >
        config.anomaly_fraction) {
      break;
    }
    if (i >= config.max_iterations) throw MaxIterationsError(std::move(trace));

    if (prune_now) {
      for (uint32_t pos : pruned.frozen) {
        final_scores[working[pos]] = scores.aas[pos];
      }
      std::vector<uint32_t> next_working;
      next_working.reserve(pruned.retained.size());
      for (uint32_t pos : pruned.retained) {
        next_working.push_back(working[pos]);
      }
      working = std::move(next_working);
      scores.compact(pruned.retained);
    }
  }

  for (size_t k = 0; k < working.size(); ++k) {
    final_scores[working[k]] = scores.aas[k];
  }
  return {std::move(final_scores), i, std::move(trace)};
}

}  // namespace secoda
