#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "data_model.hpp"
#include "discretizer.hpp"
#include "errors.hpp"

namespace secoda {

struct DetectionConfig {
  double anomaly_fraction = 0.003;
  double prune_quantile = 0.95;
  int prune_start_iteration = 11;
  bool pruning_enabled = true;
  bool accelerated_stepping = true;
  bool weighted_scores = true;
  RangePolicy range_policy = RangePolicy::WorkingSet;
  int max_iterations = 1000;
  int initial_arity = 2;
  double initial_stop_point = 1.0;
  int threads = 1;

  void validate() const;
};

struct IterationRecord {
  int iteration;    // 1-based
  int arity;        // b the iteration discretized with
  double stop_point; // s after this iteration's schedule update
  uint64_t working; // working set size the iteration scored (before pruning)
  uint64_t pruned;  // cases frozen by pruning in this iteration
  uint64_t below_s; // working cases with aas <= stop_point
};

struct DetectionResult {
  std::vector<double> scores;  // one aas per input case, low = anomalous
  int iterations = 0;
  std::vector<IterationRecord> trace;
};

// The iteration cap was hit before the stop criterion. Carries the trace
// for diagnosis.
struct MaxIterationsError : Error {
  explicit MaxIterationsError(std::vector<IterationRecord> trace_);
  std::vector<IterationRecord> trace;
};

DetectionResult detect(const Dataset& data, const DetectionConfig& config);

/* Pieces of the loop, exposed for direct testing. */

// Advances the stop point (kept in exact tenths) and the arity after
// iteration i. The first ten iterations step s by 0.1 and b by 1; later
// ones step s by 1 and, when accelerated, b by the updated s minus 2.
void schedule_step(int i, long& s_tenths, long& b, bool accelerated);

// Constellation frequency of every view row: the number of rows whose
// token tuples are identical. A row always counts itself, so cf >= 1.
std::vector<uint32_t> constellation_frequencies(const TokenView& view,
                                                int threads = 1);

// Injective key per row when every tuple packs into 64 bits (the product
// of the radices fits); nullopt otherwise. Keys are equal iff tuples are.
std::optional<std::vector<uint64_t>> packed_keys64(const TokenView& view,
                                                   int threads = 1);

// Per-case score tracking across iterations. Weighted halves the past
// each iteration: aas_i = (aas_{i-1} + cf_i) / 2 with aas_1 = cf_1.
// Unweighted keeps the arithmetic mean of all cf seen so far.
struct ScoreAccumulator {
  bool weighted = true;
  int iterations = 0;
  std::vector<double> aas;
  std::vector<double> cf_sum;  // unweighted mode only

  void start(size_t n, bool weighted_mode);
  void update(std::span<const uint32_t> cf);
  // Keeps only the given positions, preserving their order.
  void compact(std::span<const uint32_t> positions);
};

// Nearest-rank quantile: the value at 1-based index floor(q*n)+1 of the
// sorted sample, clamped to the last element. values is consumed.
double nearest_rank_quantile(std::vector<double> values, double q);

// Splits working-set positions by the prune cutoff. Positions whose
// score reaches the quantile value freeze; the rest stay, in order. The
// split is skipped entirely when fewer than 2 positions would remain.
struct PruneOutcome {
  bool skipped = false;
  double cutoff = 0.0;
  std::vector<uint32_t> frozen;
  std::vector<uint32_t> retained;
};

PruneOutcome prune_positions(std::span<const double> aas, double quantile);

}  // namespace secoda
