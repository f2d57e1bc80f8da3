#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace secoda {

// Scores with binary ground truth. Scores keep the detector orientation:
// lower means more anomalous, and a case is predicted anomalous at
// threshold t iff score <= t.
struct ScoredLabels {
  std::vector<double> scores;
  std::vector<uint8_t> is_anomaly;

  size_t size() const { return scores.size(); }
  uint64_t positives() const;
  uint64_t negatives() const;

  void validate() const;         // shapes, finite scores, 0/1 labels
  void validate_for_curves() const;  // additionally: both classes present
};

struct ConfusionMatrix {
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

ConfusionMatrix confusion(const ScoredLabels& scored, double threshold);

// Members are empty where a denominator vanishes.
struct ThresholdMetrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> accuracy;
  std::optional<double> f1;
  std::optional<double> mcc;
  std::optional<double> kappa;
};

ThresholdMetrics threshold_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr, tpr;
};

// Points run from (0,0) to (1,1), one per distinct score; a score shared
// by both classes yields a diagonal jump. The area is computed in integer
// pair counts (ties count half) before a single division.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

RocCurve roc_curve(const ScoredLabels& scored);
double roc_auc(const ScoredLabels& scored);

// tpr where the curve first reaches the given fpr, linearly interpolated
// inside a segment.
double tpr_at_fpr(std::span<const RocPoint> points, double fpr);

enum class PartialAxis { Specificity, Sensitivity };

// Area of the ROC curve restricted to a specificity or sensitivity
// window [lo, hi]. Standardized rescales so that 0.5 is chance and 1 is
// perfect within the window.
double partial_auc(std::span<const RocPoint> points, PartialAxis axis,
                   double lo, double hi, bool standardized);

struct PrPoint {
  double recall, precision;
};

// Precision/recall curve anchored at (0, 1), one point per distinct
// score. The area uses step interpolation: sum of precision times the
// recall increment (average precision).
struct PrCurve {
  std::vector<PrPoint> points;
  double auc = 0.0;
};

PrCurve pr_curve(const ScoredLabels& scored);
double pr_auc(const ScoredLabels& scored);

enum class ThresholdCriterion { Youden, Mcc };

struct BestThreshold {
  double threshold = 0.0;
  double objective = 0.0;
  ConfusionMatrix cm;
  ThresholdMetrics metrics;
};

// Scans every distinct score as a candidate threshold; objective ties
// resolve to the smallest threshold.
BestThreshold best_threshold(const ScoredLabels& scored,
                             ThresholdCriterion criterion);

enum class CurveStatistic {
  RocAuc,
  PrAuc,
  PartialSpecificity,  // standardized, window from the options
  PartialSensitivity
};

struct BootstrapConfig {
  int resamples = 10000;
  uint64_t seed = 0;
  double level = 0.95;
  double range_lo = 0.9;  // partial statistics only
  double range_hi = 1.0;
  int threads = 1;

  void validate() const;
};

struct Interval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Stratified percentile bootstrap: every resample draws the anomalies
// and the normals independently with replacement, preserving both class
// counts. Resample r uses its own generator seeded from (seed, r), so
// results do not depend on the thread count.
Interval bootstrap_ci(const ScoredLabels& scored, CurveStatistic statistic,
                      const BootstrapConfig& config);

// Pointwise ROC band: the bootstrap interval of tpr at each grid fpr.
std::vector<Interval> roc_band(const ScoredLabels& scored,
                               std::span<const double> fpr_grid,
                               const BootstrapConfig& config);

struct PairedDiff {
  double diff = 0.0;  // observed statistic(a) - statistic(b)
  double p_value = 1.0;
};

// Paired bootstrap test for a difference in standardized partial AUC
// (specificity window from the options) between two scorings of the
// same cases. Two-sided; the attainable floor is 2 / resamples.
PairedDiff pauc_diff_test(const ScoredLabels& a, const ScoredLabels& b,
                          const BootstrapConfig& config);

// The statistic bootstrap_ci resamples, evaluated on the full sample.
double evaluate_statistic(const ScoredLabels& scored,
                          CurveStatistic statistic, double range_lo,
                          double range_hi);

}  // namespace secoda
