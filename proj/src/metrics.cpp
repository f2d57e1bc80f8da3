#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "detector.hpp"  // nearest_rank_quantile
#include "parallel.hpp"
#include "rng.hpp"

namespace secoda {

uint64_t ScoredLabels::positives() const {
  uint64_t p = 0;
  for (uint8_t l : is_anomaly) p += l;
  return p;
}

uint64_t ScoredLabels::negatives() const {
  return is_anomaly.size() - positives();
}

void ScoredLabels::validate() const {
  if (scores.empty()) throw std::invalid_argument("no scored cases");
  if (scores.size() != is_anomaly.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument("scores must be finite");
    }
  }
  for (uint8_t l : is_anomaly) {
    if (l > 1) throw std::invalid_argument("labels must be 0 or 1");
  }
}

void ScoredLabels::validate_for_curves() const {
  validate();
  uint64_t p = positives();
  if (p == 0 || p == is_anomaly.size()) {
    throw std::invalid_argument("curves need both classes present");
  }
}

ConfusionMatrix confusion(const ScoredLabels& scored, double threshold) {
  scored.validate();
  ConfusionMatrix cm;
  for (size_t i = 0; i < scored.size(); ++i) {
    bool predicted = scored.scores[i] <= threshold;
    bool actual = scored.is_anomaly[i] != 0;
    if (predicted && actual) {
      ++cm.tp;
    } else if (predicted) {
      ++cm.fp;
    } else if (actual) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  return cm;
}

ThresholdMetrics threshold_metrics(const ConfusionMatrix& cm) {
  ThresholdMetrics m;
  auto ratio = [](uint64_t num, uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp);
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  uint64_t total = cm.tp + cm.fp + cm.fn + cm.tn;
  m.accuracy = ratio(cm.tp + cm.tn, total);
  m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  double d1 = static_cast<double>(cm.tp + cm.fp);
  double d2 = static_cast<double>(cm.tp + cm.fn);
  double d3 = static_cast<double>(cm.tn + cm.fp);
  double d4 = static_cast<double>(cm.tn + cm.fn);
  if (d1 > 0 && d2 > 0 && d3 > 0 && d4 > 0) {
    double num = static_cast<double>(cm.tp) * static_cast<double>(cm.tn) -
                 static_cast<double>(cm.fp) * static_cast<double>(cm.fn);
    m.mcc = num / std::sqrt(d1 * d2 * d3 * d4);
  }
  if (total > 0) {
    double t = static_cast<double>(total);
    double po = static_cast<double>(cm.tp + cm.tn) / t;
    double pe = (d1 * d2 + d4 * d3) / (t * t);
    if (pe != 1.0) m.kappa = (po - pe) / (1.0 - pe);
  }
  return m;
}

namespace {

// Per-case rank into the ascending distinct score list. Shared by the
// full-sample curves and the bootstrap so both count identically.
struct ScoreIndex {
  std::vector<double> distinct;
  std::vector<uint32_t> pos_rank;
  std::vector<uint32_t> neg_rank;
  std::vector<uint64_t> pos_count;
  std::vector<uint64_t> neg_count;

  uint64_t positives() const { return pos_rank.size(); }
  uint64_t negatives() const { return neg_rank.size(); }
};

ScoreIndex build_index(const ScoredLabels& scored) {
  ScoreIndex idx;
  idx.distinct = scored.scores;
  std::sort(idx.distinct.begin(), idx.distinct.end());
  idx.distinct.erase(std::unique(idx.distinct.begin(), idx.distinct.end()),
                     idx.distinct.end());
  idx.pos_count.assign(idx.distinct.size(), 0);
  idx.neg_count.assign(idx.distinct.size(), 0);
  for (size_t i = 0; i < scored.size(); ++i) {
    auto it = std::lower_bound(idx.distinct.begin(), idx.distinct.end(),
                               scored.scores[i]);
    uint32_t rank = static_cast<uint32_t>(it - idx.distinct.begin());
    if (scored.is_anomaly[i]) {
      idx.pos_rank.push_back(rank);
      ++idx.pos_count[rank];
    } else {
      idx.neg_rank.push_back(rank);
      ++idx.neg_count[rank];
    }
  }
  return idx;
}

// Pair-count area: every (anomaly, normal) pair contributes 2 when the
// anomaly scores lower and 1 on a tie; divide once at the end.
double auc_from_counts(std::span<const uint64_t> pos,
                       std::span<const uint64_t> neg, uint64_t P, uint64_t N) {
  uint64_t s = 0;
  uint64_t cum_neg = 0;
  for (size_t g = 0; g < pos.size(); ++g) {
    cum_neg += neg[g];
    s += pos[g] * (2 * (N - cum_neg) + neg[g]);
  }
  return static_cast<double>(s) /
         (2.0 * static_cast<double>(P) * static_cast<double>(N));
}

void roc_points_from_counts(std::span<const uint64_t> pos,
                            std::span<const uint64_t> neg, uint64_t P,
                            uint64_t N, std::vector<RocPoint>& out) {
  out.clear();
  out.push_back({0.0, 0.0});
  uint64_t cum_p = 0, cum_n = 0;
  for (size_t g = 0; g < pos.size(); ++g) {
    if (pos[g] + neg[g] == 0) continue;
    cum_p += pos[g];
    cum_n += neg[g];
    out.push_back({static_cast<double>(cum_n) / static_cast<double>(N),
                   static_cast<double>(cum_p) / static_cast<double>(P)});
  }
}

double pr_from_counts(std::span<const uint64_t> pos,
                      std::span<const uint64_t> neg, uint64_t P,
                      std::vector<PrPoint>* points_out) {
  if (points_out) {
    points_out->clear();
    points_out->push_back({0.0, 1.0});
  }
  double auc = 0.0;
  uint64_t cum_tp = 0, cum_pred = 0;
  double prev_recall = 0.0;
  for (size_t g = 0; g < pos.size(); ++g) {
    if (pos[g] + neg[g] == 0) continue;
    cum_tp += pos[g];
    cum_pred += pos[g] + neg[g];
    double recall = static_cast<double>(cum_tp) / static_cast<double>(P);
    double precision =
        static_cast<double>(cum_tp) / static_cast<double>(cum_pred);
    auc += (recall - prev_recall) * precision;
    prev_recall = recall;
    if (points_out) points_out->push_back({recall, precision});
  }
  return auc;
}

double window_chance_area(PartialAxis axis, double lo, double hi) {
  if (axis == PartialAxis::Specificity) {
    double f0 = 1.0 - hi, f1 = 1.0 - lo;
    return (f1 * f1 - f0 * f0) / 2.0;
  }
  return (hi - lo) - (hi * hi - lo * lo) / 2.0;
}

double integrate_window(std::span<const RocPoint> points, PartialAxis axis,
                        double win_lo, double win_hi) {
  double area = 0.0;
  for (size_t k = 1; k < points.size(); ++k) {
    double x0, y0, x1, y1;
    if (axis == PartialAxis::Specificity) {
      x0 = points[k - 1].fpr;
      y0 = points[k - 1].tpr;
      x1 = points[k].fpr;
      y1 = points[k].tpr;
    } else {
      x0 = points[k - 1].tpr;
      y0 = 1.0 - points[k - 1].fpr;
      x1 = points[k].tpr;
      y1 = 1.0 - points[k].fpr;
    }
    if (x1 <= x0) continue;
    double a = std::max(x0, win_lo);
    double b = std::min(x1, win_hi);
    if (b <= a) continue;
    double slope = (y1 - y0) / (x1 - x0);
    double ya = y0 + slope * (a - x0);
    double yb = y0 + slope * (b - x0);
    area += 0.5 * (ya + yb) * (b - a);
  }
  return area;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
  size_t n = sorted.size();
  size_t j = static_cast<size_t>(std::floor(q * static_cast<double>(n))) + 1;
  if (j > n) j = n;
  return sorted[j - 1];
}

}  // namespace

RocCurve roc_curve(const ScoredLabels& scored) {
  scored.validate_for_curves();
  ScoreIndex idx = build_index(scored);
  RocCurve curve;
  roc_points_from_counts(idx.pos_count, idx.neg_count, idx.positives(),
                         idx.negatives(), curve.points);
  curve.auc = auc_from_counts(idx.pos_count, idx.neg_count, idx.positives(),
                              idx.negatives());
  return curve;
}

double roc_auc(const ScoredLabels& scored) { return roc_curve(scored).auc; }

double tpr_at_fpr(std::span<const RocPoint> points, double fpr) {
  if (points.empty()) throw std::invalid_argument("empty curve");
  if (!(fpr >= 0.0 && fpr <= 1.0)) {
    throw std::invalid_argument("fpr outside [0, 1]");
  }
  if (fpr <= points.front().fpr) return points.front().tpr;
  for (size_t k = 1; k < points.size(); ++k) {
    if (points[k].fpr >= fpr) {
      double f0 = points[k - 1].fpr, f1 = points[k].fpr;
      double t0 = points[k - 1].tpr, t1 = points[k].tpr;
      double w = (fpr - f0) / (f1 - f0);
      return t0 + w * (t1 - t0);
    }
  }
  return points.back().tpr;
}

double partial_auc(std::span<const RocPoint> points, PartialAxis axis,
                   double lo, double hi, bool standardized) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw std::invalid_argument("partial window must satisfy 0 <= lo < hi <= 1");
  }
  double win_lo = axis == PartialAxis::Specificity ? 1.0 - hi : lo;
  double win_hi = axis == PartialAxis::Specificity ? 1.0 - lo : hi;
  double raw = integrate_window(points, axis, win_lo, win_hi);
  if (!standardized) return raw;
  double width = hi - lo;
  double chance = window_chance_area(axis, lo, hi);
  return 0.5 * (1.0 + (raw - chance) / (width - chance));
}

PrCurve pr_curve(const ScoredLabels& scored) {
  scored.validate_for_curves();
  ScoreIndex idx = build_index(scored);
  PrCurve curve;
  curve.auc = pr_from_counts(idx.pos_count, idx.neg_count, idx.positives(),
                             &curve.points);
  return curve;
}

double pr_auc(const ScoredLabels& scored) {
  scored.validate_for_curves();
  ScoreIndex idx = build_index(scored);
  return pr_from_counts(idx.pos_count, idx.neg_count, idx.positives(),
                        nullptr);
}

BestThreshold best_threshold(const ScoredLabels& scored,
                             ThresholdCriterion criterion) {
  scored.validate_for_curves();
  ScoreIndex idx = build_index(scored);
  uint64_t P = idx.positives(), N = idx.negatives();
  ConfusionMatrix cm{0, 0, P, N};
  bool found = false;
  BestThreshold best;
  for (size_t g = 0; g < idx.distinct.size(); ++g) {
    cm.tp += idx.pos_count[g];
    cm.fn -= idx.pos_count[g];
    cm.fp += idx.neg_count[g];
    cm.tn -= idx.neg_count[g];
    ThresholdMetrics m = threshold_metrics(cm);
    double objective;
    if (criterion == ThresholdCriterion::Youden) {
      objective = *m.sensitivity + *m.specificity - 1.0;
    } else {
      if (!m.mcc) continue;
      objective = *m.mcc;
    }
    if (!found || objective > best.objective) {
      found = true;
      best = {idx.distinct[g], objective, cm, m};
    }
  }
  if (!found) {
    throw std::invalid_argument("criterion undefined at every threshold");
  }
  return best;
}

void BootstrapConfig::validate() const {
  if (resamples < 100) {
    throw std::invalid_argument("bootstrap needs at least 100 resamples");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must be in (0, 1)");
  }
  if (!(range_lo >= 0.0 && range_lo < range_hi && range_hi <= 1.0)) {
    throw std::invalid_argument("partial window must satisfy 0 <= lo < hi <= 1");
  }
  if (threads < 1) {
    throw std::invalid_argument("thread count must be at least 1");
  }
}

double evaluate_statistic(const ScoredLabels& scored,
                          CurveStatistic statistic, double range_lo,
                          double range_hi) {
  switch (statistic) {
    case CurveStatistic::RocAuc:
      return roc_auc(scored);
    case CurveStatistic::PrAuc:
      return pr_auc(scored);
    case CurveStatistic::PartialSpecificity: {
      RocCurve c = roc_curve(scored);
      return partial_auc(c.points, PartialAxis::Specificity, range_lo,
                         range_hi, true);
    }
    case CurveStatistic::PartialSensitivity: {
      RocCurve c = roc_curve(scored);
      return partial_auc(c.points, PartialAxis::Sensitivity, range_lo,
                         range_hi, true);
    }
  }
  throw std::invalid_argument("unknown statistic");
}

namespace {

// One stratified resample drawn into count histograms. The draw order
// (all positives, then all negatives) is part of the stream contract.
void draw_resample(const ScoreIndex& idx, Rng& rng,
                   std::vector<uint64_t>& pos_count,
                   std::vector<uint64_t>& neg_count) {
  std::fill(pos_count.begin(), pos_count.end(), 0);
  std::fill(neg_count.begin(), neg_count.end(), 0);
  uint64_t P = idx.positives(), N = idx.negatives();
  for (uint64_t d = 0; d < P; ++d) {
    ++pos_count[idx.pos_rank[static_cast<size_t>(rng.below(P))]];
  }
  for (uint64_t d = 0; d < N; ++d) {
    ++neg_count[idx.neg_rank[static_cast<size_t>(rng.below(N))]];
  }
}

double statistic_from_counts(CurveStatistic statistic,
                             std::span<const uint64_t> pos,
                             std::span<const uint64_t> neg, uint64_t P,
                             uint64_t N, double range_lo, double range_hi,
                             std::vector<RocPoint>& scratch) {
  switch (statistic) {
    case CurveStatistic::RocAuc:
      return auc_from_counts(pos, neg, P, N);
    case CurveStatistic::PrAuc:
      return pr_from_counts(pos, neg, P, nullptr);
    case CurveStatistic::PartialSpecificity:
      roc_points_from_counts(pos, neg, P, N, scratch);
      return partial_auc(scratch, PartialAxis::Specificity, range_lo,
                         range_hi, true);
    case CurveStatistic::PartialSensitivity:
      roc_points_from_counts(pos, neg, P, N, scratch);
      return partial_auc(scratch, PartialAxis::Sensitivity, range_lo,
                         range_hi, true);
  }
  throw std::invalid_argument("unknown statistic");
}

}  // namespace

Interval bootstrap_ci(const ScoredLabels& scored, CurveStatistic statistic,
                      const BootstrapConfig& config) {
  config.validate();
  scored.validate_for_curves();
  Interval out;
  out.point =
      evaluate_statistic(scored, statistic, config.range_lo, config.range_hi);

  ScoreIndex idx = build_index(scored);
  uint64_t P = idx.positives(), N = idx.negatives();
  size_t K = idx.distinct.size();
  std::vector<double> stats(static_cast<size_t>(config.resamples));
  parallel_chunks(
      stats.size(), config.threads, [&](size_t begin, size_t end) {
        std::vector<uint64_t> pos_count(K), neg_count(K);
        std::vector<RocPoint> scratch;
        for (size_t r = begin; r < end; ++r) {
          Rng rng(stream_seed(config.seed, r));
          draw_resample(idx, rng, pos_count, neg_count);
          stats[r] = statistic_from_counts(statistic, pos_count, neg_count, P,
                                           N, config.range_lo,
                                           config.range_hi, scratch);
        }
      });
  std::sort(stats.begin(), stats.end());
  double alpha = 1.0 - config.level;
  out.lo = sorted_quantile(stats, alpha / 2.0);
  out.hi = sorted_quantile(stats, 1.0 - alpha / 2.0);
  return out;
}

std::vector<Interval> roc_band(const ScoredLabels& scored,
                               std::span<const double> fpr_grid,
                               const BootstrapConfig& config) {
  config.validate();
  scored.validate_for_curves();
  if (fpr_grid.empty()) throw std::invalid_argument("empty fpr grid");
  for (double f : fpr_grid) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument("fpr outside [0, 1]");
    }
  }

  RocCurve full = roc_curve(scored);
  ScoreIndex idx = build_index(scored);
  uint64_t P = idx.positives(), N = idx.negatives();
  size_t K = idx.distinct.size();
  size_t R = static_cast<size_t>(config.resamples);
  size_t G = fpr_grid.size();

  // Grid-major: tprs[g * R + r].
  std::vector<double> tprs(G * R);
  parallel_chunks(R, config.threads, [&](size_t begin, size_t end) {
    std::vector<uint64_t> pos_count(K), neg_count(K);
    std::vector<RocPoint> scratch;
    for (size_t r = begin; r < end; ++r) {
      Rng rng(stream_seed(config.seed, r));
      draw_resample(idx, rng, pos_count, neg_count);
      roc_points_from_counts(pos_count, neg_count, P, N, scratch);
      for (size_t g = 0; g < G; ++g) {
        tprs[g * R + r] = tpr_at_fpr(scratch, fpr_grid[g]);
      }
    }
  });

  double alpha = 1.0 - config.level;
  std::vector<Interval> out(G);
  std::vector<double> column(R);
  for (size_t g = 0; g < G; ++g) {
    std::copy(tprs.begin() + g * R, tprs.begin() + (g + 1) * R,
              column.begin());
    std::sort(column.begin(), column.end());
    out[g].point = tpr_at_fpr(full.points, fpr_grid[g]);
    out[g].lo = sorted_quantile(column, alpha / 2.0);
    out[g].hi = sorted_quantile(column, 1.0 - alpha / 2.0);
  }
  return out;
}

PairedDiff pauc_diff_test(const ScoredLabels& a, const ScoredLabels& b,
                          const BootstrapConfig& config) {
  config.validate();
  a.validate_for_curves();
  b.validate_for_curves();
  if (a.size() != b.size() || a.is_anomaly != b.is_anomaly) {
    throw std::invalid_argument("paired test needs identical labels");
  }

  PairedDiff out;
  out.diff = evaluate_statistic(a, CurveStatistic::PartialSpecificity,
                                config.range_lo, config.range_hi) -
             evaluate_statistic(b, CurveStatistic::PartialSpecificity,
                                config.range_lo, config.range_hi);

  ScoreIndex ia = build_index(a);
  ScoreIndex ib = build_index(b);
  uint64_t P = ia.positives(), N = ia.negatives();
  size_t R = static_cast<size_t>(config.resamples);
  std::vector<double> diffs(R);
  parallel_chunks(R, config.threads, [&](size_t begin, size_t end) {
    std::vector<uint64_t> pos_a(ia.distinct.size()), neg_a(ia.distinct.size());
    std::vector<uint64_t> pos_b(ib.distinct.size()), neg_b(ib.distinct.size());
    std::vector<RocPoint> scratch;
    for (size_t r = begin; r < end; ++r) {
      std::fill(pos_a.begin(), pos_a.end(), 0);
      std::fill(neg_a.begin(), neg_a.end(), 0);
      std::fill(pos_b.begin(), pos_b.end(), 0);
      std::fill(neg_b.begin(), neg_b.end(), 0);
      Rng rng(stream_seed(config.seed, r));
      // Paired draws: the same case index feeds both scorings.
      for (uint64_t d = 0; d < P; ++d) {
        size_t pick = static_cast<size_t>(rng.below(P));
        ++pos_a[ia.pos_rank[pick]];
        ++pos_b[ib.pos_rank[pick]];
      }
      for (uint64_t d = 0; d < N; ++d) {
        size_t pick = static_cast<size_t>(rng.below(N));
        ++neg_a[ia.neg_rank[pick]];
        ++neg_b[ib.neg_rank[pick]];
      }
      double sa = statistic_from_counts(CurveStatistic::PartialSpecificity,
                                        pos_a, neg_a, P, N, config.range_lo,
                                        config.range_hi, scratch);
      double sb = statistic_from_counts(CurveStatistic::PartialSpecificity,
                                        pos_b, neg_b, P, N, config.range_lo,
                                        config.range_hi, scratch);
      diffs[r] = sa - sb;
    }
  });

  size_t le = 0, ge = 0;
  for (double d : diffs) {
    if (d <= 0.0) ++le;
    if (d >= 0.0) ++ge;
  }
  double p = 2.0 * static_cast<double>(std::min(le, ge)) /
             static_cast<double>(R);
  out.p_value = std::clamp(p, 2.0 / static_cast<double>(R), 1.0);
  return out;
}

}  // namespace secoda
