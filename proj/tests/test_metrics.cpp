#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "metrics.hpp"
#include "rng.hpp"

using namespace secoda;

namespace {

ScoredLabels make(std::vector<double> scores, std::vector<int> anomaly) {
  ScoredLabels s;
  s.scores = std::move(scores);
  s.is_anomaly.assign(anomaly.begin(), anomaly.end());
  return s;
}

ScoredLabels random_scored(Rng& rng, size_t n, int distinct) {
  ScoredLabels s;
  s.scores.resize(n);
  s.is_anomaly.resize(n);
  size_t positives = 1 + rng.below(n - 1);
  for (size_t i = 0; i < n; ++i) {
    s.scores[i] = 1.0 + static_cast<double>(rng.below(distinct));
    s.is_anomaly[i] = i < positives ? 1 : 0;
  }
  return s;
}

// Mann-Whitney oracle: concordant (anomaly scored lower) counts 1, ties
// count 1/2, over all (anomaly, normal) pairs.
double pair_count_auc(const ScoredLabels& s) {
  double num = 0.0;
  uint64_t pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (!s.is_anomaly[i]) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (s.is_anomaly[j]) continue;
      ++pairs;
      if (s.scores[i] < s.scores[j]) num += 1.0;
      else if (s.scores[i] == s.scores[j]) num += 0.5;
    }
  }
  return num / static_cast<double>(pairs);
}

// piecewise-linear tpr as a function of fpr, for Riemann integration
double tpr_of(const std::vector<RocPoint>& pts, double fpr) {
  return tpr_at_fpr(pts, fpr);
}

}  // namespace

TEST_CASE("confusion thresholds predict anomaly at low scores") {
  ScoredLabels s = make({1.0, 99.0}, {1, 0});
  ConfusionMatrix at1 = confusion(s, 1.0);
  CHECK(at1.tp == 1);
  CHECK(at1.tn == 1);
  CHECK(at1.fp == 0);
  CHECK(at1.fn == 0);
  ConfusionMatrix below = confusion(s, 0.5);
  CHECK(below.tp == 0);
  CHECK(below.fp == 0);
  CHECK(below.fn == 1);
  CHECK(below.tn == 1);
  ConfusionMatrix above = confusion(s, 100.0);
  CHECK(above.fn == 0);
  CHECK(above.tn == 0);
}

TEST_CASE("perfect separation and pure ties hit the AUC extremes") {
  CHECK(roc_auc(make({1, 2, 8, 9}, {1, 1, 0, 0})) == 1.0);
  CHECK(roc_auc(make({5, 5, 5, 5}, {1, 1, 0, 0})) == 0.5);
  CHECK(roc_auc(make({8, 9, 1, 2}, {1, 1, 0, 0})) == 0.0);
}

TEST_CASE("interleaved example scores three of four pairs concordant") {
  CHECK(roc_auc(make({1, 3, 2, 4}, {1, 1, 0, 0})) == 0.75);
}

TEST_CASE("roc auc equals the pair-counting statistic") {
  Rng rng(211);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 2 + rng.below(499);
    int distinct = 1 + static_cast<int>(rng.below(40));
    ScoredLabels s = random_scored(rng, n, distinct);
    double fast = roc_auc(s);
    double slow = pair_count_auc(s);
    CHECK(std::abs(fast - slow) <= 1e-12);
  }
}

TEST_CASE("auc ignores strictly monotone score transforms") {
  Rng rng(223);
  ScoredLabels s = random_scored(rng, 300, 12);
  double before = roc_auc(s);
  ScoredLabels t = s;
  for (double& v : t.scores) v = 2.0 * v + 1.0;
  CHECK(roc_auc(t) == before);
}

TEST_CASE("roc curve starts at the origin and ends at one-one") {
  Rng rng(227);
  ScoredLabels s = random_scored(rng, 100, 7);
  RocCurve c = roc_curve(s);
  REQUIRE(!c.points.empty());
  CHECK(c.points.front().fpr == 0.0);
  CHECK(c.points.front().tpr == 0.0);
  CHECK(c.points.back().fpr == 1.0);
  CHECK(c.points.back().tpr == 1.0);
  for (size_t i = 1; i < c.points.size(); ++i) {
    CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
    CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
  }
}

TEST_CASE("single-class inputs are rejected for curves") {
  CHECK_THROWS_AS(roc_auc(make({1, 2}, {1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(pr_auc(make({1, 2}, {0, 0})), std::invalid_argument);
}

TEST_CASE("partial auc over the full range is the full auc") {
  Rng rng(229);
  for (int trial = 0; trial < 50; ++trial) {
    ScoredLabels s = random_scored(rng, 200, 9);
    RocCurve c = roc_curve(s);
    double full = partial_auc(c.points, PartialAxis::Specificity, 0.0, 1.0,
                              false);
    CHECK(std::abs(full - c.auc) <= 1e-12);
  }
}

TEST_CASE("standardized partial auc pins perfect and chance") {
  // perfect classifier
  ScoredLabels perfect = make({1, 2, 8, 9}, {1, 1, 0, 0});
  RocCurve pc = roc_curve(perfect);
  CHECK(partial_auc(pc.points, PartialAxis::Specificity, 0.9, 1.0, true) ==
        1.0);
  // pure-tie scores produce the chance diagonal
  ScoredLabels chance = make({5, 5, 5, 5}, {1, 1, 0, 0});
  RocCurve cc = roc_curve(chance);
  CHECK(partial_auc(cc.points, PartialAxis::Specificity, 0.9, 1.0, true) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(partial_auc(cc.points, PartialAxis::Sensitivity, 0.9, 1.0, true) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("windowed trapezoids agree with a fine riemann sum") {
  // curve through (0,0) -> (0.1, 0.9) -> (1,1): linear inside segments
  std::vector<RocPoint> pts = {{0.0, 0.0}, {0.1, 0.9}, {1.0, 1.0}};
  // specificity window [0.9, 1] is the fpr window [0, 0.1]
  const int grid = 1000000;
  double lo = 0.0, hi = 0.1;
  double riemann = 0.0;
  for (int i = 0; i < grid; ++i) {
    double x = lo + (hi - lo) * (i + 0.5) / grid;
    riemann += tpr_of(pts, x);
  }
  riemann *= (hi - lo) / grid;
  double raw = partial_auc(pts, PartialAxis::Specificity, 0.9, 1.0, false);
  CHECK(raw == doctest::Approx(riemann).epsilon(1e-6));

  // standardized per McClish: 0.5 * (1 + (raw - chance) / (width - chance))
  double chance = 0.5 * (hi * hi - lo * lo);
  double width = hi - lo;
  double expected = 0.5 * (1.0 + (raw - chance) / (width - chance));
  CHECK(partial_auc(pts, PartialAxis::Specificity, 0.9, 1.0, true) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sensitivity-axis partial auc integrates over tpr") {
  // same polyline, sensitivity window [0.9, 1.0]: area of (1 - fpr) over
  // tpr from 0.9 to 1. Hand value: fpr(tpr) rises 0.1->1 as tpr 0.9->1.
  std::vector<RocPoint> pts = {{0.0, 0.0}, {0.1, 0.9}, {1.0, 1.0}};
  double raw = partial_auc(pts, PartialAxis::Sensitivity, 0.9, 1.0, false);
  // br integral of (1 - fpr) dtpr over the second segment:
  // fpr = 0.1 + 0.9*(tpr-0.9)/0.1; mean of (1-fpr) over the segment =
  // 1 - (0.1+1)/2 = 0.45; width 0.1 -> 0.045
  CHECK(raw == doctest::Approx(0.045).epsilon(1e-12));
}

TEST_CASE("degenerate partial windows are rejected") {
  std::vector<RocPoint> pts = {{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(partial_auc(pts, PartialAxis::Specificity, 0.9, 0.9, false),
                  std::invalid_argument);
  CHECK_THROWS_AS(partial_auc(pts, PartialAxis::Specificity, -0.1, 1.0, false),
                  std::invalid_argument);
}

TEST_CASE("pr auc is one for perfect separation, prevalence for ties") {
  CHECK(pr_auc(make({1, 2, 8, 9}, {1, 1, 0, 0})) == 1.0);
  CHECK(pr_auc(make({5, 5, 5, 5, 5}, {1, 0, 0, 0, 0})) ==
        doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("pr auc matches exhaustive threshold enumeration") {
  // step interpolation: AP = sum (R_k - R_{k-1}) * P_k over distinct
  // thresholds in ascending score order
  Rng rng(233);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 2 + rng.below(60);
    ScoredLabels s = random_scored(rng, n, 8);
    std::vector<double> distinct = s.scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    double prev_recall = 0.0;
    double ap = 0.0;
    double positives = static_cast<double>(s.positives());
    for (double t : distinct) {
      ConfusionMatrix cm = confusion(s, t);
      double recall = static_cast<double>(cm.tp) / positives;
      double precision =
          static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
      ap += (recall - prev_recall) * precision;
      prev_recall = recall;
    }
    CHECK(pr_auc(s) == doctest::Approx(ap).epsilon(1e-12));
  }
}

TEST_CASE("threshold metrics match their formulas on random matrices") {
  Rng rng(239);
  for (int trial = 0; trial < 1000; ++trial) {
    ConfusionMatrix cm{rng.below(50), rng.below(50), rng.below(50),
                       rng.below(50)};
    ThresholdMetrics m = threshold_metrics(cm);
    double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
    double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
    if (tp + fn > 0) {
      CHECK(*m.sensitivity == doctest::Approx(tp / (tp + fn)).epsilon(1e-15));
    } else {
      CHECK(!m.sensitivity);
    }
    if (tn + fp > 0) {
      CHECK(*m.specificity == doctest::Approx(tn / (tn + fp)).epsilon(1e-15));
    } else {
      CHECK(!m.specificity);
    }
    if (tp + fp > 0) {
      CHECK(*m.precision == doctest::Approx(tp / (tp + fp)).epsilon(1e-15));
    } else {
      CHECK(!m.precision);
    }
    double total = tp + fp + fn + tn;
    if (total > 0) {
      CHECK(*m.accuracy == doctest::Approx((tp + tn) / total).epsilon(1e-15));
    }
    if (2 * tp + fp + fn > 0) {
      CHECK(*m.f1 ==
            doctest::Approx(2 * tp / (2 * tp + fp + fn)).epsilon(1e-15));
    } else {
      CHECK(!m.f1);
    }
    if ((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn) > 0) {
      double mcc = (tp * tn - fp * fn) /
                   std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
      CHECK(*m.mcc == doctest::Approx(mcc).epsilon(1e-12));
      CHECK(*m.mcc >= -1.0);
      CHECK(*m.mcc <= 1.0);
    } else {
      CHECK(!m.mcc);
    }
    if (m.kappa) {
      CHECK(*m.kappa >= -1.0);
      CHECK(*m.kappa <= 1.0);
    }
  }
}

TEST_CASE("the worked confusion example lands exactly") {
  ThresholdMetrics m = threshold_metrics(ConfusionMatrix{90, 10, 10, 890});
  REQUIRE(m.mcc.has_value());
  CHECK(*m.mcc == 80000.0 / 90000.0);
  CHECK(*m.sensitivity == 0.9);
  CHECK(*m.precision == 0.9);
}

TEST_CASE("all-correct and degenerate matrices behave") {
  ThresholdMetrics m = threshold_metrics(ConfusionMatrix{1, 0, 0, 1});
  CHECK(*m.sensitivity == 1.0);
  CHECK(*m.specificity == 1.0);
  CHECK(*m.precision == 1.0);
  CHECK(*m.accuracy == 1.0);
  CHECK(*m.f1 == 1.0);
  CHECK(*m.mcc == 1.0);
  CHECK(*m.kappa == 1.0);

  ThresholdMetrics none = threshold_metrics(ConfusionMatrix{0, 0, 5, 5});
  CHECK(!none.precision);  // tp + fp = 0
}

TEST_CASE("best threshold maximizes its criterion over a sweep") {
  Rng rng(241);
  for (int trial = 0; trial < 100; ++trial) {
    ScoredLabels s = random_scored(rng, 60, 10);
    for (ThresholdCriterion crit :
         {ThresholdCriterion::Youden, ThresholdCriterion::Mcc}) {
      BestThreshold best = best_threshold(s, crit);
      // exhaustive check over all distinct scores
      std::vector<double> distinct = s.scores;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()),
                     distinct.end());
      double best_obj = -2.0;
      double best_t = 0.0;
      for (double t : distinct) {
        ThresholdMetrics m = threshold_metrics(confusion(s, t));
        std::optional<double> obj;
        if (crit == ThresholdCriterion::Youden) {
          if (m.sensitivity && m.specificity) {
            obj = *m.sensitivity + *m.specificity - 1.0;
          }
        } else {
          obj = m.mcc;
        }
        if (obj && *obj > best_obj) {
          best_obj = *obj;
          best_t = t;
        }
      }
      CHECK(best.objective == doctest::Approx(best_obj).epsilon(1e-12));
      CHECK(best.threshold == best_t);
    }
  }
}

TEST_CASE("threshold ties resolve to the smaller threshold") {
  // both candidate thresholds achieve J = 1 - 0 = ... construct ties:
  // scores 1,2 anomalies; 3,4 normals: t=2 gives J=1; t=1 gives J=0.5.
  // For a genuine tie use duplicated structure:
  ScoredLabels s = make({1, 3, 1, 3}, {1, 1, 0, 0});
  // t=1: sens 0.5 spec 0.5 J 0; t=3: sens 1 spec 0 J 0 -- tie at J=0
  BestThreshold best = best_threshold(s, ThresholdCriterion::Youden);
  CHECK(best.objective == doctest::Approx(0.0));
  CHECK(best.threshold == 1.0);
}

TEST_CASE("perfect separation yields the anomaly boundary threshold") {
  ScoredLabels s = make({1, 2, 8, 9}, {1, 1, 0, 0});
  BestThreshold best = best_threshold(s, ThresholdCriterion::Youden);
  CHECK(best.threshold == 2.0);
  CHECK(best.objective == 1.0);
  CHECK(best.cm.tp == 2);
  CHECK(best.cm.tn == 2);
}

TEST_CASE("bootstrap intervals are deterministic in the seed") {
  Rng rng(251);
  ScoredLabels s = random_scored(rng, 120, 9);
  BootstrapConfig config;
  config.resamples = 500;
  config.seed = 9;
  Interval a = bootstrap_ci(s, CurveStatistic::RocAuc, config);
  Interval b = bootstrap_ci(s, CurveStatistic::RocAuc, config);
  CHECK(a.point == b.point);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  config.seed = 10;
  Interval c = bootstrap_ci(s, CurveStatistic::RocAuc, config);
  CHECK((c.lo != a.lo || c.hi != a.hi));
}

TEST_CASE("bootstrap intervals ignore the worker count") {
  Rng rng(257);
  ScoredLabels s = random_scored(rng, 150, 11);
  BootstrapConfig one;
  one.resamples = 400;
  one.seed = 3;
  one.threads = 1;
  BootstrapConfig four = one;
  four.threads = 4;
  for (CurveStatistic stat :
       {CurveStatistic::RocAuc, CurveStatistic::PrAuc,
        CurveStatistic::PartialSpecificity,
        CurveStatistic::PartialSensitivity}) {
    Interval a = bootstrap_ci(s, stat, one);
    Interval b = bootstrap_ci(s, stat, four);
    CHECK(a.point == b.point);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
  }
}

TEST_CASE("perfect separation collapses the interval to one") {
  ScoredLabels s = make({1, 2, 8, 9, 10, 11}, {1, 1, 0, 0, 0, 0});
  BootstrapConfig config;
  config.resamples = 200;
  Interval ci = bootstrap_ci(s, CurveStatistic::RocAuc, config);
  CHECK(ci.point == 1.0);
  CHECK(ci.lo == 1.0);
  CHECK(ci.hi == 1.0);
}

TEST_CASE("the point estimate sits inside the interval on real data") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(stream_seed(7000, seed));
    ScoredLabels s = random_scored(rng, 200, 15);
    BootstrapConfig config;
    config.resamples = 300;
    config.seed = seed;
    Interval ci = bootstrap_ci(s, CurveStatistic::RocAuc, config);
    CHECK(ci.lo <= ci.point);
    CHECK(ci.point <= ci.hi);
  }
}

TEST_CASE("resample floor and level bounds are enforced") {
  ScoredLabels s = make({1, 2, 8, 9}, {1, 1, 0, 0});
  BootstrapConfig config;
  config.resamples = 99;
  CHECK_THROWS_AS(bootstrap_ci(s, CurveStatistic::RocAuc, config),
                  std::invalid_argument);
  config = BootstrapConfig{};
  config.level = 1.0;
  CHECK_THROWS_AS(bootstrap_ci(s, CurveStatistic::RocAuc, config),
                  std::invalid_argument);
}

TEST_CASE("bootstrap draws match a materialized resample") {
  // drawing ranks through the histogram must equal building the resample
  // explicitly and evaluating the statistic on it
  Rng rng(263);
  ScoredLabels s = random_scored(rng, 80, 6);
  uint64_t seed = 42;
  BootstrapConfig config;
  config.resamples = 100;
  config.seed = seed;
  Interval ci = bootstrap_ci(s, CurveStatistic::RocAuc, config);

  // reproduce resample 0 by hand with the documented draw order:
  // positives first, then negatives, indices into the class-sorted lists
  std::vector<double> pos, neg;
  for (size_t i = 0; i < s.size(); ++i) {
    (s.is_anomaly[i] ? pos : neg).push_back(s.scores[i]);
  }
  std::vector<double> stats;
  for (int r = 0; r < config.resamples; ++r) {
    Rng draw(stream_seed(seed, static_cast<uint64_t>(r)));
    ScoredLabels resample;
    for (size_t i = 0; i < pos.size(); ++i) {
      resample.scores.push_back(pos[draw.below(pos.size())]);
      resample.is_anomaly.push_back(1);
    }
    for (size_t i = 0; i < neg.size(); ++i) {
      resample.scores.push_back(neg[draw.below(neg.size())]);
      resample.is_anomaly.push_back(0);
    }
    stats.push_back(roc_auc(resample));
  }
  std::sort(stats.begin(), stats.end());
  // nearest-rank percentile at both tails
  auto quantile = [&](double q) {
    size_t idx = static_cast<size_t>(std::floor(q * stats.size()));
    if (idx >= stats.size()) idx = stats.size() - 1;
    return stats[idx];
  };
  CHECK(ci.lo == quantile(0.025));
  CHECK(ci.hi == quantile(0.975));
}

TEST_CASE("roc band brackets the point curve and pins perfection") {
  ScoredLabels perfect = make({1, 2, 8, 9, 10}, {1, 1, 0, 0, 0});
  BootstrapConfig config;
  config.resamples = 200;
  std::vector<double> grid = {0.0, 0.5, 1.0};
  auto band = roc_band(perfect, grid, config);
  REQUIRE(band.size() == 3);
  CHECK(band[1].lo == 1.0);
  CHECK(band[1].hi == 1.0);
  CHECK(band[2].lo == 1.0);

  Rng rng(269);
  ScoredLabels s = random_scored(rng, 150, 10);
  std::vector<double> grid2 = {0.0, 0.1, 0.25, 0.5, 0.75, 1.0};
  auto band2 = roc_band(s, grid2, config);
  RocCurve curve = roc_curve(s);
  for (size_t g = 0; g < grid2.size(); ++g) {
    double point = tpr_at_fpr(curve.points, grid2[g]);
    CHECK(band2[g].point == point);
    CHECK(band2[g].lo <= point + 1e-12);
    CHECK(band2[g].hi >= point - 1e-12);
  }
  CHECK_THROWS_AS(roc_band(s, std::vector<double>{}, config),
                  std::invalid_argument);
}

TEST_CASE("identical scorings give a difference test p of one") {
  Rng rng(271);
  ScoredLabels s = random_scored(rng, 100, 8);
  BootstrapConfig config;
  config.resamples = 200;
  PairedDiff d = pauc_diff_test(s, s, config);
  CHECK(d.diff == 0.0);
  CHECK(d.p_value == 1.0);
}

TEST_CASE("clearly different scorings hit the p-value floor") {
  // a: perfect; b: anti-perfect on the same labels
  size_t n = 400;
  ScoredLabels a, b;
  for (size_t i = 0; i < n; ++i) {
    bool anomaly = i < 40;
    a.scores.push_back(anomaly ? 1.0 + (i % 7) : 50.0 + (i % 13));
    b.scores.push_back(anomaly ? 50.0 + (i % 7) : 1.0 + (i % 13));
    a.is_anomaly.push_back(anomaly);
    b.is_anomaly.push_back(anomaly);
  }
  BootstrapConfig config;
  config.resamples = 500;
  PairedDiff d = pauc_diff_test(a, b, config);
  CHECK(d.diff > 0.0);
  CHECK(d.p_value == 2.0 / 500.0);

  PairedDiff same_seed = pauc_diff_test(a, b, config);
  CHECK(same_seed.p_value == d.p_value);
}

TEST_CASE("difference tests reject unpaired labels") {
  ScoredLabels a = make({1, 2, 8, 9}, {1, 1, 0, 0});
  ScoredLabels b = make({1, 2, 8, 9}, {1, 0, 1, 0});
  BootstrapConfig config;
  config.resamples = 100;
  CHECK_THROWS_AS(pauc_diff_test(a, b, config), std::invalid_argument);
}

TEST_CASE("scored label validation catches shape and value errors") {
  ScoredLabels bad;
  bad.scores = {1.0, 2.0};
  bad.is_anomaly = {1};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.is_anomaly = {1, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.is_anomaly = {1, 0};
  CHECK_NOTHROW(bad.validate());
  bad.scores[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
