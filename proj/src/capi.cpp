#include "secoda.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>

#include "csv.hpp"
#include "data_model.hpp"
#include "detector.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "synth.hpp"

struct secoda_dataset {
  secoda::Dataset impl;
};

struct secoda_labels {
  secoda::LabelVector impl;
};

struct secoda_result {
  secoda::DetectionResult impl;
  bool has_scores = true;
};

struct secoda_scored {
  secoda::ScoredLabels impl;
};

namespace {

thread_local std::string g_last_error;

secoda_status fail(secoda_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
secoda_status guarded(Fn&& fn) noexcept {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(SECODA_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const secoda::ParseError& e) {
    return fail(SECODA_ERROR_PARSE, e.what());
  } catch (const secoda::IoError& e) {
    return fail(SECODA_ERROR_IO, e.what());
  } catch (const secoda::MaxIterationsError& e) {
    return fail(SECODA_ERROR_MAX_ITERATIONS, e.what());
  } catch (const std::exception& e) {
    return fail(SECODA_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(SECODA_ERROR_INTERNAL, "unknown failure");
  }
}

secoda_status require(bool ok, const char* what) {
  if (ok) return SECODA_OK;
  throw std::invalid_argument(what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double optional_or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

secoda_confusion to_c(const secoda::ConfusionMatrix& cm) {
  return {cm.tp, cm.fp, cm.fn, cm.tn};
}

secoda_threshold_metrics to_c(const secoda::ThresholdMetrics& m) {
  return {optional_or_nan(m.sensitivity), optional_or_nan(m.specificity),
          optional_or_nan(m.precision),   optional_or_nan(m.accuracy),
          optional_or_nan(m.f1),          optional_or_nan(m.mcc),
          optional_or_nan(m.kappa)};
}

secoda::DetectionConfig to_config(const secoda_detect_options& opts) {
  secoda::DetectionConfig config;
  config.anomaly_fraction = opts.anomaly_fraction;
  config.prune_quantile = opts.prune_quantile;
  config.prune_start_iteration = opts.prune_start_iteration;
  config.pruning_enabled = opts.pruning_enabled != 0;
  config.accelerated_stepping = opts.accelerated_stepping != 0;
  config.weighted_scores = opts.weighted_scores != 0;
  if (opts.range_policy != SECODA_RANGE_WORKING_SET &&
      opts.range_policy != SECODA_RANGE_GLOBAL) {
    throw std::invalid_argument("unknown range policy");
  }
  config.range_policy = opts.range_policy == SECODA_RANGE_GLOBAL
                            ? secoda::RangePolicy::Global
                            : secoda::RangePolicy::WorkingSet;
  config.max_iterations = opts.max_iterations;
  config.initial_arity = opts.initial_arity;
  config.initial_stop_point = opts.initial_stop_point;
  config.threads = opts.threads;
  return config;
}

secoda::BootstrapConfig to_config(const secoda_bootstrap_options& opts) {
  secoda::BootstrapConfig config;
  config.resamples = opts.resamples;
  config.seed = opts.seed;
  config.level = opts.level;
  config.range_lo = opts.range_lo;
  config.range_hi = opts.range_hi;
  config.threads = opts.threads;
  return config;
}

secoda::CurveStatistic to_statistic(secoda_curve_statistic s) {
  switch (s) {
    case SECODA_STAT_ROC_AUC:
      return secoda::CurveStatistic::RocAuc;
    case SECODA_STAT_PR_AUC:
      return secoda::CurveStatistic::PrAuc;
    case SECODA_STAT_PARTIAL_SPECIFICITY:
      return secoda::CurveStatistic::PartialSpecificity;
    case SECODA_STAT_PARTIAL_SENSITIVITY:
      return secoda::CurveStatistic::PartialSensitivity;
  }
  throw std::invalid_argument("unknown statistic");
}

// Scores CSV as written by secoda_result_write_scores.
std::vector<double> parse_scores_csv(const std::string& text) {
  secoda::CsvReader reader(text);
  std::vector<std::string> record;
  size_t line = 0;
  if (!reader.next(record, line) || record.size() != 3 ||
      record[0] != "case_id" || record[1] != "aas" || record[2] != "rank") {
    throw secoda::ParseError(
        "scores file must start with a case_id,aas,rank header");
  }
  std::vector<std::pair<size_t, double>> entries;
  while (reader.next(record, line)) {
    if (record.size() != 3) {
      throw secoda::ParseError("line " + std::to_string(line) +
                               ": expected 3 fields");
    }
    size_t id = 0;
    const char* begin = record[0].data();
    const char* end = begin + record[0].size();
    auto [ptr, ec] = std::from_chars(begin, end, id);
    if (ec != std::errc() || ptr != end) {
      throw secoda::ParseError("line " + std::to_string(line) +
                               ": bad case id '" + record[0] + "'");
    }
    auto aas = secoda::parse_double(record[1]);
    if (!aas) {
      throw secoda::ParseError("line " + std::to_string(line) +
                               ": bad score '" + record[1] + "'");
    }
    entries.emplace_back(id, *aas);
  }
  std::vector<double> scores(entries.size(),
                             std::numeric_limits<double>::quiet_NaN());
  for (const auto& [id, aas] : entries) {
    if (id >= scores.size() || !std::isnan(scores[id])) {
      throw secoda::ParseError("score case ids must cover 0.." +
                               std::to_string(scores.size() - 1) +
                               " exactly");
    }
    scores[id] = aas;
  }
  return scores;
}

}  // namespace

extern "C" {

const char* secoda_last_error(void) { return g_last_error.c_str(); }

const char* secoda_version(void) { return "1.0.0"; }

void secoda_string_free(char* s) { std::free(s); }

/* ---- datasets ---- */

secoda_status secoda_dataset_load_csv(const char* csv_path,
                                      const char* schema_json,
                                      const char* const* missing_tokens,
                                      size_t n_missing_tokens,
                                      secoda_dataset** out) {
  return guarded([&] {
    require(csv_path != nullptr && out != nullptr, "null argument");
    secoda::MissingTokens missing;
    if (missing_tokens != nullptr) {
      missing.tokens.clear();
      for (size_t i = 0; i < n_missing_tokens; ++i) {
        require(missing_tokens[i] != nullptr, "null missing token");
        missing.tokens.emplace_back(missing_tokens[i]);
      }
    }
    secoda::Schema schema;
    const secoda::Schema* schema_ptr = nullptr;
    if (schema_json != nullptr) {
      schema = secoda::Schema::from_json(schema_json);
      schema_ptr = &schema;
    }
    auto data = secoda::load_csv(csv_path, schema_ptr, missing);
    *out = new secoda_dataset{std::move(data)};
    return SECODA_OK;
  });
}

secoda_status secoda_dataset_write_csv(const secoda_dataset* data,
                                       const char* csv_path) {
  return guarded([&] {
    require(data != nullptr && csv_path != nullptr, "null argument");
    secoda::write_csv(data->impl, csv_path);
    return SECODA_OK;
  });
}

secoda_status secoda_dataset_head(const secoda_dataset* data, size_t n,
                                  secoda_dataset** out) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "null argument");
    *out = new secoda_dataset{data->impl.head(n)};
    return SECODA_OK;
  });
}

size_t secoda_dataset_rows(const secoda_dataset* data) {
  return data == nullptr ? 0 : data->impl.rows();
}

size_t secoda_dataset_cols(const secoda_dataset* data) {
  return data == nullptr ? 0 : data->impl.cols();
}

secoda_status secoda_dataset_schema_json(const secoda_dataset* data,
                                         char** out) {
  return guarded([&] {
    require(data != nullptr && out != nullptr, "null argument");
    *out = copy_string(data->impl.schema().to_json());
    return SECODA_OK;
  });
}

void secoda_dataset_free(secoda_dataset* data) { delete data; }

/* ---- detection ---- */

void secoda_detect_options_init(secoda_detect_options* opts) {
  if (opts == nullptr) return;
  secoda::DetectionConfig defaults;
  opts->anomaly_fraction = defaults.anomaly_fraction;
  opts->prune_quantile = defaults.prune_quantile;
  opts->prune_start_iteration = defaults.prune_start_iteration;
  opts->pruning_enabled = defaults.pruning_enabled ? 1 : 0;
  opts->accelerated_stepping = defaults.accelerated_stepping ? 1 : 0;
  opts->weighted_scores = defaults.weighted_scores ? 1 : 0;
  opts->range_policy = SECODA_RANGE_WORKING_SET;
  opts->max_iterations = defaults.max_iterations;
  opts->initial_arity = defaults.initial_arity;
  opts->initial_stop_point = defaults.initial_stop_point;
  opts->threads = defaults.threads;
}

secoda_status secoda_detect(const secoda_dataset* data,
                            const secoda_detect_options* opts,
                            secoda_result** out) {
  return guarded([&] {
    require(data != nullptr && opts != nullptr && out != nullptr,
            "null argument");
    secoda::DetectionConfig config = to_config(*opts);
    try {
      auto result = secoda::detect(data->impl, config);
      *out = new secoda_result{std::move(result), true};
      return SECODA_OK;
    } catch (const secoda::MaxIterationsError& e) {
      auto* partial = new secoda_result{};
      partial->impl.trace = e.trace;
      partial->impl.iterations = static_cast<int>(e.trace.size());
      partial->has_scores = false;
      *out = partial;
      return fail(SECODA_ERROR_MAX_ITERATIONS, e.what());
    }
  });
}

size_t secoda_result_cases(const secoda_result* result) {
  return result == nullptr ? 0 : result->impl.scores.size();
}

int32_t secoda_result_iterations(const secoda_result* result) {
  return result == nullptr ? 0 : result->impl.iterations;
}

double secoda_result_score(const secoda_result* result, size_t case_id) {
  if (result == nullptr || case_id >= result->impl.scores.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return result->impl.scores[case_id];
}

secoda_status secoda_result_scores(const secoda_result* result,
                                   double* out_scores) {
  return guarded([&] {
    require(result != nullptr && out_scores != nullptr, "null argument");
    require(result->has_scores, "result carries no scores");
    std::memcpy(out_scores, result->impl.scores.data(),
                result->impl.scores.size() * sizeof(double));
    return SECODA_OK;
  });
}

size_t secoda_result_trace_length(const secoda_result* result) {
  return result == nullptr ? 0 : result->impl.trace.size();
}

secoda_status secoda_result_trace(const secoda_result* result,
                                  secoda_trace_record* out_records) {
  return guarded([&] {
    require(result != nullptr && out_records != nullptr, "null argument");
    for (size_t i = 0; i < result->impl.trace.size(); ++i) {
      const secoda::IterationRecord& r = result->impl.trace[i];
      out_records[i] = {r.iteration, r.arity,  r.stop_point,
                        r.working,   r.pruned, r.below_s};
    }
    return SECODA_OK;
  });
}

secoda_status secoda_result_write_scores(const secoda_result* result,
                                         const char* csv_path) {
  return guarded([&] {
    require(result != nullptr && csv_path != nullptr, "null argument");
    require(result->has_scores, "result carries no scores");
    secoda::write_scores(result->impl.scores, csv_path);
    return SECODA_OK;
  });
}

secoda_status secoda_result_write_trace(const secoda_result* result,
                                        const char* jsonl_path) {
  return guarded([&] {
    require(result != nullptr && jsonl_path != nullptr, "null argument");
    std::string out;
    for (const secoda::IterationRecord& r : result->impl.trace) {
      out += "{\"i\":" + std::to_string(r.iteration);
      out += ",\"b\":" + std::to_string(r.arity);
      out += ",\"s\":" + secoda::format_double(r.stop_point);
      out += ",\"working\":" + std::to_string(r.working);
      out += ",\"pruned\":" + std::to_string(r.pruned);
      out += ",\"below_s\":" + std::to_string(r.below_s);
      out += "}\n";
    }
    secoda::write_file(jsonl_path, out);
    return SECODA_OK;
  });
}

void secoda_result_free(secoda_result* result) { delete result; }

/* ---- synthetic data ---- */

secoda_status secoda_generate(secoda_generator_kind kind, size_t n,
                              uint64_t seed, secoda_dataset** out_data,
                              secoda_labels** out_labels) {
  return guarded([&] {
    require(out_data != nullptr && out_labels != nullptr, "null argument");
    secoda::GeneratorSpec spec;
    switch (kind) {
      case SECODA_GEN_MOUNTAIN:
        spec.kind = secoda::GeneratorKind::Mountain;
        break;
      case SECODA_GEN_HELIX:
        spec.kind = secoda::GeneratorKind::Helix;
        break;
      case SECODA_GEN_TIMESERIES:
        spec.kind = secoda::GeneratorKind::TimeSeries;
        break;
      case SECODA_GEN_NOISYMIX:
        spec.kind = secoda::GeneratorKind::NoisyMix;
        break;
      default:
        throw std::invalid_argument("unknown generator kind");
    }
    spec.n = n;
    spec.seed = seed;
    auto labeled = secoda::generate(spec);
    *out_data = new secoda_dataset{std::move(labeled.data)};
    *out_labels = new secoda_labels{std::move(labeled.labels)};
    return SECODA_OK;
  });
}

size_t secoda_labels_size(const secoda_labels* labels) {
  return labels == nullptr ? 0 : labels->impl.size();
}

uint8_t secoda_labels_get(const secoda_labels* labels, size_t case_id) {
  if (labels == nullptr || case_id >= labels->impl.size()) return 255;
  return labels->impl[case_id];
}

secoda_status secoda_labels_head(const secoda_labels* labels, size_t n,
                                 secoda_labels** out) {
  return guarded([&] {
    require(labels != nullptr && out != nullptr, "null argument");
    require(n <= labels->impl.size(), "head larger than the label vector");
    *out = new secoda_labels{secoda::LabelVector(labels->impl.begin(),
                                                 labels->impl.begin() + n)};
    return SECODA_OK;
  });
}

secoda_status secoda_labels_write_csv(const secoda_labels* labels,
                                      const char* csv_path) {
  return guarded([&] {
    require(labels != nullptr && csv_path != nullptr, "null argument");
    secoda::write_labels(labels->impl, csv_path);
    return SECODA_OK;
  });
}

secoda_status secoda_labels_load_csv(const char* csv_path,
                                     secoda_labels** out) {
  return guarded([&] {
    require(csv_path != nullptr && out != nullptr, "null argument");
    *out = new secoda_labels{secoda::load_labels(csv_path)};
    return SECODA_OK;
  });
}

void secoda_labels_free(secoda_labels* labels) { delete labels; }

/* ---- evaluation ---- */

secoda_status secoda_scored_create(const double* scores,
                                   const uint8_t* is_anomaly, size_t n,
                                   secoda_scored** out) {
  return guarded([&] {
    require(scores != nullptr && is_anomaly != nullptr && out != nullptr,
            "null argument");
    secoda::ScoredLabels s;
    s.scores.assign(scores, scores + n);
    s.is_anomaly.assign(is_anomaly, is_anomaly + n);
    s.validate();
    *out = new secoda_scored{std::move(s)};
    return SECODA_OK;
  });
}

secoda_status secoda_scored_load(const char* scores_csv,
                                 const char* labels_csv,
                                 secoda_scored** out) {
  return guarded([&] {
    require(scores_csv != nullptr && labels_csv != nullptr && out != nullptr,
            "null argument");
    std::vector<double> scores =
        parse_scores_csv(secoda::read_file(scores_csv));
    secoda::LabelVector labels = secoda::load_labels(labels_csv);
    if (labels.size() != scores.size()) {
      throw secoda::ParseError(
          "scores cover " + std::to_string(scores.size()) +
          " cases but labels cover " + std::to_string(labels.size()));
    }
    secoda::ScoredLabels s;
    s.scores = std::move(scores);
    s.is_anomaly.resize(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
      s.is_anomaly[i] = labels[i] != 0 ? 1 : 0;
    }
    s.validate();
    *out = new secoda_scored{std::move(s)};
    return SECODA_OK;
  });
}

size_t secoda_scored_size(const secoda_scored* scored) {
  return scored == nullptr ? 0 : scored->impl.size();
}

void secoda_scored_free(secoda_scored* scored) { delete scored; }

secoda_status secoda_confusion_at(const secoda_scored* scored,
                                  double threshold, secoda_confusion* out) {
  return guarded([&] {
    require(scored != nullptr && out != nullptr, "null argument");
    *out = to_c(secoda::confusion(scored->impl, threshold));
    return SECODA_OK;
  });
}

secoda_status secoda_metrics_at(const secoda_scored* scored, double threshold,
                                secoda_threshold_metrics* out) {
  return guarded([&] {
    require(scored != nullptr && out != nullptr, "null argument");
    *out = to_c(secoda::threshold_metrics(
        secoda::confusion(scored->impl, threshold)));
    return SECODA_OK;
  });
}

secoda_status secoda_roc_auc(const secoda_scored* scored, double* out) {
  return guarded([&] {
    require(scored != nullptr && out != nullptr, "null argument");
    *out = secoda::roc_auc(scored->impl);
    return SECODA_OK;
  });
}

secoda_status secoda_partial_auc(const secoda_scored* scored,
                                 secoda_partial_axis axis, double range_lo,
                                 double range_hi, int standardized,
                                 double* out) {
  return guarded([&] {
    require(scored != nullptr && out != nullptr, "null argument");
    require(axis == SECODA_PARTIAL_SPECIFICITY ||
                axis == SECODA_PARTIAL_SENSITIVITY,
            "unknown axis");
    secoda::RocCurve curve = secoda::roc_curve(scored->impl);
    *out = secoda::partial_auc(curve.points,
                               axis == SECODA_PARTIAL_SPECIFICITY
                                   ? secoda::PartialAxis::Specificity
                                   : secoda::PartialAxis::Sensitivity,
                               range_lo, range_hi, standardized != 0);
    return SECODA_OK;
  });
}

secoda_status secoda_pr_auc(const secoda_scored* scored, double* out) {
  return guarded([&] {
    require(scored != nullptr && out != nullptr, "null argument");
    *out = secoda::pr_auc(scored->impl);
    return SECODA_OK;
  });
}

secoda_status secoda_roc_points(const secoda_scored* scored, double* points,
                                size_t* n_points) {
  return guarded([&] {
    require(scored != nullptr && n_points != nullptr, "null argument");
    secoda::RocCurve curve = secoda::roc_curve(scored->impl);
    if (points == nullptr) {
      *n_points = curve.points.size();
      return SECODA_OK;
    }
    require(*n_points >= curve.points.size(), "points buffer too small");
    for (size_t i = 0; i < curve.points.size(); ++i) {
      points[2 * i] = curve.points[i].fpr;
      points[2 * i + 1] = curve.points[i].tpr;
    }
    *n_points = curve.points.size();
    return SECODA_OK;
  });
}

secoda_status secoda_pr_points(const secoda_scored* scored, double* points,
                               size_t* n_points) {
  return guarded([&] {
    require(scored != nullptr && n_points != nullptr, "null argument");
    secoda::PrCurve curve = secoda::pr_curve(scored->impl);
    if (points == nullptr) {
      *n_points = curve.points.size();
      return SECODA_OK;
    }
    require(*n_points >= curve.points.size(), "points buffer too small");
    for (size_t i = 0; i < curve.points.size(); ++i) {
      points[2 * i] = curve.points[i].recall;
      points[2 * i + 1] = curve.points[i].precision;
    }
    *n_points = curve.points.size();
    return SECODA_OK;
  });
}

void secoda_bootstrap_options_init(secoda_bootstrap_options* opts) {
  if (opts == nullptr) return;
  secoda::BootstrapConfig defaults;
  opts->resamples = defaults.resamples;
  opts->seed = defaults.seed;
  opts->level = defaults.level;
  opts->range_lo = defaults.range_lo;
  opts->range_hi = defaults.range_hi;
  opts->threads = defaults.threads;
}

secoda_status secoda_bootstrap_ci(const secoda_scored* scored,
                                  secoda_curve_statistic statistic,
                                  const secoda_bootstrap_options* opts,
                                  secoda_interval* out) {
  return guarded([&] {
    require(scored != nullptr && opts != nullptr && out != nullptr,
            "null argument");
    secoda::Interval ci = secoda::bootstrap_ci(
        scored->impl, to_statistic(statistic), to_config(*opts));
    *out = {ci.point, ci.lo, ci.hi};
    return SECODA_OK;
  });
}

secoda_status secoda_roc_band(const secoda_scored* scored,
                              const double* fpr_grid, size_t n_grid,
                              const secoda_bootstrap_options* opts,
                              secoda_interval* out) {
  return guarded([&] {
    require(scored != nullptr && fpr_grid != nullptr && opts != nullptr &&
                out != nullptr,
            "null argument");
    auto band = secoda::roc_band(
        scored->impl, std::span<const double>(fpr_grid, n_grid),
        to_config(*opts));
    for (size_t i = 0; i < band.size(); ++i) {
      out[i] = {band[i].point, band[i].lo, band[i].hi};
    }
    return SECODA_OK;
  });
}

secoda_status secoda_pauc_diff_test(const secoda_scored* a,
                                    const secoda_scored* b,
                                    const secoda_bootstrap_options* opts,
                                    double* out_diff, double* out_p) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && opts != nullptr &&
                out_diff != nullptr && out_p != nullptr,
            "null argument");
    secoda::PairedDiff d =
        secoda::pauc_diff_test(a->impl, b->impl, to_config(*opts));
    *out_diff = d.diff;
    *out_p = d.p_value;
    return SECODA_OK;
  });
}

secoda_status secoda_best_threshold(const secoda_scored* scored,
                                    secoda_threshold_criterion criterion,
                                    secoda_threshold_result* out) {
  return guarded([&] {
    require(scored != nullptr && out != nullptr, "null argument");
    require(criterion == SECODA_BEST_YOUDEN || criterion == SECODA_BEST_MCC,
            "unknown criterion");
    secoda::BestThreshold best = secoda::best_threshold(
        scored->impl, criterion == SECODA_BEST_YOUDEN
                          ? secoda::ThresholdCriterion::Youden
                          : secoda::ThresholdCriterion::Mcc);
    *out = {best.threshold, best.objective, to_c(best.cm),
            to_c(best.metrics)};
    return SECODA_OK;
  });
}

} /* extern "C" */
