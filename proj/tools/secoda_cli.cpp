#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "secoda.h"

using ordered_json = nlohmann::ordered_json;

namespace {

struct CliError {
  int code;
  std::string message;
};

int status_code(secoda_status st) {
  switch (st) {
    case SECODA_OK:
      return 0;
    case SECODA_ERROR_INVALID_ARGUMENT:
    case SECODA_ERROR_IO:
    case SECODA_ERROR_PARSE:
      return 2;
    case SECODA_ERROR_MAX_ITERATIONS:
      return 3;
    default:
      return 1;
  }
}

void check(secoda_status st) {
  if (st != SECODA_OK) throw CliError{status_code(st), secoda_last_error()};
}

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{2, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{2, "cannot open " + path + " for writing"};
  out << content;
  out.flush();
  if (!out) throw CliError{2, "failed writing " + path};
}

template <typename T, void (*F)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { F(p); }
};
using DatasetPtr =
    std::unique_ptr<secoda_dataset,
                    HandleDeleter<secoda_dataset, secoda_dataset_free>>;
using LabelsPtr =
    std::unique_ptr<secoda_labels,
                    HandleDeleter<secoda_labels, secoda_labels_free>>;
using ResultPtr =
    std::unique_ptr<secoda_result,
                    HandleDeleter<secoda_result, secoda_result_free>>;
using ScoredPtr =
    std::unique_ptr<secoda_scored,
                    HandleDeleter<secoda_scored, secoda_scored_free>>;

DatasetPtr load_dataset(const std::string& path, const std::string& schema_path,
                        const std::vector<std::string>& missing) {
  std::string schema_json;
  const char* schema_cstr = nullptr;
  if (!schema_path.empty()) {
    schema_json = read_text(schema_path);
    schema_cstr = schema_json.c_str();
  }
  std::vector<const char*> tokens;
  tokens.reserve(missing.size());
  for (const std::string& t : missing) tokens.push_back(t.c_str());
  secoda_dataset* raw = nullptr;
  check(secoda_dataset_load_csv(path.c_str(), schema_cstr,
                                missing.empty() ? nullptr : tokens.data(),
                                tokens.size(), &raw));
  return DatasetPtr(raw);
}

secoda_generator_kind kind_from_name(const std::string& name) {
  if (name == "mountain") return SECODA_GEN_MOUNTAIN;
  if (name == "helix") return SECODA_GEN_HELIX;
  if (name == "timeseries") return SECODA_GEN_TIMESERIES;
  if (name == "noisymix") return SECODA_GEN_NOISYMIX;
  throw CliError{2, "unknown generator kind '" + name + "'"};
}

ordered_json interval_json(const secoda_interval& iv) {
  return {{"point", iv.point}, {"lo", iv.lo}, {"hi", iv.hi}};
}

ordered_json confusion_json(const secoda_confusion& cm) {
  return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
}

// Undefined metrics (zero denominators) render as null, never 0.
ordered_json metrics_json(const secoda_threshold_metrics& m) {
  auto cell = [](double v) {
    return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v);
  };
  ordered_json j;
  j["sensitivity"] = cell(m.sensitivity);
  j["specificity"] = cell(m.specificity);
  j["precision"] = cell(m.precision);
  j["accuracy"] = cell(m.accuracy);
  j["f1"] = cell(m.f1);
  j["mcc"] = cell(m.mcc);
  j["kappa"] = cell(m.kappa);
  return j;
}

/* ---- detect ---- */

struct DetectFlags {
  std::string input;
  std::string schema;
  std::string output;
  std::string trace;
  std::vector<std::string> missing;
  double fraction = 0.003;
  double prune_quantile = 0.95;
  int prune_start = 11;
  bool no_prune = false;
  bool no_step = false;
  bool unweighted = false;
  std::string range = "working";
  int max_iter = 1000;
  int top = 30;
  int threads = 1;
};

void print_top(const std::vector<double>& scores, size_t k) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });
  k = std::min(k, order.size());
  if (k == 0) return;
  std::printf("%-8s%-10s%s\n", "rank", "case_id", "aas");
  size_t group_start = 0;
  for (size_t pos = 0; pos < k; ++pos) {
    if (pos > 0 && scores[order[pos]] != scores[order[pos - 1]]) {
      group_start = pos;
    }
    std::printf("%-8zu%-10zu%s\n", group_start + 1, order[pos],
                fmt(scores[order[pos]]).c_str());
  }
}

ordered_json detect_manifest(const DetectFlags& f) {
  ordered_json m;
  m["command"] = "detect";
  m["version"] = secoda_version();
  m["input"] = f.input;
  m["schema"] = f.schema.empty() ? ordered_json(nullptr) : ordered_json(f.schema);
  m["missing_tokens"] = f.missing.empty()
                            ? ordered_json::array({"", "NA"})
                            : ordered_json(f.missing);
  m["fraction"] = f.fraction;
  m["prune_quantile"] = f.prune_quantile;
  m["prune_start"] = f.prune_start;
  m["prune"] = !f.no_prune;
  m["accelerated"] = !f.no_step;
  m["weighted"] = !f.unweighted;
  m["range"] = f.range;
  m["max_iter"] = f.max_iter;
  m["top"] = f.top;
  ordered_json outputs;
  outputs["scores"] = f.output;
  outputs["trace"] = f.trace.empty() ? ordered_json(nullptr) : ordered_json(f.trace);
  outputs["manifest"] = f.output + ".manifest.json";
  m["outputs"] = outputs;
  return m;
}

int run_detect(const DetectFlags& f) {
  DatasetPtr data = load_dataset(f.input, f.schema, f.missing);
  secoda_detect_options opts;
  secoda_detect_options_init(&opts);
  opts.anomaly_fraction = f.fraction;
  opts.prune_quantile = f.prune_quantile;
  opts.prune_start_iteration = f.prune_start;
  opts.pruning_enabled = f.no_prune ? 0 : 1;
  opts.accelerated_stepping = f.no_step ? 0 : 1;
  opts.weighted_scores = f.unweighted ? 0 : 1;
  opts.range_policy =
      f.range == "global" ? SECODA_RANGE_GLOBAL : SECODA_RANGE_WORKING_SET;
  opts.max_iterations = f.max_iter;
  opts.threads = f.threads;

  secoda_result* raw = nullptr;
  secoda_status st = secoda_detect(data.get(), &opts, &raw);
  ResultPtr result(raw);
  if (st == SECODA_ERROR_MAX_ITERATIONS) {
    std::string message = secoda_last_error();
    if (!f.trace.empty() && result) {
      check(secoda_result_write_trace(result.get(), f.trace.c_str()));
    }
    std::fprintf(stderr, "secoda: %s\n", message.c_str());
    return 3;
  }
  check(st);

  check(secoda_result_write_scores(result.get(), f.output.c_str()));
  if (!f.trace.empty()) {
    check(secoda_result_write_trace(result.get(), f.trace.c_str()));
  }
  write_text(f.output + ".manifest.json", detect_manifest(f).dump(2) + "\n");

  size_t n = secoda_result_cases(result.get());
  std::vector<double> scores(n);
  check(secoda_result_scores(result.get(), scores.data()));
  std::printf("cases: %zu  iterations: %d\n", n,
              secoda_result_iterations(result.get()));
  print_top(scores, f.top < 0 ? 0 : static_cast<size_t>(f.top));
  return 0;
}

/* ---- generate ---- */

struct GenerateFlags {
  std::string kind;
  size_t n = 0;
  uint64_t seed = 0;
  std::string out;
  std::string labels_out;
};

int run_generate(const GenerateFlags& f) {
  secoda_dataset* d = nullptr;
  secoda_labels* l = nullptr;
  check(secoda_generate(kind_from_name(f.kind), f.n, f.seed, &d, &l));
  DatasetPtr data(d);
  LabelsPtr labels(l);
  check(secoda_dataset_write_csv(data.get(), f.out.c_str()));
  check(secoda_labels_write_csv(labels.get(), f.labels_out.c_str()));

  size_t rows = secoda_dataset_rows(data.get());
  size_t anomalies = 0;
  for (size_t i = 0; i < rows; ++i) {
    if (secoda_labels_get(labels.get(), i) != 0) ++anomalies;
  }

  ordered_json m;
  m["command"] = "generate";
  m["version"] = secoda_version();
  m["kind"] = f.kind;
  m["n"] = rows;
  m["seed"] = f.seed;
  ordered_json outputs;
  outputs["data"] = f.out;
  outputs["labels"] = f.labels_out;
  outputs["manifest"] = f.out + ".manifest.json";
  m["outputs"] = outputs;
  write_text(f.out + ".manifest.json", m.dump(2) + "\n");

  std::printf("wrote %zu cases (%zu anomalies) to %s\n", rows, anomalies,
              f.out.c_str());
  return 0;
}

/* ---- evaluate ---- */

struct EvaluateFlags {
  std::string scores;
  std::string labels;
  std::string metrics_out;
  std::string roc_out;
  std::string pr_out;
  uint64_t bootstrap = 10000;
  int band_grid = 0;
  double level = 0.95;
  double partial_spec = 0.9;
  double partial_sens = 0.9;
  uint64_t seed = 0;
  int threads = 1;
};

ordered_json evaluate_manifest(const EvaluateFlags& f) {
  ordered_json m;
  m["command"] = "evaluate";
  m["version"] = secoda_version();
  m["scores"] = f.scores;
  m["labels"] = f.labels;
  m["bootstrap"] = f.bootstrap;
  m["band_grid"] = f.band_grid;
  m["level"] = f.level;
  m["partial_spec"] = f.partial_spec;
  m["partial_sens"] = f.partial_sens;
  m["seed"] = f.seed;
  ordered_json outputs;
  outputs["metrics"] = f.metrics_out;
  outputs["roc"] = f.roc_out.empty() ? ordered_json(nullptr) : ordered_json(f.roc_out);
  outputs["pr"] = f.pr_out.empty() ? ordered_json(nullptr) : ordered_json(f.pr_out);
  m["outputs"] = outputs;
  return m;
}

int run_evaluate(const EvaluateFlags& f) {
  if (f.band_grid < 0) throw CliError{2, "--band-grid must be non-negative"};
  if (f.band_grid > 0 && f.roc_out.empty()) {
    throw CliError{2, "--band-grid needs --roc-out"};
  }

  secoda_scored* raw = nullptr;
  check(secoda_scored_load(f.scores.c_str(), f.labels.c_str(), &raw));
  ScoredPtr scored(raw);

  secoda_labels* lraw = nullptr;
  check(secoda_labels_load_csv(f.labels.c_str(), &lraw));
  LabelsPtr labels(lraw);
  size_t n = secoda_scored_size(scored.get());
  size_t positives = 0;
  for (size_t i = 0; i < n; ++i) {
    if (secoda_labels_get(labels.get(), i) != 0) ++positives;
  }

  double pauc_spec_raw = 0.0;
  double pauc_sens_raw = 0.0;
  check(secoda_partial_auc(scored.get(), SECODA_PARTIAL_SPECIFICITY,
                           f.partial_spec, 1.0, 0, &pauc_spec_raw));
  check(secoda_partial_auc(scored.get(), SECODA_PARTIAL_SENSITIVITY,
                           f.partial_sens, 1.0, 0, &pauc_sens_raw));

  secoda_bootstrap_options opts;
  secoda_bootstrap_options_init(&opts);
  opts.resamples = f.bootstrap;
  opts.seed = f.seed;
  opts.level = f.level;
  opts.threads = f.threads;

  secoda_interval roc_ci, pr_ci, spec_ci, sens_ci;
  opts.range_lo = f.partial_spec;
  opts.range_hi = 1.0;
  check(secoda_bootstrap_ci(scored.get(), SECODA_STAT_ROC_AUC, &opts, &roc_ci));
  check(secoda_bootstrap_ci(scored.get(), SECODA_STAT_PR_AUC, &opts, &pr_ci));
  check(secoda_bootstrap_ci(scored.get(), SECODA_STAT_PARTIAL_SPECIFICITY,
                            &opts, &spec_ci));
  opts.range_lo = f.partial_sens;
  check(secoda_bootstrap_ci(scored.get(), SECODA_STAT_PARTIAL_SENSITIVITY,
                            &opts, &sens_ci));

  secoda_threshold_result youden, mcc;
  check(secoda_best_threshold(scored.get(), SECODA_BEST_YOUDEN, &youden));
  check(secoda_best_threshold(scored.get(), SECODA_BEST_MCC, &mcc));

  ordered_json j;
  j["cases"] = n;
  j["positives"] = positives;
  j["negatives"] = n - positives;
  j["roc_auc"] = interval_json(roc_ci);
  j["pr_auc"] = interval_json(pr_ci);
  {
    ordered_json partial;
    ordered_json spec;
    spec["range"] = ordered_json::array({f.partial_spec, 1.0});
    spec["raw"] = pauc_spec_raw;
    spec["standardized"] = interval_json(spec_ci);
    ordered_json sens;
    sens["range"] = ordered_json::array({f.partial_sens, 1.0});
    sens["raw"] = pauc_sens_raw;
    sens["standardized"] = interval_json(sens_ci);
    partial["specificity"] = spec;
    partial["sensitivity"] = sens;
    j["partial_auc"] = partial;
  }
  j["pr_interpolation"] = "step";
  {
    ordered_json th;
    ordered_json yj;
    yj["threshold"] = youden.threshold;
    yj["objective"] = youden.objective;
    yj["confusion"] = confusion_json(youden.confusion);
    yj["metrics"] = metrics_json(youden.metrics);
    ordered_json mj;
    mj["threshold"] = mcc.threshold;
    mj["objective"] = mcc.objective;
    mj["confusion"] = confusion_json(mcc.confusion);
    mj["metrics"] = metrics_json(mcc.metrics);
    th["youden"] = yj;
    th["mcc"] = mj;
    j["thresholds"] = th;
  }
  {
    ordered_json b;
    b["resamples"] = f.bootstrap;
    b["level"] = f.level;
    b["seed"] = f.seed;
    j["bootstrap"] = b;
  }
  j["manifest"] = evaluate_manifest(f);
  write_text(f.metrics_out, j.dump(2) + "\n");

  if (!f.roc_out.empty()) {
    std::string csv;
    if (f.band_grid > 0) {
      size_t g = static_cast<size_t>(f.band_grid) + 1;
      std::vector<double> grid(g);
      for (size_t i = 0; i < g; ++i) {
        grid[i] = static_cast<double>(i) / static_cast<double>(f.band_grid);
      }
      std::vector<secoda_interval> band(g);
      check(secoda_roc_band(scored.get(), grid.data(), g, &opts, band.data()));
      csv = "fpr,tpr,lo,hi\n";
      for (size_t i = 0; i < g; ++i) {
        csv += fmt(grid[i]) + "," + fmt(band[i].point) + "," +
               fmt(band[i].lo) + "," + fmt(band[i].hi) + "\n";
      }
    } else {
      size_t count = 0;
      check(secoda_roc_points(scored.get(), nullptr, &count));
      std::vector<double> pts(2 * count);
      check(secoda_roc_points(scored.get(), pts.data(), &count));
      csv = "fpr,tpr\n";
      for (size_t i = 0; i < count; ++i) {
        csv += fmt(pts[2 * i]) + "," + fmt(pts[2 * i + 1]) + "\n";
      }
    }
    write_text(f.roc_out, csv);
  }
  if (!f.pr_out.empty()) {
    size_t count = 0;
    check(secoda_pr_points(scored.get(), nullptr, &count));
    std::vector<double> pts(2 * count);
    check(secoda_pr_points(scored.get(), pts.data(), &count));
    std::string csv = "recall,precision\n";
    for (size_t i = 0; i < count; ++i) {
      csv += fmt(pts[2 * i]) + "," + fmt(pts[2 * i + 1]) + "\n";
    }
    write_text(f.pr_out, csv);
  }

  std::printf("cases: %zu (positives %zu, negatives %zu)\n", n, positives,
              n - positives);
  std::printf("roc_auc: %s [%s, %s]\n", fmt(roc_ci.point).c_str(),
              fmt(roc_ci.lo).c_str(), fmt(roc_ci.hi).c_str());
  std::printf("pr_auc: %s [%s, %s]\n", fmt(pr_ci.point).c_str(),
              fmt(pr_ci.lo).c_str(), fmt(pr_ci.hi).c_str());
  std::printf("pauc_spec_std: %s [%s, %s]\n", fmt(spec_ci.point).c_str(),
              fmt(spec_ci.lo).c_str(), fmt(spec_ci.hi).c_str());
  std::printf("pauc_sens_std: %s [%s, %s]\n", fmt(sens_ci.point).c_str(),
              fmt(sens_ci.lo).c_str(), fmt(sens_ci.hi).c_str());
  std::printf("youden: threshold %s objective %s\n",
              fmt(youden.threshold).c_str(), fmt(youden.objective).c_str());
  std::printf("mcc: threshold %s objective %s\n", fmt(mcc.threshold).c_str(),
              fmt(mcc.objective).c_str());
  return 0;
}

/* ---- bench ---- */

struct BenchFlags {
  std::string input;
  std::string labels;
  std::string kind;
  size_t n = 0;
  uint64_t seed = 0;
  int fractions = 5;
  int repeats = 1;
  std::string variants = "final,pruneless,stepless";
  std::string out;
  int threads = 1;
};

struct Variant {
  std::string name;
  bool prune = true;
  bool accelerated = true;
  bool weighted = true;
};

std::vector<Variant> parse_variants(const std::string& csv) {
  std::vector<Variant> out;
  std::string token;
  std::stringstream ss(csv);
  while (std::getline(ss, token, ',')) {
    if (token == "final") {
      out.push_back({token, true, true, true});
    } else if (token == "pruneless") {
      out.push_back({token, false, true, true});
    } else if (token == "stepless") {
      out.push_back({token, true, false, true});
    } else if (token == "unweighted") {
      out.push_back({token, true, true, false});
    } else {
      throw CliError{2, "unknown variant '" + token + "'"};
    }
  }
  if (out.empty()) throw CliError{2, "no variants requested"};
  return out;
}

// Least-squares R^2 of y against x; degenerate spreads fit exactly.
double linear_fit_r2(const std::vector<double>& x,
                     const std::vector<double>& y) {
  size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 1.0;
  return (sxy * sxy) / (sxx * syy);
}

int run_bench(const BenchFlags& f) {
  bool have_input = !f.input.empty();
  bool have_kind = !f.kind.empty();
  if (have_input == have_kind) {
    throw CliError{2, "bench needs exactly one of --input or --kind"};
  }
  if (f.fractions < 1) throw CliError{2, "--fractions must be at least 1"};
  if (f.repeats < 1) throw CliError{2, "--repeats must be at least 1"};
  std::vector<Variant> variants = parse_variants(f.variants);

  DatasetPtr data;
  LabelsPtr labels;
  if (have_kind) {
    secoda_dataset* d = nullptr;
    secoda_labels* l = nullptr;
    check(secoda_generate(kind_from_name(f.kind), f.n, f.seed, &d, &l));
    data = DatasetPtr(d);
    labels = LabelsPtr(l);
  } else {
    data = load_dataset(f.input, "", {});
    if (!f.labels.empty()) {
      secoda_labels* l = nullptr;
      check(secoda_labels_load_csv(f.labels.c_str(), &l));
      labels = LabelsPtr(l);
      if (secoda_labels_size(labels.get()) != secoda_dataset_rows(data.get())) {
        throw CliError{2, "label count does not match dataset rows"};
      }
    }
  }

  size_t total = secoda_dataset_rows(data.get());
  size_t fractions = static_cast<size_t>(f.fractions);
  std::string csv = "variant,fraction,n,seconds,auc\n";
  // mean seconds per variant per size, in size order
  std::vector<std::vector<double>> mean_seconds(variants.size());
  std::vector<double> sizes;

  for (size_t k = 1; k <= fractions; ++k) {
    size_t nk = total * k / fractions;
    if (nk == 0) nk = 1;
    sizes.push_back(static_cast<double>(nk));
    secoda_dataset* hraw = nullptr;
    check(secoda_dataset_head(data.get(), nk, &hraw));
    DatasetPtr head(hraw);
    std::vector<uint8_t> is_anomaly;
    bool both_classes = false;
    if (labels) {
      is_anomaly.resize(nk);
      size_t positives = 0;
      for (size_t i = 0; i < nk; ++i) {
        is_anomaly[i] = secoda_labels_get(labels.get(), i) != 0 ? 1 : 0;
        positives += is_anomaly[i];
      }
      // a subset may slice away one class entirely; no AUC then
      both_classes = positives > 0 && positives < nk;
    }
    for (size_t v = 0; v < variants.size(); ++v) {
      secoda_detect_options opts;
      secoda_detect_options_init(&opts);
      opts.pruning_enabled = variants[v].prune ? 1 : 0;
      opts.accelerated_stepping = variants[v].accelerated ? 1 : 0;
      opts.weighted_scores = variants[v].weighted ? 1 : 0;
      opts.threads = f.threads;
      double total_seconds = 0.0;
      for (int r = 0; r < f.repeats; ++r) {
        secoda_result* rraw = nullptr;
        auto t0 = std::chrono::steady_clock::now();
        secoda_status st = secoda_detect(head.get(), &opts, &rraw);
        auto t1 = std::chrono::steady_clock::now();
        ResultPtr result(rraw);
        check(st);
        double seconds = std::chrono::duration<double>(t1 - t0).count();
        total_seconds += seconds;
        std::string auc_field;
        if (both_classes) {
          std::vector<double> scores(nk);
          check(secoda_result_scores(result.get(), scores.data()));
          secoda_scored* sraw = nullptr;
          check(secoda_scored_create(scores.data(), is_anomaly.data(), nk,
                                     &sraw));
          ScoredPtr scored(sraw);
          double auc = 0.0;
          check(secoda_roc_auc(scored.get(), &auc));
          auc_field = fmt(auc);
        }
        csv += variants[v].name + "," +
               fmt(static_cast<double>(k) / static_cast<double>(fractions)) +
               "," + std::to_string(nk) + "," + fmt(seconds) + "," +
               auc_field + "\n";
      }
      mean_seconds[v].push_back(total_seconds / f.repeats);
    }
  }

  write_text(f.out, csv);

  ordered_json m;
  m["command"] = "bench";
  m["version"] = secoda_version();
  if (have_kind) {
    m["kind"] = f.kind;
    m["n"] = total;
    m["seed"] = f.seed;
  } else {
    m["input"] = f.input;
    m["labels"] = f.labels.empty() ? ordered_json(nullptr) : ordered_json(f.labels);
  }
  m["fractions"] = f.fractions;
  m["repeats"] = f.repeats;
  {
    ordered_json names = ordered_json::array();
    for (const Variant& v : variants) names.push_back(v.name);
    m["variants"] = names;
  }
  ordered_json r2;
  for (size_t v = 0; v < variants.size(); ++v) {
    double fit = linear_fit_r2(sizes, mean_seconds[v]);
    r2[variants[v].name] = fit;
    std::printf("r2 %s %s\n", variants[v].name.c_str(), fmt(fit).c_str());
  }
  m["r2"] = r2;
  ordered_json outputs;
  outputs["table"] = f.out;
  outputs["manifest"] = f.out + ".manifest.json";
  m["outputs"] = outputs;
  write_text(f.out + ".manifest.json", m.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SECODA anomaly detection toolkit"};
  app.set_version_flag("--version", secoda_version());
  app.require_subcommand(1);

  DetectFlags df;
  CLI::App* detect = app.add_subcommand("detect", "score a CSV dataset");
  detect->add_option("--input", df.input, "input CSV path")->required();
  detect->add_option("--schema", df.schema, "schema JSON path");
  detect->add_option("--missing-token", df.missing,
                     "missing-value token (repeatable; replaces defaults)");
  detect->add_option("--output", df.output, "scores CSV path")->required();
  detect->add_option("--trace", df.trace, "iteration trace JSONL path");
  detect->add_option("--fraction", df.fraction, "convergence fraction");
  detect->add_option("--prune-quantile", df.prune_quantile, "prune quantile");
  detect->add_option("--prune-start", df.prune_start,
                     "first iteration that may prune");
  detect->add_flag("--no-prune", df.no_prune, "disable pruning");
  detect->add_flag("--no-step", df.no_step, "disable accelerated arity steps");
  detect->add_flag("--unweighted", df.unweighted,
                   "plain-average scores instead of weighted");
  detect->add_option("--range", df.range, "bin range policy")
      ->check(CLI::IsMember({"working", "global"}));
  detect->add_option("--max-iter", df.max_iter, "iteration safety cap");
  detect->add_option("--top", df.top, "preview size on stdout (0 = none)");
  detect->add_option("--threads", df.threads, "worker threads");

  GenerateFlags gf;
  CLI::App* generate =
      app.add_subcommand("generate", "write a labeled synthetic dataset");
  generate->add_option("--kind", gf.kind, "generator kind")
      ->required()
      ->check(CLI::IsMember({"mountain", "helix", "timeseries", "noisymix"}));
  generate->add_option("--n", gf.n, "case count (0 = kind default)");
  generate->add_option("--seed", gf.seed, "generator seed");
  generate->add_option("--out", gf.out, "dataset CSV path")->required();
  generate->add_option("--labels-out", gf.labels_out, "labels CSV path")
      ->required();

  EvaluateFlags ef;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score quality against labels");
  evaluate->add_option("--scores", ef.scores, "scores CSV path")->required();
  evaluate->add_option("--labels", ef.labels, "labels CSV path")->required();
  evaluate->add_option("--metrics-out", ef.metrics_out, "metrics JSON path")
      ->required();
  evaluate->add_option("--roc-out", ef.roc_out, "ROC curve CSV path");
  evaluate->add_option("--pr-out", ef.pr_out, "PR curve CSV path");
  evaluate->add_option("--bootstrap", ef.bootstrap, "bootstrap resamples");
  evaluate->add_option("--band-grid", ef.band_grid,
                       "ROC band grid intervals (0 = raw curve)");
  evaluate->add_option("--level", ef.level, "confidence level");
  evaluate->add_option("--partial-spec", ef.partial_spec,
                       "partial AUC specificity lower bound");
  evaluate->add_option("--partial-sens", ef.partial_sens,
                       "partial AUC sensitivity lower bound");
  evaluate->add_option("--seed", ef.seed, "bootstrap seed");
  evaluate->add_option("--threads", ef.threads, "worker threads");

  BenchFlags bf;
  CLI::App* bench =
      app.add_subcommand("bench", "time detection across nested subset sizes");
  bench->add_option("--input", bf.input, "input CSV path");
  bench->add_option("--labels", bf.labels, "labels CSV for AUC column");
  bench->add_option("--kind", bf.kind, "generator kind for synthetic input");
  bench->add_option("--n", bf.n, "synthetic case count (0 = kind default)");
  bench->add_option("--seed", bf.seed, "generator seed");
  bench->add_option("--fractions", bf.fractions, "number of nested sizes");
  bench->add_option("--repeats", bf.repeats, "timing repeats per cell");
  bench->add_option("--variants", bf.variants,
                    "comma-separated variant list");
  bench->add_option("--out", bf.out, "result table CSV path")->required();
  bench->add_option("--threads", bf.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (detect->parsed()) return run_detect(df);
    if (generate->parsed()) return run_generate(gf);
    if (evaluate->parsed()) return run_evaluate(ef);
    if (bench->parsed()) return run_bench(bf);
  } catch (const CliError& e) {
    std::fprintf(stderr, "secoda: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "secoda: %s\n", e.what());
    return 1;
  }
  return 0;
}
