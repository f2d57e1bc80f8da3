/*
 * secoda.h - C API for the SECODA anomaly detector.
 *
 * SECODA assigns every case of a mixed categorical/numerical table an
 * average anomaly score (aas). Low scores mean anomalous; frequently
 * occurring value constellations earn high scores. The library also ships
 * labeled synthetic dataset generators and evaluation statistics for
 * scored binary data.
 *
 * All functions return secoda_status unless stated otherwise. On any
 * failure secoda_last_error() yields a message for the calling thread.
 * Objects are created through secoda_* constructors and must be released
 * with their matching _free function. Handles are opaque.
 *
 * Datasets and results are immutable once created, so a single handle may
 * be shared across threads for reading.
 */

#ifndef SECODA_H
#define SECODA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum secoda_status {
  SECODA_OK = 0,
  SECODA_ERROR_INVALID_ARGUMENT = 1,
  SECODA_ERROR_IO = 2,
  SECODA_ERROR_PARSE = 3,
  SECODA_ERROR_MAX_ITERATIONS = 4,
  SECODA_ERROR_INTERNAL = 5
} secoda_status;

/* Message describing the most recent failure on this thread.
 * Owned by the library; valid until the next failing call. */
const char* secoda_last_error(void);

const char* secoda_version(void);

/* Frees strings returned through char** output parameters. */
void secoda_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */
/* ------------------------------------------------------------------ */

typedef struct secoda_dataset secoda_dataset;

/* Loads a CSV file with a header row.
 *
 * schema_json may be NULL, in which case attribute kinds are inferred:
 * a column is numerical iff every non-missing cell parses as a finite
 * real. Otherwise it must name a JSON document of the form
 *   {"attributes": [{"name": "x", "kind": "numerical"}, ...]}
 * covering the header columns in order.
 *
 * missing_tokens lists cell spellings treated as missing values; pass
 * NULL with n_missing_tokens 0 for the defaults "" and "NA".
 */
secoda_status secoda_dataset_load_csv(const char* csv_path,
                                      const char* schema_json,
                                      const char* const* missing_tokens,
                                      size_t n_missing_tokens,
                                      secoda_dataset** out);

secoda_status secoda_dataset_write_csv(const secoda_dataset* data,
                                       const char* csv_path);

/* First n cases of a dataset as a new dataset (schema shared). */
secoda_status secoda_dataset_head(const secoda_dataset* data, size_t n,
                                  secoda_dataset** out);

size_t secoda_dataset_rows(const secoda_dataset* data);
size_t secoda_dataset_cols(const secoda_dataset* data);

/* Schema as the JSON document accepted by secoda_dataset_load_csv.
 * *out is malloc'd; release with secoda_string_free. */
secoda_status secoda_dataset_schema_json(const secoda_dataset* data,
                                         char** out);

void secoda_dataset_free(secoda_dataset* data);

/* ------------------------------------------------------------------ */
/* Detection                                                           */
/* ------------------------------------------------------------------ */

typedef enum secoda_range_policy {
  SECODA_RANGE_WORKING_SET = 0, /* bin edges from the current working set */
  SECODA_RANGE_GLOBAL = 1       /* bin edges from the original dataset */
} secoda_range_policy;

typedef struct secoda_detect_options {
  double anomaly_fraction;   /* stop once this fraction scores <= s */
  double prune_quantile;     /* freeze scores at or above this quantile */
  int prune_start_iteration; /* first iteration allowed to prune */
  int pruning_enabled;       /* 0 disables pruning (Pruneless variant) */
  int accelerated_stepping;  /* 0 grows arity by 1 (Stepless variant) */
  int weighted_scores;       /* 0 averages iterations uniformly */
  secoda_range_policy range_policy;
  int max_iterations; /* exceeded -> SECODA_ERROR_MAX_ITERATIONS */
  int initial_arity;
  double initial_stop_point;
  int threads; /* worker threads; results do not depend on it */
} secoda_detect_options;

/* Fills *opts with the defaults (fraction 0.003, quantile 0.95, pruning
 * from iteration 11, accelerated weighted scoring, working-set ranges,
 * at most 1000 iterations, arity 2, stop point 1.0, one thread). */
void secoda_detect_options_init(secoda_detect_options* opts);

typedef struct secoda_result secoda_result;

/* One row of the iteration trace. */
typedef struct secoda_trace_record {
  int32_t iteration;
  int32_t arity;      /* b used for this iteration's discretization */
  double stop_point;  /* s after this iteration's update */
  uint64_t working;   /* working set size entering the iteration */
  uint64_t pruned;    /* cases frozen by pruning this iteration */
  uint64_t below_s;   /* working cases with aas <= s */
} secoda_trace_record;

/* Runs the detector. On SECODA_ERROR_MAX_ITERATIONS *out still receives
 * a result whose trace covers the iterations run (scores are absent). */
secoda_status secoda_detect(const secoda_dataset* data,
                            const secoda_detect_options* opts,
                            secoda_result** out);

size_t secoda_result_cases(const secoda_result* result);
int32_t secoda_result_iterations(const secoda_result* result);

/* Average anomaly score of one case; cases are numbered by input row. */
double secoda_result_score(const secoda_result* result, size_t case_id);

/* Copies all scores into caller storage of length secoda_result_cases. */
secoda_status secoda_result_scores(const secoda_result* result,
                                   double* out_scores);

size_t secoda_result_trace_length(const secoda_result* result);
secoda_status secoda_result_trace(const secoda_result* result,
                                  secoda_trace_record* out_records);

/* CSV "case_id,aas,rank"; rank 1 is the lowest score, ties share the
 * smallest rank of their group. */
secoda_status secoda_result_write_scores(const secoda_result* result,
                                         const char* csv_path);

/* Iteration trace as JSON lines. */
secoda_status secoda_result_write_trace(const secoda_result* result,
                                        const char* jsonl_path);

void secoda_result_free(secoda_result* result);

/* ------------------------------------------------------------------ */
/* Synthetic data                                                      */
/* ------------------------------------------------------------------ */

typedef enum secoda_generator_kind {
  SECODA_GEN_MOUNTAIN = 0,   /* 3 numerical, bell surface */
  SECODA_GEN_HELIX = 1,      /* 3 numerical + banded color */
  SECODA_GEN_TIMESERIES = 2, /* time/value trajectory */
  SECODA_GEN_NOISYMIX = 3    /* blobs, two patterned categoricals */
} secoda_generator_kind;

typedef struct secoda_labels secoda_labels;

/* Labels: 0 = normal, 1..4 = planted anomaly of type I..IV. */

/* Generates a labeled dataset. n 0 picks the kind's default case count.
 * Every planted anomaly provably satisfies its type criterion against
 * the generated bulk. Row order is shuffled deterministically from the
 * seed, so any prefix is an unbiased subsample. */
secoda_status secoda_generate(secoda_generator_kind kind, size_t n,
                              uint64_t seed, secoda_dataset** out_data,
                              secoda_labels** out_labels);

size_t secoda_labels_size(const secoda_labels* labels);
uint8_t secoda_labels_get(const secoda_labels* labels, size_t case_id);

secoda_status secoda_labels_head(const secoda_labels* labels, size_t n,
                                 secoda_labels** out);

/* CSV "case_id,label" with labels normal,I,II,III,IV. */
secoda_status secoda_labels_write_csv(const secoda_labels* labels,
                                      const char* csv_path);
secoda_status secoda_labels_load_csv(const char* csv_path,
                                     secoda_labels** out);

void secoda_labels_free(secoda_labels* labels);

/* ------------------------------------------------------------------ */
/* Evaluation                                                          */
/* ------------------------------------------------------------------ */

/* Scored binary data. Scores follow the detector orientation: lower
 * means more anomalous, and a case is predicted anomalous at threshold
 * t iff score <= t. */

typedef struct secoda_scored secoda_scored;

secoda_status secoda_scored_create(const double* scores,
                                   const uint8_t* is_anomaly, size_t n,
                                   secoda_scored** out);

/* Joins a scores CSV (case_id,aas,rank) with a labels CSV on case_id.
 * Any case present in one file but not the other is an error. */
secoda_status secoda_scored_load(const char* scores_csv,
                                 const char* labels_csv,
                                 secoda_scored** out);

size_t secoda_scored_size(const secoda_scored* scored);

void secoda_scored_free(secoda_scored* scored);

typedef struct secoda_confusion {
  uint64_t tp, fp, fn, tn;
} secoda_confusion;

secoda_status secoda_confusion_at(const secoda_scored* scored,
                                  double threshold,
                                  secoda_confusion* out);

/* Threshold metrics; members are NaN where the denominator is zero. */
typedef struct secoda_threshold_metrics {
  double sensitivity;
  double specificity;
  double precision;
  double accuracy;
  double f1;
  double mcc;
  double kappa;
} secoda_threshold_metrics;

secoda_status secoda_metrics_at(const secoda_scored* scored,
                                double threshold,
                                secoda_threshold_metrics* out);

/* Area under the ROC curve; ties contribute half. */
secoda_status secoda_roc_auc(const secoda_scored* scored, double* out);

/* Partial ROC area over a specificity or sensitivity range, optionally
 * standardized to [0.5, 1] (0.5 = chance, 1 = perfect in the region). */
typedef enum secoda_partial_axis {
  SECODA_PARTIAL_SPECIFICITY = 0,
  SECODA_PARTIAL_SENSITIVITY = 1
} secoda_partial_axis;

secoda_status secoda_partial_auc(const secoda_scored* scored,
                                 secoda_partial_axis axis, double range_lo,
                                 double range_hi, int standardized,
                                 double* out);

/* Area under the precision/recall curve (step interpolation). */
secoda_status secoda_pr_auc(const secoda_scored* scored, double* out);

/* ROC points: n_points entries of (fpr, tpr) written pairwise. Call with
 * points NULL to query the length. */
secoda_status secoda_roc_points(const secoda_scored* scored, double* points,
                                size_t* n_points);
secoda_status secoda_pr_points(const secoda_scored* scored, double* points,
                               size_t* n_points);

typedef enum secoda_curve_statistic {
  SECODA_STAT_ROC_AUC = 0,
  SECODA_STAT_PR_AUC = 1,
  SECODA_STAT_PARTIAL_SPECIFICITY = 2, /* standardized, range below */
  SECODA_STAT_PARTIAL_SENSITIVITY = 3
} secoda_curve_statistic;

typedef struct secoda_bootstrap_options {
  int32_t resamples;  /* at least 100 */
  uint64_t seed;
  double level;       /* confidence level, e.g. 0.95 */
  double range_lo;    /* partial statistics only */
  double range_hi;
  int threads;
} secoda_bootstrap_options;

void secoda_bootstrap_options_init(secoda_bootstrap_options* opts);

typedef struct secoda_interval {
  double point;
  double lo;
  double hi;
} secoda_interval;

/* Stratified percentile bootstrap: anomalies and normals are resampled
 * independently, preserving class counts. Deterministic in the seed and
 * independent of the thread count. */
secoda_status secoda_bootstrap_ci(const secoda_scored* scored,
                                  secoda_curve_statistic statistic,
                                  const secoda_bootstrap_options* opts,
                                  secoda_interval* out);

/* Pointwise ROC confidence band: for each fpr in the grid, the bootstrap
 * interval of tpr at that fpr. out holds n_grid intervals. */
secoda_status secoda_roc_band(const secoda_scored* scored,
                              const double* fpr_grid, size_t n_grid,
                              const secoda_bootstrap_options* opts,
                              secoda_interval* out);

/* Paired bootstrap test for a difference in partial AUC (specificity
 * axis) between two scorings of the same cases. Labels must agree.
 * Writes the observed difference a-b and a two-sided p-value. */
secoda_status secoda_pauc_diff_test(const secoda_scored* a,
                                    const secoda_scored* b,
                                    const secoda_bootstrap_options* opts,
                                    double* out_diff, double* out_p);

typedef enum secoda_threshold_criterion {
  SECODA_BEST_YOUDEN = 0, /* sensitivity + specificity - 1 */
  SECODA_BEST_MCC = 1
} secoda_threshold_criterion;

typedef struct secoda_threshold_result {
  double threshold;
  double objective;
  secoda_confusion confusion;
  secoda_threshold_metrics metrics;
} secoda_threshold_result;

/* Scans distinct scores as candidate thresholds; ties on the objective
 * resolve to the smallest threshold. */
secoda_status secoda_best_threshold(const secoda_scored* scored,
                                    secoda_threshold_criterion criterion,
                                    secoda_threshold_result* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SECODA_H */
