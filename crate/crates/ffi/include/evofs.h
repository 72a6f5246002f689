#ifndef EVOFS_H
#define EVOFS_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  EVOFS_STATUS_OK = 0,
  EVOFS_STATUS_NULL_POINTER = 1,
  EVOFS_STATUS_IO = 2,
  EVOFS_STATUS_PARSE = 3,
  EVOFS_STATUS_DATA = 4,
  EVOFS_STATUS_INVALID_ARGUMENT = 5,
  EVOFS_STATUS_DIMENSION = 6,
  EVOFS_STATUS_UNSUPPORTED = 7,
  EVOFS_STATUS_LEAKAGE = 8,
  EVOFS_STATUS_CONFIG = 9,
  EVOFS_STATUS_UTF8 = 10,
  EVOFS_STATUS_PANIC = 11,
} EvofsStatus;

typedef enum {
  EVOFS_CLASSIFIER_KIND_KNN = 0,
  EVOFS_CLASSIFIER_KIND_DTC = 1,
  EVOFS_CLASSIFIER_KIND_RFC = 2,
  EVOFS_CLASSIFIER_KIND_ETC = 3,
} EvofsClassifierKind;

typedef enum {
  EVOFS_MAX_FEATURES_ALL = 0,
  EVOFS_MAX_FEATURES_SQRT = 1,
  EVOFS_MAX_FEATURES_COUNT = 2,
} EvofsMaxFeatures;

/**
 * Opaque dataset handle.
 */
typedef struct EvofsDataset EvofsDataset;

/**
 * Opaque result of a GA selection run.
 */
typedef struct EvofsSelection EvofsSelection;

typedef struct {
  EvofsClassifierKind kind;
  size_t k_neighbors;
  /**
   * 0 means unlimited.
   */
  size_t max_depth;
  size_t min_samples_split;
  size_t min_samples_leaf;
  EvofsMaxFeatures max_features;
  /**
   * Used when `max_features` is `COUNT`.
   */
  size_t max_features_count;
  size_t n_estimators;
  uint64_t seed;
} EvofsClassifierSpec;

typedef struct {
  double p_crossover;
  double p_mutation;
  double per_gene_flip;
  double init_prob;
  size_t population;
  size_t generations;
  size_t elitism;
  uint64_t seed;
} EvofsGaConfig;

typedef struct {
  double alpha;
  bool variance_penalty;
  size_t inner_folds;
  EvofsClassifierSpec classifier;
  uint64_t fold_seed;
} EvofsFitnessConfig;

typedef struct {
  double effectiveness;
  double variance;
  size_t num_selected;
  size_t num_total;
  double fitness;
} EvofsFitnessReport;

typedef struct {
  size_t generation;
  double best_fitness;
  double mean_fitness;
  double best_accuracy;
  size_t best_num_features;
} EvofsGenerationStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on the calling thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *evofs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *evofs_version(void);

/**
 * Load a CSV with a header row. `label_column` may be NULL to use the last
 * column.
 *
 * # Safety
 * `path` and a non-NULL `label_column` must be NUL-terminated strings;
 * `out` must be writable.
 */
EvofsStatus evofs_dataset_load_csv(const char *path, const char *label_column, EvofsDataset **out);

/**
 * Build a dataset from a row-major `rows x cols` feature array and 0/1
 * labels. Features are named `f0, f1, ...`.
 *
 * # Safety
 * `features` must hold `rows * cols` doubles, `labels` `rows` bytes, and
 * `out` must be writable.
 */
EvofsStatus evofs_dataset_from_arrays(const double *features,
                                      size_t rows,
                                      size_t cols,
                                      const uint8_t *labels,
                                      EvofsDataset **out);

/**
 * # Safety
 * `ds` must be NULL or a handle from this library that was not freed yet.
 */
void evofs_dataset_free(EvofsDataset *ds);

/**
 * # Safety
 * `ds` must be a live handle; `rows` and `cols` must be writable.
 */
EvofsStatus evofs_dataset_shape(const EvofsDataset *ds, size_t *rows, size_t *cols);

/**
 * Instances per class label. For datasets loaded from CSV, label 0 is the
 * majority class.
 *
 * # Safety
 * `ds` must be a live handle; `counts` must hold two writable values.
 */
EvofsStatus evofs_dataset_class_counts(const EvofsDataset *ds, size_t *counts);

/**
 * # Safety
 * `ds` must be a live handle; `out` must be writable.
 */
EvofsStatus evofs_dataset_majority_baseline(const EvofsDataset *ds, double *out);

/**
 * Size-penalized fitness without the variance term.
 *
 * # Safety
 * `out` must be writable.
 */
EvofsStatus evofs_fitness_eq1(double effectiveness,
                              size_t num_selected,
                              size_t num_total,
                              double alpha,
                              double *out);

/**
 * Size-penalized fitness with the fold-variance term.
 *
 * # Safety
 * `out` must be writable.
 */
EvofsStatus evofs_fitness_eq2(double effectiveness,
                              double variance,
                              size_t num_selected,
                              size_t num_total,
                              double alpha,
                              double *out);

/**
 * Fill `out` with the wrapper-fitness defaults for `kind`.
 *
 * # Safety
 * `out` must be writable.
 */
EvofsStatus evofs_classifier_default(EvofsClassifierKind kind, EvofsClassifierSpec *out);

/**
 * Fill `out` with the default GA parameters.
 *
 * # Safety
 * `out` must be writable.
 */
EvofsStatus evofs_ga_config_default(EvofsGaConfig *out);

/**
 * Score one feature subset. `genotype` holds one byte per feature, nonzero
 * meaning selected.
 *
 * # Safety
 * `ds` must be a live handle, `genotype` must hold `len` bytes, `cfg` must
 * be readable and `out` writable.
 */
EvofsStatus evofs_evaluate(const EvofsDataset *ds,
                           const uint8_t *genotype,
                           size_t len,
                           const EvofsFitnessConfig *cfg,
                           EvofsFitnessReport *out);

/**
 * Run GA feature selection over the whole dataset.
 *
 * # Safety
 * `ds` must be a live handle, `ga` and `fit` readable, `out` writable.
 */
EvofsStatus evofs_ga_select(const EvofsDataset *ds,
                            const EvofsGaConfig *ga,
                            const EvofsFitnessConfig *fit,
                            EvofsSelection **out);

/**
 * Selected column indices in ascending order. The array is owned by the
 * selection and lives until it is freed.
 *
 * # Safety
 * `sel` must be a live handle and `len` writable.
 */
const size_t *evofs_selection_features(const EvofsSelection *sel, size_t *len);

/**
 * Fitness and mean inner-CV accuracy of the selected subset.
 *
 * # Safety
 * `sel` must be a live handle; non-NULL outputs must be writable.
 */
EvofsStatus evofs_selection_score(const EvofsSelection *sel,
                                  double *fitness,
                                  double *effectiveness);

/**
 * Number of logged generations (generations + 1).
 *
 * # Safety
 * `sel` must be NULL or a live handle.
 */
size_t evofs_selection_log_len(const EvofsSelection *sel);

/**
 * # Safety
 * `sel` must be a live handle and `out` writable.
 */
EvofsStatus evofs_selection_log_row(const EvofsSelection *sel,
                                    size_t index,
                                    EvofsGenerationStats *out);

/**
 * # Safety
 * `sel` must be NULL or a handle from this library that was not freed yet.
 */
void evofs_selection_free(EvofsSelection *sel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVOFS_H */
