/*
 * Copyright 2026 The forgeset Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FORGESET_FORGESET_H_
#define FORGESET_FORGESET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FS_API __declspec(dllexport)
#else
#define FS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fs_status {
  FS_OK = 0,
  FS_ERR_BAD_SPEC = 1,
  FS_ERR_SHAPE = 2,
  FS_ERR_LABEL_OUT_OF_RANGE = 3,
  FS_ERR_BRACKET = 4,
  FS_ERR_NO_CONVERGENCE = 5,
  FS_ERR_BUDGET = 6,
  FS_ERR_DIVERGENCE = 7,
  FS_ERR_EMPTY_RETAIN_SET = 8,
  FS_ERR_SINGLE_CLASS = 9,
  FS_ERR_EMPTY_BATCH = 10,
  FS_ERR_PARSE = 11,
  FS_ERR_EMPTY_FILE = 12,
  FS_ERR_FILE = 13,
  FS_ERR_TOO_LARGE = 14,
  FS_ERR_CONFIG = 15,
  FS_ERR_NULL_ARGUMENT = 64,
  FS_ERR_INTERNAL = 65
} fs_status;

typedef struct fs_dataset fs_dataset;
typedef struct fs_model fs_model;
typedef struct fs_selection fs_selection;

typedef enum fs_activation { FS_RELU = 0, FS_IDENTITY = 1 } fs_activation;
typedef enum fs_method {
  FS_RETRAIN = 0,
  FS_FINE_TUNE = 1,
  FS_GRADIENT_ASCENT = 2,
  FS_RANDOM_LABEL = 3,
  FS_L1_SPARSE = 4
} fs_method;
typedef enum fs_scope { FS_SCOPE_ALL = 0, FS_SCOPE_LAST_LAYER = 1 } fs_scope;

typedef struct fs_blo_config {
  double gamma;
  double alpha;
  double beta;
  size_t inner_steps;
  size_t outer_steps;
  int class_granularity; /* 0: samples, 1: classes */
  int easiest;           /* 0: worst case, 1: easiest case */
  int random_lower_init; /* 0: start each lower solve at theta_o */
  int random_binary_w0;  /* 0: uniform m/N start */
  uint64_t seed;
  uint64_t stream;
} fs_blo_config;

typedef struct fs_unlearn_config {
  fs_method method;
  double lambda_reg;
  double lr;
  size_t epochs;
  double l1_coef;
  fs_scope scope;
  uint64_t seed;
  uint64_t stream;
} fs_unlearn_config;

typedef struct fs_eval_report {
  double ua;
  double mia;
  double ra;
  double ta;
} fs_eval_report;

typedef struct fs_gap_report {
  double ua;
  double mia;
  double ra;
  double ta;
  double avg_gap;
} fs_gap_report;

FS_API const char* fs_version(void);
FS_API const char* fs_status_name(fs_status status);
/* Message of the last failed call on this thread ("" if none). */
FS_API const char* fs_last_error(void);

FS_API void fs_blo_config_default(fs_blo_config* config);
FS_API void fs_unlearn_config_default(fs_unlearn_config* config);

/* Datasets */
FS_API fs_status fs_dataset_gen_blobs(size_t n_per_class, size_t classes, size_t dim,
                                      double spread, uint64_t seed, uint64_t stream,
                                      fs_dataset** out);
FS_API fs_status fs_dataset_gen_biased(size_t n, double correlation, uint64_t seed,
                                       uint64_t stream, fs_dataset** out);
FS_API fs_status fs_dataset_load_csv(const char* path, fs_dataset** out);
FS_API fs_status fs_dataset_save_csv(const fs_dataset* data, const char* path);
FS_API size_t fs_dataset_size(const fs_dataset* data);
FS_API size_t fs_dataset_dim(const fs_dataset* data);
FS_API size_t fs_dataset_classes(const fs_dataset* data);
FS_API void fs_dataset_free(fs_dataset* data);

/* Models. sizes = {input, hidden..., classes}. */
FS_API fs_status fs_model_train(const fs_dataset* data, const size_t* sizes, size_t n_sizes,
                                size_t epochs, double lr, fs_activation activation,
                                uint64_t seed, uint64_t stream, fs_model** out);
FS_API fs_status fs_model_load(const char* path, fs_model** out);
FS_API fs_status fs_model_save(const fs_model* model, const char* path);
FS_API fs_status fs_model_accuracy(const fs_model* model, const fs_dataset* data,
                                   double* out);
FS_API void fs_model_free(fs_model* model);

/* Forget-set selection */
FS_API fs_status fs_select(const fs_dataset* data, size_t m, const fs_model* theta_o,
                           const fs_blo_config* config, fs_selection** out);
/* Copy up to `cap` entries into `out` (which may be NULL) and report the full
   length through `len`. */
FS_API fs_status fs_selection_mask(const fs_selection* sel, size_t* out, size_t cap,
                                   size_t* len);
FS_API fs_status fs_selection_weights(const fs_selection* sel, double* out, size_t cap,
                                      size_t* len);
FS_API fs_status fs_selection_trajectory(const fs_selection* sel, double* out, size_t cap,
                                         size_t* len);
FS_API void fs_selection_free(fs_selection* sel);

/* Unlearning and evaluation; masks hold sample indices. */
FS_API fs_status fs_unlearn(const fs_model* theta_o, const fs_dataset* data,
                            const size_t* mask, size_t mask_len,
                            const fs_unlearn_config* config, fs_model** out);
FS_API fs_status fs_evaluate(const fs_model* theta_u, const fs_dataset* train,
                             const size_t* mask, size_t mask_len, const fs_dataset* test,
                             fs_eval_report* out);
FS_API fs_status fs_avg_gap(const fs_eval_report* report, const fs_eval_report* reference,
                            fs_gap_report* out);

FS_API fs_status fs_project_capped_simplex(const double* a, size_t n, size_t m, double* out);

/* Runs one harness verb. seed may be NULL to keep the config's seed. */
FS_API fs_status fs_harness_run(const char* verb, const char* config_path,
                                const char* out_dir, const uint64_t* seed, int force_guard);

#ifdef __cplusplus
}
#endif

#endif /* FORGESET_FORGESET_H_ */
