// Copyright 2026 The MT-CRL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTCRL_MTCRL_H_
#define MTCRL_MTCRL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(MTCRL_BUILDING_LIBRARY)
#define MTCRL_API __attribute__((visibility("default")))
#else
#define MTCRL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mtcrl_status {
  MTCRL_OK = 0,
  MTCRL_ERR_INVALID_ARGUMENT = 1,
  MTCRL_ERR_SHAPE = 2,
  MTCRL_ERR_DOMAIN = 3,
  MTCRL_ERR_STALE_TAPE = 4,
  MTCRL_ERR_NUMERIC = 5,
  MTCRL_ERR_DEGENERATE = 6,
  MTCRL_ERR_CONFIG = 7,
  MTCRL_ERR_DATA = 8,
  MTCRL_ERR_IO = 9,
  MTCRL_ERR_INTERNAL = 10
} mtcrl_status;

typedef struct mtcrl_config mtcrl_config;
typedef struct mtcrl_run mtcrl_run;

MTCRL_API const char* mtcrl_version(void);
MTCRL_API const char* mtcrl_status_name(mtcrl_status status);
/* Message of the last failure on the calling thread; "" when none. */
MTCRL_API const char* mtcrl_last_error(void);
/* JSON object describing the last failure on the calling thread, with a
 * training snapshot when a run aborted. Free with mtcrl_string_free. */
MTCRL_API char* mtcrl_last_error_json(void);
MTCRL_API void mtcrl_string_free(char* s);

/* Configuration. */
MTCRL_API mtcrl_status mtcrl_config_load(const char* path, mtcrl_config** out);
MTCRL_API mtcrl_status mtcrl_config_parse(const char* json, mtcrl_config** out);
MTCRL_API mtcrl_status mtcrl_config_set_seed(mtcrl_config* config, uint64_t seed);
MTCRL_API mtcrl_status mtcrl_config_to_json(const mtcrl_config* config, char** out);
MTCRL_API mtcrl_status mtcrl_config_hash(const mtcrl_config* config, char** out);
MTCRL_API void mtcrl_config_free(mtcrl_config* config);

/* Writes train/valid/test containers (and CSV when csv != 0) to out_dir. */
MTCRL_API mtcrl_status mtcrl_gen_data(const mtcrl_config* config, const char* out_dir, int csv);

/* Training. */
MTCRL_API mtcrl_status mtcrl_train(const mtcrl_config* config, mtcrl_run** out);
MTCRL_API mtcrl_status mtcrl_run_report_json(const mtcrl_run* run, int include_timing, char** out);
/* Names: acc_train, acc_val, acc_valid_env, rho_spur, max_cross_module_corr,
 * max_cross_module_corr_test, epochs_run, selected_epoch, wall_clock_seconds. */
MTCRL_API mtcrl_status mtcrl_run_metric(const mtcrl_run* run, const char* name, double* out);
/* report.json, checkpoint.json, routing.csv, similarity.csv, saliency.csv,
 * module_corr.csv and module_corr.svg. */
MTCRL_API mtcrl_status mtcrl_run_write_artifacts(const mtcrl_run* run, const char* out_dir);
MTCRL_API void mtcrl_run_free(mtcrl_run* run);

/* Experiments. Each writes CSV tables and a summary JSON to out_dir and
 * returns the summary through `summary` when it is not NULL. */
MTCRL_API mtcrl_status mtcrl_table2(const mtcrl_config* const* configs, size_t n_configs,
                                    const uint64_t* seeds, size_t n_seeds, const char* out_dir,
                                    char** summary);
MTCRL_API mtcrl_status mtcrl_sweep_tasks(const mtcrl_config* config, const size_t* task_counts,
                                         size_t n_counts, const uint64_t* seeds, size_t n_seeds,
                                         const char* out_dir, char** summary);
MTCRL_API mtcrl_status mtcrl_ablate(const mtcrl_config* config, const uint64_t* seeds, size_t n_seeds,
                                    const char* out_dir, char** summary);

/* Runs every closed-form oracle against its numerical counterpart over
 * `seeds` seeds, writes oracle_check.csv, and sets *all_passed. */
MTCRL_API mtcrl_status mtcrl_oracle_check(int seeds, uint64_t base_seed, const char* out_dir,
                                          int* all_passed, char** csv);

/* Diagnostics of a saved checkpoint on the config's dataset: saliency,
 * task-to-module gradients, similarity graph and module correlations. */
MTCRL_API mtcrl_status mtcrl_analyze(const char* checkpoint_path, const mtcrl_config* config,
                                     const char* out_dir, char** summary);

#ifdef __cplusplus
}
#endif

#endif  // MTCRL_MTCRL_H_
