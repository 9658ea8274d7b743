// Copyright 2026 The lmgeo Authors
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

/* C interface to the lmgeo delay-based geolocation engine.
 *
 * Objects are opaque handles created by *_load / *_fit / *_create style
 * functions and released by the matching *_free. Every fallible call returns
 * an lmgeo_status; on failure lmgeo_last_error() describes the problem for
 * the calling thread. Strings returned through char** are owned by the caller
 * and released with lmgeo_string_free. Structured options are passed as JSON
 * documents; unknown keys are rejected.
 */
#ifndef LMGEO_H
#define LMGEO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LMGEO_API __declspec(dllexport)
#else
#define LMGEO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lmgeo_status {
  LMGEO_OK = 0,
  LMGEO_ERR_INVALID_ARGUMENT = 1,
  LMGEO_ERR_IO = 2,
  LMGEO_ERR_PARSE = 3,
  LMGEO_ERR_INSUFFICIENT_DATA = 4,
  LMGEO_ERR_NON_PHYSICAL = 5,
  LMGEO_ERR_NO_LANDMARKS = 6,
  LMGEO_ERR_GEOMETRY = 7,
  LMGEO_ERR_INTERNAL = 100
} lmgeo_status;

typedef enum lmgeo_tech {
  LMGEO_TECH_WIFI = 0,
  LMGEO_TECH_3G = 1,
  LMGEO_TECH_4G = 2,
  LMGEO_TECH_NA = 3
} lmgeo_tech;

typedef struct lmgeo_dataset lmgeo_dataset;
typedef struct lmgeo_model lmgeo_model;
typedef struct lmgeo_localization lmgeo_localization;

LMGEO_API const char* lmgeo_version(void);
LMGEO_API const char* lmgeo_status_string(lmgeo_status status);
/* Message of the last failed call on this thread, "" if none. */
LMGEO_API const char* lmgeo_last_error(void);
LMGEO_API void lmgeo_string_free(char* s);

LMGEO_API lmgeo_status lmgeo_great_circle_km(double lat1, double lon1,
                                             double lat2, double lon2,
                                             double* out_km);

/* Measurement datasets (canonical measurement CSV). Malformed lines are
 * skipped and listed as rejections; they never fail the load. */
LMGEO_API lmgeo_status lmgeo_dataset_load(const char* path,
                                          lmgeo_dataset** out);
LMGEO_API lmgeo_status lmgeo_dataset_save(const lmgeo_dataset* dataset,
                                          const char* path);
LMGEO_API size_t lmgeo_dataset_record_count(const lmgeo_dataset* dataset);
LMGEO_API size_t lmgeo_dataset_rejection_count(const lmgeo_dataset* dataset);
/* reason stays valid until the dataset is freed. */
LMGEO_API lmgeo_status lmgeo_dataset_rejection(const lmgeo_dataset* dataset,
                                               size_t index, size_t* line,
                                               const char** reason);
/* Attaches a target_id,continent table used for continent keys. */
LMGEO_API lmgeo_status lmgeo_dataset_load_target_continents(
    lmgeo_dataset* dataset, const char* path);
LMGEO_API void lmgeo_dataset_free(lmgeo_dataset* dataset);

/* Synthetic data. config_json may be NULL or partial; missing fields take
 * defaults. lmgeo_generate writes measurements.csv, ground_truth.csv,
 * target_continents.csv and config.json into out_dir. */
LMGEO_API lmgeo_status lmgeo_synth_resolve_config(const char* config_json,
                                                  char** out_json);
LMGEO_API lmgeo_status lmgeo_generate(const char* config_json,
                                      const char* out_dir);
LMGEO_API lmgeo_status lmgeo_generate_dataset(const char* config_json,
                                              lmgeo_dataset** out);

/* Delay-distance models. options_json keys: kind (global, continent,
 * technology, hybrid, linear), degree, min_submodel_samples,
 * fit_on_bin_medians, bin_width_ms. */
LMGEO_API lmgeo_status lmgeo_model_fit(const lmgeo_dataset* dataset,
                                       const char* options_json,
                                       lmgeo_model** out);
LMGEO_API lmgeo_status lmgeo_model_linear_baseline(lmgeo_model** out);
LMGEO_API lmgeo_status lmgeo_model_load(const char* path, lmgeo_model** out);
LMGEO_API lmgeo_status lmgeo_model_save(const lmgeo_model* model,
                                        const char* path);
LMGEO_API lmgeo_status lmgeo_model_to_json(const lmgeo_model* model,
                                           char** out_json);
LMGEO_API lmgeo_status lmgeo_model_estimate(const lmgeo_model* model,
                                            double min_rtt_ms, lmgeo_tech tech,
                                            int same_continent, double* out_km,
                                            int* out_fell_back);
LMGEO_API size_t lmgeo_model_fallback_count(const lmgeo_model* model);
LMGEO_API lmgeo_status lmgeo_model_fallback(const lmgeo_model* model,
                                            size_t index, const char** key,
                                            const char** reason);
LMGEO_API void lmgeo_model_free(lmgeo_model* model);

LMGEO_API lmgeo_status lmgeo_write_bin_diagnostics(const lmgeo_dataset* dataset,
                                                   double bin_width_ms,
                                                   const char* path);

/* Localization of every target in a dataset. options_json keys: filter_km
 * (number or null), baseline ("none" or "closest"), same_continent_only,
 * n_points. model may be NULL when baseline is "closest". */
typedef struct lmgeo_target_estimate {
  const char* target_id;
  int ok;
  double lat;
  double lon;
  size_t n_used;
  size_t n_discarded;
  const char* reason; /* "" when ok */
} lmgeo_target_estimate;

LMGEO_API lmgeo_status lmgeo_localize(const lmgeo_dataset* dataset,
                                      const lmgeo_model* model,
                                      const char* options_json,
                                      lmgeo_localization** out);
LMGEO_API size_t lmgeo_localization_count(const lmgeo_localization* results);
LMGEO_API lmgeo_status lmgeo_localization_get(
    const lmgeo_localization* results, size_t index,
    lmgeo_target_estimate* out);
/* target_id,lat,lon,n_used,n_discarded,reason */
LMGEO_API lmgeo_status lmgeo_localization_write_csv(
    const lmgeo_localization* results, const char* path);
LMGEO_API void lmgeo_localization_free(lmgeo_localization* results);

/* k-fold cross-validation. options_json keys: models (array of kinds),
 * filters (array of numbers, null for unfiltered), k, seed (required),
 * degree, min_submodel_samples, same_continent_only, jobs, n_points,
 * count_bin_width, distance_bin_width_km. Writes per-configuration CSVs and
 * summary.json into out_dir; out_summary_json may be NULL. */
LMGEO_API lmgeo_status lmgeo_evaluate(const lmgeo_dataset* dataset,
                                      const char* options_json,
                                      const char* out_dir,
                                      char** out_summary_json);

#ifdef __cplusplus
}
#endif

#endif /* LMGEO_H */
