/* Copyright 2026 The cmsched Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libcmsched.
 *
 * Every fallible call returns a cms_status. On failure a description is
 * available from cms_last_error() until the next failing call on the same
 * thread. Handles are opaque and owned by the caller; destroy functions accept
 * NULL. Point sets cross the boundary row-major: point i occupies
 * values[i * dim .. i * dim + dim - 1].
 */

#ifndef CMSCHED_H_
#define CMSCHED_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CMS_API __declspec(dllexport)
#else
#define CMS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cms_status {
  CMS_OK = 0,
  CMS_ERR_CONFIG = 1,   /* invalid configuration or argument value */
  CMS_ERR_RUNTIME = 2,  /* failure while running: non-finite loss, audit, I/O */
  CMS_ERR_ARGUMENT = 3, /* NULL pointer or undersized output buffer */
  CMS_ERR_INTERNAL = 4  /* unexpected exception */
} cms_status;

CMS_API const char* cms_version(void);
CMS_API const char* cms_last_error(void);

/* ---- noise array ---------------------------------------------------- */

typedef struct cms_noise_array cms_noise_array;

CMS_API cms_status cms_noise_array_create(double sigma_min, double sigma_max, double rho, int64_t s1,
                                          cms_noise_array** out);
CMS_API void cms_noise_array_destroy(cms_noise_array* array);
/* Number of sigmas, s1 + 1. */
CMS_API int64_t cms_noise_array_size(const cms_noise_array* array);
CMS_API cms_status cms_noise_array_copy(const cms_noise_array* array, double* out, size_t capacity);

/* Writes the n_k + 1 subsampled grid indices. */
CMS_API cms_status cms_subsample_indices(int64_t s1, int64_t n_k, int64_t* out, size_t capacity);

/* ---- schedules ------------------------------------------------------ */

/* Each output array holds batch_size entries; sigma_lo and sigma_hi may be NULL. */
CMS_API cms_status cms_polynomial_schedule(const cms_noise_array* array, int64_t n_k, double curve,
                                           double jitter_std, int64_t batch_size, uint64_t seed,
                                           int64_t* level_index, double* sigma_lo, double* sigma_hi);
CMS_API cms_status cms_lognormal_schedule(const cms_noise_array* array, int64_t n_k, double mean_log,
                                          double std_log, int64_t batch_size, uint64_t seed,
                                          int64_t* level_index, double* sigma_lo, double* sigma_hi);

/* kind is "sinusoidal", "doubling" or "constant". */
CMS_API cms_status cms_curriculum_n(const char* kind, int64_t s0, int64_t s1_cap, int64_t total_steps, double rho,
                                    int64_t k, int64_t* out);

/* ---- evaluation ----------------------------------------------------- */

CMS_API cms_status cms_sliced_wasserstein(const double* a, size_t a_count, const double* b, size_t b_count, int dim,
                                          int projections, uint64_t seed, double* out);

/* ---- trained models ------------------------------------------------- */

typedef struct cms_model cms_model;

CMS_API cms_status cms_model_load(const char* checkpoint_path, cms_model** out);
CMS_API void cms_model_destroy(cms_model* model);
CMS_API int cms_model_data_dim(const cms_model* model);
/* Draws n points (n * data_dim values) with 1 to 4 sampling steps. */
CMS_API cms_status cms_model_sample(const cms_model* model, const cms_noise_array* array, int64_t n, int steps,
                                    uint64_t seed, double* out, size_t capacity);

/* ---- subcommands ---------------------------------------------------- */

typedef void (*cms_log_fn)(const char* line, void* user);

typedef struct cms_command_options {
  const char* subcommand; /* schedule, curriculum, analyze, train, sample, eval */
  const char* config_path;
  const char* output_dir; /* NULL means "out" */
  int has_seed;           /* when 0, the config or manifest seed is used, else 0 */
  uint64_t seed;
  const char* const* overrides; /* "key.path=value" */
  size_t override_count;
  const char* const* compare_paths; /* eval only */
  size_t compare_count;
  cms_log_fn log; /* may be NULL */
  void* log_user;
} cms_command_options;

CMS_API cms_status cms_run_command(const cms_command_options* options);

#ifdef __cplusplus
}
#endif

#endif /* CMSCHED_H_ */
