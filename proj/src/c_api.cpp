// Copyright 2026 The cmsched Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cmsched.h"

#include <new>
#include <string>

#include "cmsched/commands.hpp"
#include "cmsched/curriculum.hpp"
#include "cmsched/error.hpp"
#include "cmsched/io.hpp"
#include "cmsched/karras.hpp"
#include "cmsched/schedule.hpp"
#include "cmsched/swd.hpp"
#include "cmsched/toy_ct.hpp"

#ifndef CMSCHED_VERSION
#define CMSCHED_VERSION "0.0.0"
#endif

struct cms_noise_array {
  cmsched::NoiseArray array;
};

struct cms_model {
  cmsched::ToyModel model;
};

namespace {

thread_local std::string last_error;

cms_status fail(cms_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Maps the library's exception types onto status codes.
template <typename F>
cms_status guarded(F&& body) {
  try {
    body();
    return CMS_OK;
  } catch (const cmsched::ConfigError& e) {
    return fail(CMS_ERR_CONFIG, e.what());
  } catch (const cmsched::DomainError& e) {
    return fail(CMS_ERR_CONFIG, e.what());
  } catch (const cmsched::ScheduleError& e) {
    return fail(CMS_ERR_RUNTIME, e.what());
  } catch (const cmsched::RuntimeFailure& e) {
    return fail(CMS_ERR_RUNTIME, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(CMS_ERR_RUNTIME, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CMS_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(CMS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CMS_ERR_INTERNAL, "unknown exception");
  }
}

cms_status fill_batch(const cmsched::MiniBatchSigmas& batch, int64_t* level_index, double* sigma_lo,
                      double* sigma_hi) {
  for (std::size_t j = 0; j < batch.size(); ++j) {
    level_index[j] = batch.level_index[j];
    if (sigma_lo) sigma_lo[j] = batch.sigma_lo[j];
    if (sigma_hi) sigma_hi[j] = batch.sigma_hi[j];
  }
  return CMS_OK;
}

}  // namespace

extern "C" {

const char* cms_version(void) { return CMSCHED_VERSION; }

const char* cms_last_error(void) { return last_error.c_str(); }

cms_status cms_noise_array_create(double sigma_min, double sigma_max, double rho, int64_t s1,
                                  cms_noise_array** out) {
  if (!out) return fail(CMS_ERR_ARGUMENT, "out is NULL");
  *out = nullptr;
  return guarded([&] { *out = new cms_noise_array{cmsched::NoiseArray({sigma_min, sigma_max, rho, s1})}; });
}

void cms_noise_array_destroy(cms_noise_array* array) { delete array; }

int64_t cms_noise_array_size(const cms_noise_array* array) {
  return array ? static_cast<int64_t>(array->array.size()) : 0;
}

cms_status cms_noise_array_copy(const cms_noise_array* array, double* out, size_t capacity) {
  if (!array || !out) return fail(CMS_ERR_ARGUMENT, "array or out is NULL");
  const auto sigmas = array->array.sigmas();
  if (capacity < sigmas.size()) return fail(CMS_ERR_ARGUMENT, "output buffer too small");
  std::copy(sigmas.begin(), sigmas.end(), out);
  return CMS_OK;
}

cms_status cms_subsample_indices(int64_t s1, int64_t n_k, int64_t* out, size_t capacity) {
  if (!out) return fail(CMS_ERR_ARGUMENT, "out is NULL");
  return guarded([&] {
    const auto idx = cmsched::subsample_indices(s1, n_k);
    if (capacity < idx.size()) throw cmsched::ConfigError("output buffer too small");
    std::copy(idx.begin(), idx.end(), out);
  });
}

cms_status cms_polynomial_schedule(const cms_noise_array* array, int64_t n_k, double curve, double jitter_std,
                                   int64_t batch_size, uint64_t seed, int64_t* level_index, double* sigma_lo,
                                   double* sigma_hi) {
  if (!array || !level_index) return fail(CMS_ERR_ARGUMENT, "array or level_index is NULL");
  return guarded([&] {
    const auto levels = cmsched::subsample_levels(array->array, n_k);
    fill_batch(cmsched::polynomial_schedule(levels, {curve, jitter_std, batch_size}, seed), level_index, sigma_lo,
               sigma_hi);
  });
}

cms_status cms_lognormal_schedule(const cms_noise_array* array, int64_t n_k, double mean_log, double std_log,
                                  int64_t batch_size, uint64_t seed, int64_t* level_index, double* sigma_lo,
                                  double* sigma_hi) {
  if (!array || !level_index) return fail(CMS_ERR_ARGUMENT, "array or level_index is NULL");
  return guarded([&] {
    const auto levels = cmsched::subsample_levels(array->array, n_k);
    fill_batch(cmsched::lognormal_schedule(levels, mean_log, std_log, batch_size, seed), level_index, sigma_lo,
               sigma_hi);
  });
}

cms_status cms_curriculum_n(const char* kind, int64_t s0, int64_t s1_cap, int64_t total_steps, double rho, int64_t k,
                            int64_t* out) {
  if (!kind || !out) return fail(CMS_ERR_ARGUMENT, "kind or out is NULL");
  return guarded([&] {
    cmsched::CurriculumConfig cfg;
    cfg.kind = cmsched::curriculum_kind_from_string(kind);
    cfg.s0 = s0;
    cfg.s1_cap = s1_cap;
    cfg.total_steps = total_steps;
    cfg.rho = rho;
    *out = cmsched::curriculum_n(k, cfg);
  });
}

cms_status cms_sliced_wasserstein(const double* a, size_t a_count, const double* b, size_t b_count, int dim,
                                  int projections, uint64_t seed, double* out) {
  if (!a || !b || !out) return fail(CMS_ERR_ARGUMENT, "a, b or out is NULL");
  if (dim < 1) return fail(CMS_ERR_CONFIG, "dim must be >= 1");
  return guarded([&] {
    // Row-major point arrays are exactly column-major dim x n matrices.
    const Eigen::Map<const Eigen::MatrixXd> pa(a, dim, static_cast<Eigen::Index>(a_count));
    const Eigen::Map<const Eigen::MatrixXd> pb(b, dim, static_cast<Eigen::Index>(b_count));
    *out = cmsched::evaluate_swd(pa, pb, projections, seed);
  });
}

cms_status cms_model_load(const char* checkpoint_path, cms_model** out) {
  if (!checkpoint_path || !out) return fail(CMS_ERR_ARGUMENT, "checkpoint_path or out is NULL");
  *out = nullptr;
  return guarded([&] { *out = new cms_model{cmsched::load_checkpoint(checkpoint_path).model}; });
}

void cms_model_destroy(cms_model* model) { delete model; }

int cms_model_data_dim(const cms_model* model) { return model ? model->model.shape().data_dim : 0; }

cms_status cms_model_sample(const cms_model* model, const cms_noise_array* array, int64_t n, int steps,
                            uint64_t seed, double* out, size_t capacity) {
  if (!model || !array || (!out && n > 0)) return fail(CMS_ERR_ARGUMENT, "model, array or out is NULL");
  return guarded([&] {
    const auto dim = static_cast<size_t>(model->model.shape().data_dim);
    if (n < 0 || capacity < static_cast<size_t>(n) * dim) throw cmsched::ConfigError("output buffer too small");
    const auto points = cmsched::sample(model->model, n, steps, array->array, seed);
    std::copy(points.data(), points.data() + points.size(), out);
  });
}

cms_status cms_run_command(const cms_command_options* options) {
  if (!options || !options->subcommand || !options->config_path) {
    return fail(CMS_ERR_ARGUMENT, "options, subcommand or config_path is NULL");
  }
  return guarded([&] {
    cmsched::CommandOptions opt;
    opt.subcommand = cmsched::subcommand_from_string(options->subcommand);
    opt.config_path = options->config_path;
    if (options->output_dir) opt.output_dir = options->output_dir;
    if (options->has_seed) opt.seed = options->seed;
    for (size_t i = 0; i < options->override_count; ++i) opt.overrides.emplace_back(options->overrides[i]);
    for (size_t i = 0; i < options->compare_count; ++i) opt.compare.emplace_back(options->compare_paths[i]);
    if (options->log) {
      opt.log = [fn = options->log, user = options->log_user](const std::string& line) { fn(line.c_str(), user); };
    }
    cmsched::run_command(opt);
  });
}

}  // extern "C"
