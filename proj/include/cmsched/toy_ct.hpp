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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmsched/curriculum.hpp"
#include "cmsched/datasets.hpp"
#include "cmsched/karras.hpp"
#include "cmsched/model.hpp"
#include "cmsched/schedule.hpp"

namespace cmsched {

enum class LossKind { squared, pseudo_huber };
enum class OptimizerKind { sgd, adam };
enum class WeightingKind { inverse_gap, uniform };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);
std::string to_string(WeightingKind kind);
std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);
WeightingKind weighting_kind_from_string(const std::string& name);

struct LossConfig {
  LossKind kind = LossKind::pseudo_huber;
  // Pseudo-Huber scale; unset means 0.00054 * sqrt(data_dim).
  std::optional<double> huber_c;
  WeightingKind weighting = WeightingKind::inverse_gap;

  double huber_scale(int data_dim) const;
};

// Pseudo-Huber distance sqrt(|d|^2 + c^2) - c, evaluated without cancellation.
double pseudo_huber(double squared_norm, double c);

struct LossResult {
  double loss = 0.0;
  Parameters grad;
};

// Optional instrumentation of one ct_loss evaluation.
struct LossTrace {
  PointSet student_input;
  PointSet teacher_input;
  PointSet student_output;
  PointSet teacher_output;
  std::vector<double> weights;
};

// Consistency-training loss for one mini-batch. The student sees
// x + sigma_hi * z, the teacher sees x + sigma_lo * z with the same z, and
// gradients flow through the student only. Passing the student itself as the
// teacher gives the EMA-free pairing.
LossResult ct_loss(const ToyModel& model, const ToyModel& teacher, const PointSet& batch, const MiniBatchSigmas& sched,
                   const PointSet& noise, const LossConfig& cfg, LossTrace* trace = nullptr);

struct EvalConfig {
  std::int64_t samples = 2000;
  int projections = 128;
  int steps = 1;
};

struct TrainConfig {
  KarrasParams karras;
  ScheduleConfig schedule;
  CurriculumConfig curriculum;  // total_steps is taken from `total_steps`
  LossConfig loss;
  ModelShape model;
  double sigma_data = 0.5;
  std::int64_t batch_size = 256;
  std::int64_t total_steps = 20000;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  Dataset dataset = Dataset::gaussian_mixture_8;
  EvalConfig eval;

  void validate() const;
  // The curriculum and schedule as the trainer uses them.
  CurriculumConfig resolved_curriculum() const;
  ScheduleConfig resolved_schedule() const;
};

struct RunMetrics {
  std::vector<double> loss;
  std::vector<std::int64_t> n_k;
  double final_swd = 0.0;
  double untrained_swd = 0.0;
  std::int64_t distinct_sigmas = 0;
  double wallclock_seconds = 0.0;
};

struct TrainResult {
  ToyModel model;
  RunMetrics metrics;
};

// Fixed learning rate, plain SGD or Adam; no EMA of the weights. Throws RuntimeFailure on a non-finite
// loss (with the step and a config echo) or when a consumed sigma is not a
// member of the run's noise array.
TrainResult train(const TrainConfig& cfg);

// One step: f(sigma_max z, sigma_max). More steps alternate denoising and
// re-noising at geometrically spaced sigmas snapped to the array.
PointSet sample(const ToyModel& model, std::int64_t n, int steps, const NoiseArray& array, std::uint64_t seed);

// The intermediate sigmas used by `sample` for the given step count.
std::vector<double> multistep_sigmas(int steps, const NoiseArray& array);

// The generated points `score_model` evaluates for the same arguments.
PointSet evaluation_samples(const ToyModel& model, const NoiseArray& array, const EvalConfig& eval, std::uint64_t seed);

// Samples from the model and scores them against a fresh reference draw.
double score_model(const ToyModel& model, const NoiseArray& array, Dataset dataset, const EvalConfig& eval,
                   std::uint64_t seed);

}  // namespace cmsched
