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

#include "cmsched/toy_ct.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cmsched/analysis.hpp"
#include "cmsched/error.hpp"
#include "cmsched/rng.hpp"
#include "cmsched/swd.hpp"

namespace cmsched {
namespace {

// Stream tags for derive_seed.
enum : std::uint64_t {
  kInitStream = 100,
  kScheduleStream = 101,
  kDataStream = 102,
  kNoiseStream = 103,
  kEvalSampleStream = 200,
  kEvalReferenceStream = 201,
  kEvalProjectionStream = 202,
};

PointSet gaussian(int dim, std::int64_t n, Rng& rng) {
  PointSet z(dim, n);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  return z;
}

std::string echo(const TrainConfig& cfg) {
  std::ostringstream os;
  os << "schedule=" << to_string(cfg.schedule.kind) << " curriculum=" << to_string(cfg.curriculum.kind)
     << " loss=" << to_string(cfg.loss.kind) << " batch_size=" << cfg.batch_size << " total_steps=" << cfg.total_steps
     << " optimizer=" << to_string(cfg.optimizer) << " learning_rate=" << cfg.learning_rate << " seed=" << cfg.seed << " dataset=" << to_string(cfg.dataset);
  return os.str();
}

template <typename Tensor>
void adam_update(Tensor& param, Tensor& m, Tensor& v, const Tensor& grad, const TrainConfig& cfg, double step_size) {
  m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
  v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
  param.array() -= step_size * m.array() / (v.array().sqrt() + cfg.adam_eps);
}

}  // namespace

std::string to_string(LossKind kind) { return kind == LossKind::squared ? "squared" : "pseudo_huber"; }

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "squared") return LossKind::squared;
  if (name == "pseudo_huber" || name == "pseudo-huber") return LossKind::pseudo_huber;
  throw ConfigError("loss.kind must be 'squared' or 'pseudo_huber', got '" + name + "'");
}

std::string to_string(WeightingKind kind) { return kind == WeightingKind::uniform ? "uniform" : "inverse_gap"; }

WeightingKind weighting_kind_from_string(const std::string& name) {
  if (name == "inverse_gap") return WeightingKind::inverse_gap;
  if (name == "uniform") return WeightingKind::uniform;
  throw ConfigError("loss.weighting must be 'inverse_gap' or 'uniform', got '" + name + "'");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw ConfigError("optimizer must be 'sgd' or 'adam', got '" + name + "'");
}

double LossConfig::huber_scale(int data_dim) const {
  return huber_c.value_or(0.00054 * std::sqrt(static_cast<double>(data_dim)));
}

double pseudo_huber(double squared_norm, double c) {
  return squared_norm / (std::sqrt(squared_norm + c * c) + c);
}

LossResult ct_loss(const ToyModel& model, const ToyModel& teacher, const PointSet& batch, const MiniBatchSigmas& sched,
                   const PointSet& noise, const LossConfig& cfg, LossTrace* trace) {
  const Eigen::Index n = batch.cols();
  if (static_cast<Eigen::Index>(sched.size()) != n || noise.cols() != n || noise.rows() != batch.rows()) {
    throw ConfigError("ct_loss: batch, schedule and noise sizes differ");
  }
  if (n == 0) throw ConfigError("ct_loss needs a non-empty batch");
  for (std::size_t j = 0; j < sched.size(); ++j) {
    if (!(sched.sigma_hi[j] > sched.sigma_lo[j])) {
      throw ScheduleError("ct_loss: sigma_hi must exceed sigma_lo (sample " + std::to_string(j) + ")");
    }
  }

  const Eigen::RowVectorXd hi = Eigen::Map<const Eigen::RowVectorXd>(sched.sigma_hi.data(), n);
  const Eigen::RowVectorXd lo = Eigen::Map<const Eigen::RowVectorXd>(sched.sigma_lo.data(), n);
  const PointSet student_in = batch + (noise.array().rowwise() * hi.array()).matrix();
  const PointSet teacher_in = batch + (noise.array().rowwise() * lo.array()).matrix();

  ForwardTape tape;
  const PointSet student_out = model.forward(student_in, sched.sigma_hi, &tape);
  // Stop-gradient: the teacher pass records nothing and is never differentiated.
  const PointSet teacher_out = teacher.forward(teacher_in, sched.sigma_lo);

  const Eigen::MatrixXd diff = student_out - teacher_out;
  const double c = cfg.huber_scale(model.shape().data_dim);
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd grad_f(diff.rows(), n);
  std::vector<double> weights(static_cast<std::size_t>(n));
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const double w = cfg.weighting == WeightingKind::inverse_gap ? 1.0 / (sched.sigma_hi[js] - sched.sigma_lo[js]) : 1.0;
    weights[js] = w;
    const double s2 = diff.col(j).squaredNorm();
    if (cfg.kind == LossKind::squared) {
      loss += w * s2;
      grad_f.col(j) = (2.0 * w * inv_n) * diff.col(j);
    } else {
      loss += w * pseudo_huber(s2, c);
      grad_f.col(j) = (w * inv_n / std::sqrt(s2 + c * c)) * diff.col(j);
    }
  }

  LossResult result;
  result.loss = loss * inv_n;
  result.grad = model.zero_like();
  model.backward(tape, grad_f, result.grad);

  if (trace) {
    trace->student_input = student_in;
    trace->teacher_input = teacher_in;
    trace->student_output = student_out;
    trace->teacher_output = teacher_out;
    trace->weights = std::move(weights);
  }
  return result;
}

void TrainConfig::validate() const {
  karras.validate();
  schedule.validate();
  model.validate();
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2, got " + std::to_string(batch_size));
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (!(std::isfinite(learning_rate) && learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_eps > 0.0)) {
    throw ConfigError("adam betas must lie in [0, 1) and adam_eps must be > 0");
  }
  if (!(std::isfinite(sigma_data) && sigma_data > 0.0)) throw ConfigError("model.sigma_data must be > 0");
  if (loss.huber_c && !(*loss.huber_c > 0.0)) throw ConfigError("loss.huber_c must be > 0");
  if (eval.samples < 1) throw ConfigError("eval.samples must be >= 1");
  if (eval.projections < 1) throw ConfigError("eval.projections must be >= 1");
  if (eval.steps < 1 || eval.steps > 4) throw ConfigError("eval.steps must lie in [1, 4]");
  if (model.data_dim != 2) throw ConfigError("model.data_dim must be 2 for the toy datasets");
  if (total_steps >= 1) resolved_curriculum().validate(NoiseArray(karras));
}

CurriculumConfig TrainConfig::resolved_curriculum() const {
  CurriculumConfig c = curriculum;
  c.total_steps = total_steps;
  return c;
}

ScheduleConfig TrainConfig::resolved_schedule() const {
  ScheduleConfig s = schedule;
  s.poly.batch_size = batch_size;
  return s;
}

std::vector<double> multistep_sigmas(int steps, const NoiseArray& array) {
  if (steps < 1 || steps > 4) throw ConfigError("sampling steps must lie in [1, 4], got " + std::to_string(steps));
  const double log_max = std::log(array.params().sigma_max);
  const double log_min = std::log(array.params().sigma_min);
  std::vector<double> out{array.sigmas().back()};
  for (int m = 1; m < steps; ++m) {
    const double t = static_cast<double>(m) / static_cast<double>(steps);
    out.push_back(array[array.nearest_log(std::exp(log_max + t * (log_min - log_max)))]);
  }
  return out;
}

PointSet sample(const ToyModel& model, std::int64_t n, int steps, const NoiseArray& array, std::uint64_t seed) {
  const auto sigmas = multistep_sigmas(steps, array);
  const int dim = model.shape().data_dim;
  if (n < 0) throw ConfigError("sample count must be >= 0");
  if (n == 0) return PointSet(dim, 0);
  Rng rng(seed);
  const double sigma_min = model.consistency().sigma_min;

  PointSet x = sigmas.front() * gaussian(dim, n, rng);
  std::vector<double> level(static_cast<std::size_t>(n), sigmas.front());
  PointSet x0 = model.forward(x, level);
  for (std::size_t m = 1; m < sigmas.size(); ++m) {
    const double tau = sigmas[m];
    const double scale = std::sqrt(std::max(tau * tau - sigma_min * sigma_min, 0.0));
    x = x0 + scale * gaussian(dim, n, rng);
    std::fill(level.begin(), level.end(), tau);
    x0 = model.forward(x, level);
  }
  if (!x0.allFinite()) throw RuntimeFailure("sampler produced non-finite points");
  return x0;
}

PointSet evaluation_samples(const ToyModel& model, const NoiseArray& array, const EvalConfig& eval, std::uint64_t seed) {
  return sample(model, eval.samples, eval.steps, array, derive_seed(seed, {kEvalSampleStream}));
}

double score_model(const ToyModel& model, const NoiseArray& array, Dataset dataset, const EvalConfig& eval,
                   std::uint64_t seed) {
  const PointSet generated = evaluation_samples(model, array, eval, seed);
  const PointSet reference = sample_dataset(dataset, eval.samples, derive_seed(seed, {kEvalReferenceStream}));
  return evaluate_swd(generated, reference, eval.projections, derive_seed(seed, {kEvalProjectionStream}));
}

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const NoiseArray array(cfg.karras);
  ConsistencyParam cp;
  cp.sigma_data = cfg.sigma_data;
  cp.sigma_min = cfg.karras.sigma_min;

  TrainResult result{ToyModel(cfg.model, cp, derive_seed(cfg.seed, {kInitStream})), {}};
  ToyModel& model = result.model;
  RunMetrics& metrics = result.metrics;
  metrics.untrained_swd = score_model(model, array, cfg.dataset, cfg.eval, cfg.seed);

  const CurriculumConfig curriculum = cfg.resolved_curriculum();
  const ScheduleConfig schedule = cfg.resolved_schedule();
  std::map<std::int64_t, DiscretizationLevels> level_cache;
  Parameters first_moment = model.zero_like();
  Parameters second_moment = model.zero_like();
  double beta1_power = 1.0;
  double beta2_power = 1.0;
  std::set<double> used;
  metrics.loss.reserve(static_cast<std::size_t>(cfg.total_steps));
  metrics.n_k.reserve(static_cast<std::size_t>(cfg.total_steps));

  for (std::int64_t k = 0; k < cfg.total_steps; ++k) {
    const auto uk = static_cast<std::uint64_t>(k);
    const std::int64_t n_k = curriculum_n(k, curriculum);
    auto it = level_cache.find(n_k);
    if (it == level_cache.end()) it = level_cache.emplace(n_k, subsample_levels(array, n_k)).first;
    const MiniBatchSigmas sched = schedule_batch(it->second, schedule, derive_seed(cfg.seed, {kScheduleStream, uk}));
    used.insert(sched.sigma_lo.begin(), sched.sigma_lo.end());
    used.insert(sched.sigma_hi.begin(), sched.sigma_hi.end());

    Rng data_rng(derive_seed(cfg.seed, {kDataStream, uk}));
    const PointSet batch = sample_dataset(cfg.dataset, cfg.batch_size, data_rng);
    Rng noise_rng(derive_seed(cfg.seed, {kNoiseStream, uk}));
    const PointSet noise = gaussian(cfg.model.data_dim, cfg.batch_size, noise_rng);

    // EMA-free: the teacher is the current student, read without gradient.
    LossResult step = ct_loss(model, model, batch, sched, noise, cfg.loss);
    if (!std::isfinite(step.loss) || !step.grad.all_finite()) {
      throw RuntimeFailure("non-finite loss at step " + std::to_string(k) + " (" + echo(cfg) + ")");
    }
    if (cfg.optimizer == OptimizerKind::sgd) {
      model.params().axpy(-cfg.learning_rate, step.grad);
    } else {
      beta1_power *= cfg.adam_beta1;
      beta2_power *= cfg.adam_beta2;
      const double step_size = cfg.learning_rate * std::sqrt(1.0 - beta2_power) / (1.0 - beta1_power);
      Parameters& params = model.params();
      for (std::size_t l = 0; l < params.weights.size(); ++l) {
        adam_update(params.weights[l], first_moment.weights[l], second_moment.weights[l], step.grad.weights[l], cfg,
                    step_size);
        adam_update(params.biases[l], first_moment.biases[l], second_moment.biases[l], step.grad.biases[l], cfg,
                    step_size);
      }
    }
    if (!model.params().all_finite()) {
      throw RuntimeFailure("non-finite parameters after step " + std::to_string(k) + " (" + echo(cfg) + ")");
    }
    metrics.loss.push_back(step.loss);
    metrics.n_k.push_back(n_k);
  }

  AuditResult audit;
  audit.distinct_count = static_cast<std::int64_t>(used.size());
  for (double s : used) {
    if (array.find(s) < 0) audit.foreign.push_back(s);
  }
  require_closure(audit);
  metrics.distinct_sigmas = audit.distinct_count;
  metrics.final_swd = score_model(model, array, cfg.dataset, cfg.eval, cfg.seed);
  metrics.wallclock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace cmsched
