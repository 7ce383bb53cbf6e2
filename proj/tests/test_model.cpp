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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cmsched/error.hpp"
#include "cmsched/karras.hpp"
#include "cmsched/model.hpp"
#include "cmsched/rng.hpp"
#include "cmsched/toy_ct.hpp"

using namespace cmsched;

namespace {

PointSet gaussian_points(int dim, int n, Rng& rng, double scale = 1.0) {
  PointSet p(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) p(i, j) = scale * rng.normal();
  }
  return p;
}

// A model whose biases are non-zero too, so every parameter is exercised.
ToyModel random_model(const ModelShape& shape, std::uint64_t seed) {
  ToyModel model(shape, ConsistencyParam{}, seed);
  Rng rng(seed ^ 0x5a5a);
  auto flat = model.params().flatten();
  for (double& v : flat) v += 0.3 * rng.normal();
  model.params().unflatten(flat);
  return model;
}

MiniBatchSigmas random_pairs(const NoiseArray& array, int n, Rng& rng) {
  MiniBatchSigmas s;
  for (int j = 0; j < n; ++j) {
    const auto i = static_cast<std::int64_t>(rng.below(array.size() - 1));
    s.level_index.push_back(i);
    s.sigma_lo.push_back(array[static_cast<std::size_t>(i)]);
    s.sigma_hi.push_back(array[static_cast<std::size_t>(i) + 1]);
  }
  return s;
}

}  // namespace

TEST_CASE("consistency coefficients") {
  const ConsistencyParam cp{0.5, 0.002};
  CHECK(cp.c_skip(0.002) == 1.0);
  CHECK(cp.c_out(0.002) == 0.0);
  // 0.25 / (0.998^2 + 0.25), 40-digit reference.
  CHECK(cp.c_skip(1.0) == doctest::Approx(0.2006414104609616020494316230124461879737).epsilon(1e-15));
  CHECK(cp.c_out(1.0) == doctest::Approx(0.5 * 0.998 / std::sqrt(1.25)).epsilon(1e-15));
  // Continuity on a fine sweep.
  const NoiseArray array(KarrasParams{0.002, 80.0, 7.0, 4000});
  for (std::size_t i = 0; i + 1 < array.size(); ++i) {
    REQUIRE(std::abs(cp.c_skip(array[i + 1]) - cp.c_skip(array[i])) < 1e-2);
    REQUIRE(std::abs(cp.c_out(array[i + 1]) - cp.c_out(array[i])) < 1e-2);
  }
}

TEST_CASE("zero network reduces to c_skip times the input") {
  ToyModel model(ModelShape{}, ConsistencyParam{}, 1);
  model.params().set_zero();
  Rng rng(2);
  const PointSet x = gaussian_points(2, 10, rng);
  const std::vector<double> sigma(10, 1.0);
  const PointSet out = consistency_forward(model, x, sigma);
  const double c_skip = 0.2006414104609616020494316230124461879737;
  CHECK((out - c_skip * x).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("boundary identity holds exactly at sigma_min") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const ToyModel model = random_model(ModelShape{2, {16, 16}, 4}, 100 + static_cast<std::uint64_t>(trial));
    const int n = 1 + static_cast<int>(rng.below(40));
    const PointSet x = gaussian_points(2, n, rng, 5.0);
    const std::vector<double> sigma(static_cast<std::size_t>(n), 0.002);
    REQUIRE(consistency_forward(model, x, sigma) == x);
  }
}

TEST_CASE("forward pass checks its inputs and is deterministic") {
  const ToyModel model(ModelShape{}, ConsistencyParam{}, 4);
  Rng rng(5);
  PointSet x = gaussian_points(2, 6, rng);
  std::vector<double> sigma(6, 3.0);
  CHECK(model.forward(x, sigma) == model.forward(x, sigma));
  CHECK_THROWS_AS(model.forward(x, std::vector<double>(5, 3.0)), ConfigError);
  std::vector<double> too_small(6, 0.001);
  CHECK_THROWS_AS(model.forward(x, too_small), ConfigError);
  x(1, 2) = NAN;
  CHECK_THROWS_AS(model.forward(x, sigma), ConfigError);
  CHECK_THROWS_AS(model.forward(PointSet::Zero(3, 6), sigma), ConfigError);
}

TEST_CASE("parameters flatten round trip") {
  ToyModel model(ModelShape{2, {8, 8}, 8}, ConsistencyParam{}, 6);
  CHECK(model.params().count() == (18 * 8 + 8) + (8 * 8 + 8) + (8 * 2 + 2));
  const auto flat = model.params().flatten();
  ToyModel other(ModelShape{2, {8, 8}, 8}, ConsistencyParam{}, 7);
  other.params().unflatten(flat);
  CHECK(other.params().flatten() == flat);
  CHECK_THROWS_AS(other.params().unflatten(std::vector<double>(3)), ConfigError);
}

TEST_CASE("pseudo-Huber distance") {
  CHECK(pseudo_huber(0.0, 0.1) == 0.0);
  CHECK(pseudo_huber(9.0, 1e-3) == doctest::Approx(std::sqrt(9.0 + 1e-6) - 1e-3).epsilon(1e-12));
  // Large-scale limit: sqrt(s + c^2) - c -> s / (2c).
  for (double s2 : {1e-4, 0.5, 3.0, 40.0}) {
    const double c = 1e6;
    CHECK(std::abs(pseudo_huber(s2, c) * 2.0 * c - s2) <= 1e-6 * s2);
  }
  LossConfig cfg;
  CHECK(cfg.huber_scale(2) == doctest::Approx(0.00054 * std::sqrt(2.0)).epsilon(1e-15));
  cfg.huber_c = 0.3;
  CHECK(cfg.huber_scale(2) == 0.3);
}

TEST_CASE("ct_loss gradients match central differences") {
  const NoiseArray array(KarrasParams{});
  const ModelShape shape{2, {8, 8}, 8};
  for (LossKind kind : {LossKind::squared, LossKind::pseudo_huber}) {
    for (WeightingKind weighting : {WeightingKind::inverse_gap, WeightingKind::uniform}) {
      LossConfig cfg;
      cfg.kind = kind;
      cfg.weighting = weighting;
      double worst = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        Rng rng(1000 + static_cast<std::uint64_t>(trial));
        const ToyModel model = random_model(shape, 50 + static_cast<std::uint64_t>(trial));
        const ToyModel teacher = model;
        const PointSet x = gaussian_points(2, 16, rng);
        const PointSet z = gaussian_points(2, 16, rng);
        const auto sched = random_pairs(array, 16, rng);
        const auto analytic = ct_loss(model, teacher, x, sched, z, cfg).grad.flatten();

        ToyModel probe = model;
        auto flat = model.params().flatten();
        const double h = 1e-5;
        for (std::size_t p = 0; p < flat.size(); ++p) {
          const double saved = flat[p];
          flat[p] = saved + h;
          probe.params().unflatten(flat);
          const double up = ct_loss(probe, teacher, x, sched, z, cfg).loss;
          flat[p] = saved - h;
          probe.params().unflatten(flat);
          const double down = ct_loss(probe, teacher, x, sched, z, cfg).loss;
          flat[p] = saved;
          const double numeric = (up - down) / (2.0 * h);
          const double scale = std::max({std::abs(numeric), std::abs(analytic[p]), 1e-6});
          worst = std::max(worst, std::abs(numeric - analytic[p]) / scale);
        }
      }
      INFO("loss " << to_string(kind) << ", weighting " << to_string(weighting));
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("ct_loss pairs the same noise at both sigmas and keeps the teacher fresh") {
  const NoiseArray array(KarrasParams{});
  Rng rng(21);
  const ToyModel model = random_model(ModelShape{2, {8, 8}, 8}, 22);
  const PointSet x = gaussian_points(2, 32, rng);
  const PointSet z = gaussian_points(2, 32, rng);
  const auto sched = random_pairs(array, 32, rng);
  LossTrace trace;
  ct_loss(model, model, x, sched, z, LossConfig{}, &trace);
  for (int j = 0; j < 32; ++j) {
    const auto js = static_cast<std::size_t>(j);
    for (int i = 0; i < 2; ++i) {
      REQUIRE(trace.student_input(i, j) == x(i, j) + z(i, j) * sched.sigma_hi[js]);
      REQUIRE(trace.teacher_input(i, j) == x(i, j) + z(i, j) * sched.sigma_lo[js]);
    }
    REQUIRE(trace.weights[js] == 1.0 / (sched.sigma_hi[js] - sched.sigma_lo[js]));
  }
  // The teacher is a gradient-severed copy of the current student.
  CHECK(trace.teacher_output == model.forward(trace.teacher_input, sched.sigma_lo));
  CHECK(trace.student_output == model.forward(trace.student_input, sched.sigma_hi));
}

TEST_CASE("ct_loss with z = 0 and sigma_lo = sigma_min is a weighted reconstruction error") {
  const NoiseArray array(KarrasParams{});
  Rng rng(31);
  const ToyModel model = random_model(ModelShape{2, {8, 8}, 8}, 32);
  const PointSet x = gaussian_points(2, 8, rng);
  const PointSet z = PointSet::Zero(2, 8);
  MiniBatchSigmas sched;
  for (int j = 0; j < 8; ++j) {
    sched.level_index.push_back(0);
    sched.sigma_lo.push_back(array[0]);
    sched.sigma_hi.push_back(array[1]);
  }
  LossConfig cfg;
  cfg.kind = LossKind::squared;
  const auto result = ct_loss(model, model, x, sched, z, cfg);
  const PointSet out = model.forward(x, sched.sigma_hi);
  const double expected = (out - x).colwise().squaredNorm().sum() / 8.0 / (array[1] - array[0]);
  CHECK(result.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ct_loss rejects a degenerate pair") {
  const ToyModel model(ModelShape{2, {8}, 2}, ConsistencyParam{}, 1);
  MiniBatchSigmas sched;
  sched.level_index = {0, 0};
  sched.sigma_lo = {1.0, 1.0};
  sched.sigma_hi = {2.0, 1.0};
  const PointSet x = PointSet::Zero(2, 2);
  CHECK_THROWS_AS(ct_loss(model, model, x, sched, x, LossConfig{}), ScheduleError);
}
