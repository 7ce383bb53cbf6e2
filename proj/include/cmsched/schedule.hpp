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
#include <string>
#include <utility>
#include <vector>

#include "cmsched/karras.hpp"

namespace cmsched {

struct PolyScheduleParams {
  double curve = 4.0;       // polynomial exponent c
  double jitter_std = 1.0;  // std of the additive Gaussian index noise
  std::int64_t batch_size = 256;

  void validate() const;
};

// Noise assignment for one mini-batch. Sample j is trained on the adjacent
// pair (sigma_lo[j], sigma_hi[j]) = (levels[level_index[j]], levels[level_index[j] + 1]).
struct MiniBatchSigmas {
  std::vector<std::int64_t> level_index;
  std::vector<double> sigma_lo;
  std::vector<double> sigma_hi;
  std::uint64_t seed = 0;

  std::size_t size() const { return level_index.size(); }
};

// Per batch position j: r_j = (j / (d - 1))^c * (n_k - 1) + jitter_std * z_j,
// level = clamp(round_half_even(r_j), 0, n_k - 2), then the positions are
// shuffled. Requires n_k >= 2.
MiniBatchSigmas polynomial_schedule(const DiscretizationLevels& levels, const PolyScheduleParams& p,
                                    std::uint64_t seed);

// Log-normal baseline: log sigma ~ Normal(mean_log, std_log), snapped in log
// space to the nearest of levels.sigmas[0 .. n_k - 1].
MiniBatchSigmas lognormal_schedule(const DiscretizationLevels& levels, double mean_log, double std_log,
                                   std::int64_t batch_size, std::uint64_t seed);

// Reassigns floor(ratio * batch_size) distinct, uniformly chosen positions to
// a uniformly chosen level whose sigma_lo lies in sigma_range. Falls back to
// the level nearest the range midpoint when no level is in range.
MiniBatchSigmas inject_high_noise(const MiniBatchSigmas& batch, const DiscretizationLevels& levels, double ratio,
                                  std::pair<double, double> sigma_range, std::uint64_t seed);

enum class ScheduleKind { polynomial, lognormal };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

struct HighNoiseParams {
  double ratio = 0.0;
  double sigma_lo = 40.0;
  double sigma_hi = 80.0;
};

// Everything needed to turn DiscretizationLevels into a MiniBatchSigmas.
struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::polynomial;
  PolyScheduleParams poly;
  double mean_log = -1.1;
  double std_log = 2.0;
  HighNoiseParams high_noise;

  std::int64_t batch_size() const { return poly.batch_size; }
  void validate() const;
};

MiniBatchSigmas schedule_batch(const DiscretizationLevels& levels, const ScheduleConfig& cfg, std::uint64_t seed);

}  // namespace cmsched
