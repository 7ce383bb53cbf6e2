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

#include "cmsched/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "cmsched/error.hpp"
#include "cmsched/rng.hpp"

namespace cmsched {
namespace {

void require_pairs(const DiscretizationLevels& levels) {
  if (levels.n_k < 2 || levels.sigmas.size() != static_cast<std::size_t>(levels.n_k) + 1) {
    throw ScheduleError("schedule needs n_k >= 2 levels to form a (sigma_i, sigma_i+1) pair, got n_k = " +
                        std::to_string(levels.n_k));
  }
}

void fill_pairs(MiniBatchSigmas& batch, const DiscretizationLevels& levels) {
  batch.sigma_lo.resize(batch.level_index.size());
  batch.sigma_hi.resize(batch.level_index.size());
  for (std::size_t j = 0; j < batch.level_index.size(); ++j) {
    const auto i = static_cast<std::size_t>(batch.level_index[j]);
    batch.sigma_lo[j] = levels.sigmas[i];
    batch.sigma_hi[j] = levels.sigmas[i + 1];
  }
}

// Nearest of sigmas[0 .. count) to exp(log_sigma), measured in log space.
std::int64_t nearest_level_log(std::span<const double> sigmas, std::size_t count, double log_sigma) {
  const auto first = sigmas.begin();
  const auto last = sigmas.begin() + static_cast<std::ptrdiff_t>(count);
  const auto it = std::lower_bound(first, last, std::exp(log_sigma));
  if (it == first) return 0;
  if (it == last) return static_cast<std::int64_t>(count) - 1;
  const auto hi = it - first;
  const double d_hi = std::log(*it) - log_sigma;
  const double d_lo = log_sigma - std::log(*(it - 1));
  return d_lo <= d_hi ? hi - 1 : hi;
}

}  // namespace

void PolyScheduleParams::validate() const {
  if (!(std::isfinite(curve) && curve > 0.0)) throw ConfigError("schedule.curve must be > 0");
  if (!(std::isfinite(jitter_std) && jitter_std >= 0.0)) throw ConfigError("schedule.jitter_std must be >= 0");
  if (batch_size < 1) throw ConfigError("schedule.batch_size must be >= 1");
}

MiniBatchSigmas polynomial_schedule(const DiscretizationLevels& levels, const PolyScheduleParams& p,
                                    std::uint64_t seed) {
  p.validate();
  require_pairs(levels);
  Rng rng(seed);
  const auto d = static_cast<std::size_t>(p.batch_size);
  const double top = static_cast<double>(levels.n_k - 1);
  const double max_level = static_cast<double>(levels.n_k - 2);

  MiniBatchSigmas batch;
  batch.seed = seed;
  batch.level_index.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double t = d > 1 ? static_cast<double>(j) / static_cast<double>(d - 1) : 0.0;
    double raw = std::pow(t, p.curve) * top;
    if (p.jitter_std > 0.0) raw += p.jitter_std * rng.normal();
    const double level = std::clamp(round_half_even(raw), 0.0, max_level);
    batch.level_index[j] = static_cast<std::int64_t>(level);
  }
  rng.shuffle(std::span<std::int64_t>(batch.level_index));
  fill_pairs(batch, levels);
  return batch;
}

MiniBatchSigmas lognormal_schedule(const DiscretizationLevels& levels, double mean_log, double std_log,
                                   std::int64_t batch_size, std::uint64_t seed) {
  if (!(std::isfinite(std_log) && std_log > 0.0)) throw ConfigError("schedule.std_log must be > 0");
  if (!std::isfinite(mean_log)) throw ConfigError("schedule.mean_log must be finite");
  if (batch_size < 1) throw ConfigError("schedule.batch_size must be >= 1");
  require_pairs(levels);
  Rng rng(seed);
  const auto count = static_cast<std::size_t>(levels.n_k);  // excludes the last level
  MiniBatchSigmas batch;
  batch.seed = seed;
  batch.level_index.resize(static_cast<std::size_t>(batch_size));
  for (auto& level : batch.level_index) {
    level = nearest_level_log(levels.sigmas, count, rng.normal(mean_log, std_log));
  }
  fill_pairs(batch, levels);
  return batch;
}

MiniBatchSigmas inject_high_noise(const MiniBatchSigmas& batch, const DiscretizationLevels& levels, double ratio,
                                  std::pair<double, double> sigma_range, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("high_noise.ratio must lie in [0, 1]");
  if (batch.size() == 0) return batch;
  require_pairs(levels);
  const auto [lo, hi] = sigma_range;
  if (!(lo <= hi && lo >= levels.sigmas.front() && hi <= levels.sigmas.back())) {
    throw ConfigError("high_noise sigma range must be ordered and lie within [sigma_min, sigma_max]");
  }

  std::vector<std::int64_t> candidates;
  for (std::int64_t i = 0; i <= levels.n_k - 2; ++i) {
    const double s = levels.sigmas[static_cast<std::size_t>(i)];
    if (s >= lo && s <= hi) candidates.push_back(i);
  }
  if (candidates.empty()) {
    const double mid = 0.5 * (lo + hi);
    std::int64_t best = 0;
    for (std::int64_t i = 1; i <= levels.n_k - 2; ++i) {
      if (std::abs(levels.sigmas[static_cast<std::size_t>(i)] - mid) <
          std::abs(levels.sigmas[static_cast<std::size_t>(best)] - mid)) {
        best = i;
      }
    }
    candidates.push_back(best);
  }

  const auto count = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(batch.size())));
  MiniBatchSigmas out = batch;
  Rng rng(seed);
  std::vector<std::size_t> positions(batch.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(positions.size() - i));
    std::swap(positions[i], positions[j]);
    out.level_index[positions[i]] = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
  }
  fill_pairs(out, levels);
  return out;
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::polynomial ? "polynomial" : "lognormal";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "polynomial") return ScheduleKind::polynomial;
  if (name == "lognormal" || name == "log_normal" || name == "log-normal") return ScheduleKind::lognormal;
  throw ConfigError("schedule.kind must be 'polynomial' or 'lognormal', got '" + name + "'");
}

void ScheduleConfig::validate() const {
  poly.validate();
  if (kind == ScheduleKind::lognormal && !(std::isfinite(std_log) && std_log > 0.0)) {
    throw ConfigError("schedule.std_log must be > 0");
  }
  if (!(high_noise.ratio >= 0.0 && high_noise.ratio <= 1.0)) {
    throw ConfigError("high_noise.ratio must lie in [0, 1]");
  }
  if (!(high_noise.sigma_lo <= high_noise.sigma_hi)) {
    throw ConfigError("high_noise.sigma_lo must be <= high_noise.sigma_hi");
  }
}

MiniBatchSigmas schedule_batch(const DiscretizationLevels& levels, const ScheduleConfig& cfg, std::uint64_t seed) {
  MiniBatchSigmas batch =
      cfg.kind == ScheduleKind::polynomial
          ? polynomial_schedule(levels, cfg.poly, derive_seed(seed, {1}))
          : lognormal_schedule(levels, cfg.mean_log, cfg.std_log, cfg.poly.batch_size, derive_seed(seed, {2}));
  if (cfg.high_noise.ratio > 0.0) {
    batch = inject_high_noise(batch, levels, cfg.high_noise.ratio, {cfg.high_noise.sigma_lo, cfg.high_noise.sigma_hi},
                              derive_seed(seed, {3}));
  }
  batch.seed = seed;
  return batch;
}

}  // namespace cmsched
