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

#include "cmsched/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "cmsched/curriculum.hpp"
#include "cmsched/error.hpp"
#include "cmsched/rng.hpp"

namespace cmsched {

void BucketSpec::validate() const {
  if (edges.size() < 2) throw ConfigError("buckets needs at least two edges");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) throw ConfigError("bucket edges must be strictly increasing");
  }
}

DistributionReport bucket_ratios(std::span<const double> sigmas, const BucketSpec& spec) {
  spec.validate();
  if (sigmas.empty()) throw ConfigError("bucket_ratios needs at least one sigma");

  std::vector<std::int64_t> counts(spec.bucket_count(), 0);
  std::int64_t below = 0;
  for (double s : sigmas) {
    if (s <= spec.edges.front()) {
      ++below;
      continue;
    }
    // First edge >= s closes the bucket that contains s.
    const auto it = std::lower_bound(spec.edges.begin(), spec.edges.end(), s);
    const auto bucket = it == spec.edges.end() ? spec.bucket_count() - 1
                                               : static_cast<std::size_t>(it - spec.edges.begin()) - 1;
    ++counts[bucket];
  }

  DistributionReport report;
  const auto total = static_cast<double>(sigmas.size());
  report.total_samples = static_cast<std::int64_t>(sigmas.size());
  report.below_min_share = static_cast<double>(below) / total;
  for (std::int64_t c : counts) report.bucket_shares.push_back(static_cast<double>(c) / total);

  std::vector<double> sorted(sigmas.begin(), sigmas.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double s : sorted) sum += s;
  report.mean_sigma = sum / total;
  const std::size_t n = sorted.size();
  report.median_sigma = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  report.distinct_sigma_count =
      static_cast<std::int64_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  return report;
}

AuditResult unique_level_audit(std::span<const MiniBatchSigmas> batches, const NoiseArray& array) {
  std::set<double> used;
  for (const auto& batch : batches) {
    used.insert(batch.sigma_lo.begin(), batch.sigma_lo.end());
    used.insert(batch.sigma_hi.begin(), batch.sigma_hi.end());
  }
  AuditResult result;
  result.distinct_count = static_cast<std::int64_t>(used.size());
  for (double s : used) {
    if (array.find(s) < 0) result.foreign.push_back(s);
  }
  return result;
}

void require_closure(const AuditResult& audit) {
  if (audit.ok()) return;
  std::ostringstream msg;
  msg << "closure audit failed: " << audit.foreign.size() << " sigma value(s) are not in the noise array:";
  const std::size_t shown = std::min<std::size_t>(audit.foreign.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), audit.foreign[i]);
    msg << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
  }
  if (shown < audit.foreign.size()) msg << " ...";
  throw RuntimeFailure(msg.str());
}

AuditResult simulate_run_audit(const CurriculumConfig& curriculum, const ScheduleConfig& schedule,
                               const NoiseArray& array, std::uint64_t seed, bool regenerate) {
  curriculum.validate(array);
  schedule.validate();
  std::set<double> used;
  std::int64_t current_n = -1;
  DiscretizationLevels levels;
  for (std::int64_t k = 0; k <= curriculum.total_steps; ++k) {
    const std::int64_t n_k = curriculum_n(k, curriculum);
    if (n_k != current_n) {
      levels = regenerate ? regenerated_levels(array.params(), n_k) : subsample_levels(array, n_k);
      current_n = n_k;
    }
    const auto batch = schedule_batch(levels, schedule, derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    used.insert(batch.sigma_lo.begin(), batch.sigma_lo.end());
    used.insert(batch.sigma_hi.begin(), batch.sigma_hi.end());
  }
  AuditResult result;
  result.distinct_count = static_cast<std::int64_t>(used.size());
  for (double s : used) {
    if (array.find(s) < 0) result.foreign.push_back(s);
  }
  return result;
}

std::vector<double> draw_schedule_sigmas(const NamedSchedule& config, const NoiseArray& array, std::int64_t samples,
                                         std::uint64_t seed) {
  config.schedule.validate();
  if (samples < 1) throw ConfigError("samples_per_config must be >= 1");
  const auto levels = subsample_levels(array, config.n_k);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (std::uint64_t b = 0; static_cast<std::int64_t>(out.size()) < samples; ++b) {
    const auto batch = schedule_batch(levels, config.schedule, derive_seed(seed, {b}));
    for (double s : batch.sigma_lo) {
      if (static_cast<std::int64_t>(out.size()) == samples) break;
      out.push_back(s);
    }
  }
  return out;
}

ScheduleComparison compare_schedules(std::span<const NamedSchedule> configs, const NoiseArray& array,
                                     std::int64_t samples_per_config, std::uint64_t seed, const BucketSpec& buckets) {
  if (configs.size() < 2) throw ConfigError("compare_schedules needs at least two configs");
  buckets.validate();
  ScheduleComparison out;
  out.buckets = buckets;
  for (const auto& cfg : configs) {
    // Every config sees the same seed so duplicated configs report identically.
    const auto sigmas = draw_schedule_sigmas(cfg, array, samples_per_config, seed);
    out.ids.push_back(cfg.id);
    out.reports.push_back(bucket_ratios(sigmas, buckets));
  }
  return out;
}

}  // namespace cmsched
