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
#include <span>
#include <string>
#include <vector>

#include "cmsched/curriculum.hpp"
#include "cmsched/karras.hpp"
#include "cmsched/schedule.hpp"

namespace cmsched {

struct BucketSpec {
  std::vector<double> edges{10.0, 20.0, 40.0, 60.0, 80.0};

  void validate() const;
  std::size_t bucket_count() const { return edges.size() - 1; }
};

// Bucket i covers (edges[i], edges[i+1]]: a sigma on an edge belongs to the
// lower bucket. Values at or below edges[0] go to below_min_share; values above
// the last edge are folded into the last bucket so the shares stay a partition.
struct DistributionReport {
  std::vector<double> bucket_shares;
  double below_min_share = 0.0;
  std::int64_t total_samples = 0;
  std::int64_t distinct_sigma_count = 0;
  double mean_sigma = 0.0;
  double median_sigma = 0.0;
};

DistributionReport bucket_ratios(std::span<const double> sigmas, const BucketSpec& spec = {});

struct AuditResult {
  std::int64_t distinct_count = 0;
  std::vector<double> foreign;  // sigmas that are not members of the array

  bool ok() const { return foreign.empty(); }
};

// Distinct sigma values (both halves of each pair) used across `batches`, and
// any value that is not bitwise a member of `array`.
AuditResult unique_level_audit(std::span<const MiniBatchSigmas> batches, const NoiseArray& array);

// Throws RuntimeFailure listing the offending values when the audit failed.
void require_closure(const AuditResult& audit);

// Schedules one batch per curriculum step over the whole trace and audits the
// sigmas used. With `regenerate`, every step draws from a freshly generated
// Karras grid with N(k) steps instead of subsampling `array`.
AuditResult simulate_run_audit(const CurriculumConfig& curriculum, const ScheduleConfig& schedule,
                               const NoiseArray& array, std::uint64_t seed, bool regenerate);

struct NamedSchedule {
  std::string id;
  ScheduleConfig schedule;
  std::int64_t n_k = 250;
};

struct ScheduleComparison {
  std::vector<std::string> ids;
  std::vector<DistributionReport> reports;
  BucketSpec buckets;
};

// Draws `samples_per_config` sigma_lo values per config (in batches of the
// config's batch size) from one shared array and reports each distribution.
ScheduleComparison compare_schedules(std::span<const NamedSchedule> configs, const NoiseArray& array,
                                     std::int64_t samples_per_config, std::uint64_t seed,
                                     const BucketSpec& buckets = {});

// Every sigma_lo the config assigns over `samples` draws.
std::vector<double> draw_schedule_sigmas(const NamedSchedule& config, const NoiseArray& array, std::int64_t samples,
                                         std::uint64_t seed);

}  // namespace cmsched
