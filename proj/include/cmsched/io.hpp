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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmsched/analysis.hpp"
#include "cmsched/config.hpp"
#include "cmsched/curriculum.hpp"
#include "cmsched/model.hpp"
#include "cmsched/schedule.hpp"
#include "cmsched/toy_ct.hpp"

namespace cmsched {

// Shortest decimal text that round-trips the double.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string sha256_hex(std::string_view bytes);

// step,k,batch_pos,level_index,sigma_lo,sigma_hi
std::string schedule_csv_header();
void append_schedule_csv(std::string& out, std::int64_t step, std::int64_t k, const MiniBatchSigmas& batch);

// k,n_k,kind
std::string curriculum_csv(const CurriculumTrace& trace);

// config_id,bucket_lo,bucket_hi,share. The below-first-edge mass is written as
// the row with bucket_lo = 0.
std::string distribution_csv_header();
void append_distribution_csv(std::string& out, std::string_view config_id, const DistributionReport& report,
                             const BucketSpec& buckets);

// step,k,n_k,loss
std::string metrics_csv(const RunMetrics& metrics);

struct MetricsTable {
  std::vector<std::int64_t> k;
  std::vector<std::int64_t> n_k;
  std::vector<double> loss;
};
MetricsTable read_metrics_csv(const std::filesystem::path& path);

// x,y
std::string points_csv(const PointSet& points);
PointSet read_points_csv(const std::filesystem::path& path);

std::string curriculum_svg(const CurriculumTrace& trace, std::string_view title);
std::string pie_svg(const DistributionReport& report, const BucketSpec& buckets, std::string_view title);

// Checkpoint: one line of JSON header, '\n', then the flattened parameters as
// little-endian fp64.
void save_checkpoint(const std::filesystem::path& path, const ToyModel& model, const Json& extra_header);
struct Checkpoint {
  ToyModel model;
  Json header;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cmsched
