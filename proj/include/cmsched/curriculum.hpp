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
#include <vector>

#include "cmsched/karras.hpp"

namespace cmsched {

enum class CurriculumKind { sinusoidal, doubling, constant };

std::string to_string(CurriculumKind kind);
CurriculumKind curriculum_kind_from_string(const std::string& name);

// Discretization-count curriculum k -> N(k) over k in [0, total_steps].
// `constant` holds N(k) = s0 for every k.
struct CurriculumConfig {
  CurriculumKind kind = CurriculumKind::sinusoidal;
  std::int64_t s0 = 20;
  std::int64_t s1_cap = 250;
  std::int64_t total_steps = 100000;
  double rho = 7.0;

  void validate() const;
  // Also checks s1_cap against the resolution of the array it will index.
  void validate(const NoiseArray& array) const;
};

struct CurriculumTrace {
  CurriculumKind kind = CurriculumKind::sinusoidal;
  std::vector<std::int64_t> n_of_k;  // length total_steps + 1
  std::int64_t peak_step = 0;        // first k attaining the maximum

  std::int64_t max_n() const;
};

// ceil(|(s1_cap - s0) * sin(q) + s0|) where q is x = (k/K)^(rho/4) * pi
// truncated to tenths. The plateaus keep N(k) from changing by single steps.
std::int64_t sinusoidal_n(std::int64_t k, const CurriculumConfig& cfg);

// s0 * 2^m capped at s1_cap, with [0, K] split into floor(log2(s1_cap/s0)) + 1
// equal spans; the last span absorbs the remainder.
std::int64_t doubling_n(std::int64_t k, const CurriculumConfig& cfg);

std::int64_t curriculum_n(std::int64_t k, const CurriculumConfig& cfg);

CurriculumTrace trace(const CurriculumConfig& cfg);

struct EliminatedLevels {
  std::vector<std::int64_t> indices;  // NoiseArray indices, ascending
  bool before_peak = false;           // k precedes the peak; indices is empty
};

// NoiseArray indices on the peak grid that the discretization at step k no
// longer visits.
EliminatedLevels eliminated_levels(const CurriculumTrace& trace, const NoiseArray& array, std::int64_t k);

}  // namespace cmsched
