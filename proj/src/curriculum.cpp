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

#include "cmsched/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>

#include "cmsched/error.hpp"

namespace cmsched {
namespace {

void check_step(std::int64_t k, const CurriculumConfig& cfg) {
  if (k < 0 || k > cfg.total_steps) {
    throw DomainError("curriculum step " + std::to_string(k) + " outside [0, " + std::to_string(cfg.total_steps) +
                      "]");
  }
}

// Largest m with s0 * 2^m <= s1_cap.
std::int64_t doubling_count(const CurriculumConfig& cfg) {
  std::int64_t m = 0;
  while ((cfg.s0 << (m + 1)) <= cfg.s1_cap) ++m;
  return m;
}

}  // namespace

std::string to_string(CurriculumKind kind) {
  switch (kind) {
    case CurriculumKind::sinusoidal:
      return "sinusoidal";
    case CurriculumKind::doubling:
      return "doubling";
    case CurriculumKind::constant:
      return "constant";
  }
  return "unknown";
}

CurriculumKind curriculum_kind_from_string(const std::string& name) {
  if (name == "sinusoidal") return CurriculumKind::sinusoidal;
  if (name == "doubling") return CurriculumKind::doubling;
  if (name == "constant") return CurriculumKind::constant;
  throw ConfigError("curriculum.kind must be one of sinusoidal, doubling, constant; got '" + name + "'");
}

void CurriculumConfig::validate() const {
  if (s0 < 2) throw ConfigError("curriculum.s0 must be >= 2, got " + std::to_string(s0));
  if (kind == CurriculumKind::constant ? s1_cap < s0 : s1_cap <= s0) {
    throw ConfigError("curriculum.s1_cap must exceed s0, got " + std::to_string(s1_cap));
  }
  if (total_steps < 1) throw ConfigError("curriculum.total_steps must be >= 1");
  if (!(std::isfinite(rho) && rho > 0.0)) throw ConfigError("curriculum.rho must be > 0");
}

void CurriculumConfig::validate(const NoiseArray& array) const {
  validate();
  if (s1_cap > array.s1()) {
    throw ConfigError("curriculum.s1_cap (" + std::to_string(s1_cap) + ") exceeds karras.s1 (" +
                      std::to_string(array.s1()) + ")");
  }
}

std::int64_t CurriculumTrace::max_n() const {
  return n_of_k.empty() ? 0 : *std::max_element(n_of_k.begin(), n_of_k.end());
}

std::int64_t sinusoidal_n(std::int64_t k, const CurriculumConfig& cfg) {
  check_step(k, cfg);
  const double frac = static_cast<double>(k) / static_cast<double>(cfg.total_steps);
  const double x = std::pow(frac, cfg.rho / 4.0) * std::numbers::pi;
  const double tenths = std::floor(x * 10.0);
  const double q = tenths / 10.0;
  const double span = static_cast<double>(cfg.s1_cap - cfg.s0);
  return static_cast<std::int64_t>(std::ceil(std::abs(span * std::sin(q) + static_cast<double>(cfg.s0))));
}

std::int64_t doubling_n(std::int64_t k, const CurriculumConfig& cfg) {
  check_step(k, cfg);
  if (cfg.s0 < 1 || cfg.s1_cap < cfg.s0) throw ConfigError("doubling curriculum needs s1_cap / s0 >= 1");
  const std::int64_t spans = doubling_count(cfg) + 1;
  const std::int64_t span_len = std::max<std::int64_t>(1, (cfg.total_steps + 1) / spans);
  const std::int64_t span = std::min(k / span_len, spans - 1);
  return std::min(cfg.s0 << span, cfg.s1_cap);
}

std::int64_t curriculum_n(std::int64_t k, const CurriculumConfig& cfg) {
  switch (cfg.kind) {
    case CurriculumKind::sinusoidal:
      return sinusoidal_n(k, cfg);
    case CurriculumKind::doubling:
      return doubling_n(k, cfg);
    case CurriculumKind::constant:
      check_step(k, cfg);
      return cfg.s0;
  }
  return cfg.s0;
}

CurriculumTrace trace(const CurriculumConfig& cfg) {
  cfg.validate();
  CurriculumTrace out;
  out.kind = cfg.kind;
  out.n_of_k.resize(static_cast<std::size_t>(cfg.total_steps) + 1);
  for (std::int64_t k = 0; k <= cfg.total_steps; ++k) out.n_of_k[static_cast<std::size_t>(k)] = curriculum_n(k, cfg);
  out.peak_step = std::max_element(out.n_of_k.begin(), out.n_of_k.end()) - out.n_of_k.begin();
  return out;
}

EliminatedLevels eliminated_levels(const CurriculumTrace& trace, const NoiseArray& array, std::int64_t k) {
  if (k < 0 || k >= static_cast<std::int64_t>(trace.n_of_k.size())) {
    throw DomainError("step " + std::to_string(k) + " outside the curriculum trace");
  }
  EliminatedLevels out;
  if (k < trace.peak_step) {
    out.before_peak = true;
    return out;
  }
  const auto peak = subsample_indices(array.s1(), trace.max_n());
  const auto now = subsample_indices(array.s1(), trace.n_of_k[static_cast<std::size_t>(k)]);
  std::set_difference(peak.begin(), peak.end(), now.begin(), now.end(), std::back_inserter(out.indices));
  return out;
}

}  // namespace cmsched
