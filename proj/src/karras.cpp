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

#include "cmsched/karras.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <string>

#include "cmsched/error.hpp"

namespace cmsched {

void KarrasParams::validate() const {
  if (!(std::isfinite(sigma_min) && sigma_min > 0.0)) {
    throw ConfigError("karras.sigma_min must be > 0, got " + std::to_string(sigma_min));
  }
  if (!(std::isfinite(sigma_max) && sigma_max > sigma_min)) {
    throw ConfigError("karras.sigma_max must be > sigma_min, got " + std::to_string(sigma_max));
  }
  if (!(std::isfinite(rho) && rho >= 1.0)) {
    throw ConfigError("karras.rho must be >= 1, got " + std::to_string(rho));
  }
  if (s1 < 2) {
    throw ConfigError("karras.s1 must be >= 2, got " + std::to_string(s1));
  }
}

NoiseArray::NoiseArray(const KarrasParams& params) : params_(params) {
  params_.validate();
  const auto n = static_cast<std::size_t>(params_.s1);
  const double inv_rho = 1.0 / params_.rho;
  const double lo = std::pow(params_.sigma_min, inv_rho);
  const double hi = std::pow(params_.sigma_max, inv_rho);
  sigmas_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n);
    sigmas_[i] = std::pow(lo + u * (hi - lo), params_.rho);
  }
  // The round trip through pow(., 1/rho) can be off by an ulp; pin the ends.
  sigmas_.front() = params_.sigma_min;
  sigmas_.back() = params_.sigma_max;
  for (std::size_t i = 0; i + 1 < sigmas_.size(); ++i) {
    if (!(sigmas_[i] < sigmas_[i + 1])) {
      throw ConfigError("karras grid is not strictly increasing at index " + std::to_string(i) +
                        "; s1 is too large for the sigma range");
    }
  }
}

std::int64_t NoiseArray::find(double sigma) const {
  auto it = std::lower_bound(sigmas_.begin(), sigmas_.end(), sigma);
  if (it == sigmas_.end() || *it != sigma) return -1;
  return it - sigmas_.begin();
}

std::size_t NoiseArray::nearest_log(double sigma) const {
  auto it = std::lower_bound(sigmas_.begin(), sigmas_.end(), sigma);
  if (it == sigmas_.begin()) return 0;
  if (it == sigmas_.end()) return sigmas_.size() - 1;
  const auto hi = static_cast<std::size_t>(it - sigmas_.begin());
  const double target = std::log(sigma);
  const double d_hi = std::log(sigmas_[hi]) - target;
  const double d_lo = target - std::log(sigmas_[hi - 1]);
  return d_lo <= d_hi ? hi - 1 : hi;
}

NoiseArray karras_sigmas(const KarrasParams& params) { return NoiseArray(params); }

double round_half_even(double x) {
  // nearbyint honours the current rounding mode; force nearest-even locally.
  const int mode = std::fegetround();
  if (mode == FE_TONEAREST) return std::nearbyint(x);
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(x);
  std::fesetround(mode);
  return r;
}

std::vector<std::int64_t> subsample_indices(std::int64_t s1, std::int64_t n_k) {
  if (s1 < 1) throw ConfigError("s1 must be >= 1, got " + std::to_string(s1));
  if (n_k < 1 || n_k > s1) {
    throw ConfigError("n_k must lie in [1, " + std::to_string(s1) + "], got " + std::to_string(n_k));
  }
  std::vector<std::int64_t> out(static_cast<std::size_t>(n_k) + 1);
  for (std::int64_t i = 0; i <= n_k; ++i) {
    const std::int64_t num = i * s1;
    std::int64_t q = num / n_k;
    const std::int64_t twice_rem = 2 * (num % n_k);
    if (twice_rem > n_k || (twice_rem == n_k && (q % 2) == 1)) ++q;
    out[static_cast<std::size_t>(i)] = q;
  }
  return out;
}

DiscretizationLevels subsample_levels(const NoiseArray& array, std::int64_t n_k) {
  DiscretizationLevels levels;
  levels.n_k = n_k;
  levels.indices = subsample_indices(array.s1(), n_k);
  levels.sigmas.reserve(levels.indices.size());
  for (std::int64_t idx : levels.indices) levels.sigmas.push_back(array[static_cast<std::size_t>(idx)]);
  return levels;
}

DiscretizationLevels regenerated_levels(const KarrasParams& base, std::int64_t n_k) {
  if (n_k < 1) throw ConfigError("n_k must be >= 1, got " + std::to_string(n_k));
  KarrasParams fresh = base;
  fresh.s1 = std::max<std::int64_t>(n_k, 2);
  const NoiseArray grid(fresh);
  DiscretizationLevels levels;
  levels.n_k = n_k;
  levels.indices = subsample_indices(grid.s1(), n_k);
  for (std::int64_t idx : levels.indices) levels.sigmas.push_back(grid[static_cast<std::size_t>(idx)]);
  return levels;
}

}  // namespace cmsched
