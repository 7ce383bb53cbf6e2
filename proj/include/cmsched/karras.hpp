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
#include <vector>

namespace cmsched {

struct KarrasParams {
  double sigma_min = 0.002;
  double sigma_max = 80.0;
  double rho = 7.0;
  std::int64_t s1 = 250;

  // Throws ConfigError naming the violated bound.
  void validate() const;
};

// The predefined Karras grid: s1 + 1 ascending sigmas, built once per run and
// shared read-only. Every schedule selects from it; nothing downstream
// recomputes a sigma value.
class NoiseArray {
 public:
  explicit NoiseArray(const KarrasParams& params);

  const KarrasParams& params() const { return params_; }
  std::span<const double> sigmas() const { return sigmas_; }
  double operator[](std::size_t i) const { return sigmas_[i]; }
  std::size_t size() const { return sigmas_.size(); }
  std::int64_t s1() const { return params_.s1; }

  // Index of the exact value, or -1 when the value is not a grid member.
  std::int64_t find(double sigma) const;

  // Index of the grid value nearest to `sigma` in log space.
  std::size_t nearest_log(double sigma) const;

 private:
  KarrasParams params_;
  std::vector<double> sigmas_;
};

NoiseArray karras_sigmas(const KarrasParams& params);

// The active discretization at one training step: N(k) + 1 levels picked from
// a parent array.
struct DiscretizationLevels {
  std::vector<std::int64_t> indices;
  std::vector<double> sigmas;
  std::int64_t n_k = 0;
};

// Round to nearest, ties to even.
double round_half_even(double x);

// indices[i] = round_half_even(i * s1 / n_k) for i in [0, n_k], evaluated in
// exact integer arithmetic.
std::vector<std::int64_t> subsample_indices(std::int64_t s1, std::int64_t n_k);

DiscretizationLevels subsample_levels(const NoiseArray& array, std::int64_t n_k);

// Baseline that regenerates a fresh Karras grid with n_k steps every time the
// discretization changes. The returned sigmas are generally not members of
// any predefined array.
DiscretizationLevels regenerated_levels(const KarrasParams& base, std::int64_t n_k);

}  // namespace cmsched
