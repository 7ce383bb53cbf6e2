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

#include "cmsched/datasets.hpp"

#include <cmath>
#include <numbers>

#include "cmsched/error.hpp"

namespace cmsched {

std::string to_string(Dataset ds) {
  switch (ds) {
    case Dataset::two_moons:
      return "two_moons";
    case Dataset::gaussian_mixture_8:
      return "gaussian_mixture_8";
    case Dataset::swiss_roll_2d:
      return "swiss_roll_2d";
  }
  return "unknown";
}

Dataset dataset_from_string(const std::string& name) {
  if (name == "two_moons") return Dataset::two_moons;
  if (name == "gaussian_mixture_8") return Dataset::gaussian_mixture_8;
  if (name == "swiss_roll_2d") return Dataset::swiss_roll_2d;
  throw ConfigError("dataset must be one of two_moons, gaussian_mixture_8, swiss_roll_2d; got '" + name + "'");
}

PointSet sample_dataset(Dataset ds, std::int64_t n, Rng& rng) {
  if (n < 0) throw ConfigError("sample count must be >= 0");
  constexpr double pi = std::numbers::pi;
  PointSet out(2, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double x = 0.0;
    double y = 0.0;
    switch (ds) {
      case Dataset::gaussian_mixture_8: {
        const auto mode = static_cast<double>(rng.below(8));
        const double angle = 2.0 * pi * mode / 8.0;
        x = std::cos(angle) + 0.05 * rng.normal();
        y = std::sin(angle) + 0.05 * rng.normal();
        break;
      }
      case Dataset::two_moons: {
        const double t = pi * rng.uniform();
        if (rng.below(2) == 0) {
          x = std::cos(t);
          y = std::sin(t);
        } else {
          x = 1.0 - std::cos(t);
          y = 0.5 - std::sin(t);
        }
        x = x - 0.5 + 0.05 * rng.normal();
        y = y - 0.25 + 0.05 * rng.normal();
        break;
      }
      case Dataset::swiss_roll_2d: {
        const double t = 1.5 * pi * (1.0 + 2.0 * rng.uniform());
        x = t * std::cos(t) / 10.0 + 0.03 * rng.normal();
        y = t * std::sin(t) / 10.0 + 0.03 * rng.normal();
        break;
      }
    }
    out(0, j) = x;
    out(1, j) = y;
  }
  return out;
}

PointSet sample_dataset(Dataset ds, std::int64_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_dataset(ds, n, rng);
}

}  // namespace cmsched
