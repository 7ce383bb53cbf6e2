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

#include "cmsched/model.hpp"
#include "cmsched/rng.hpp"

namespace cmsched {

enum class Dataset { two_moons, gaussian_mixture_8, swiss_roll_2d };

std::string to_string(Dataset ds);
Dataset dataset_from_string(const std::string& name);

// Draws n 2D points. All three sets are roughly centred with coordinates in
// [-1.5, 1.5].
PointSet sample_dataset(Dataset ds, std::int64_t n, Rng& rng);
PointSet sample_dataset(Dataset ds, std::int64_t n, std::uint64_t seed);

}  // namespace cmsched
