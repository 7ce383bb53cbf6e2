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

#include "cmsched/model.hpp"

namespace cmsched {

// `projections` random unit directions, one per column, drawn from the seed.
Eigen::MatrixXd swd_directions(int dim, int projections, std::uint64_t seed);

// Wasserstein-1 between two empirical 1D distributions of possibly different
// sizes. Inputs must be sorted ascending.
double wasserstein1_sorted(std::span<const double> a, std::span<const double> b);

// Sliced Wasserstein-1: mean over random directions of the 1D W1 of the
// projected point sets. Symmetric in its arguments and deterministic given
// the seed, independent of the thread count.
double evaluate_swd(const PointSet& samples, const PointSet& reference, int projections, std::uint64_t seed);

// Worker count for internal parallel loops: CM_SCHED_THREADS when set and
// positive, otherwise the hardware concurrency.
unsigned thread_cap();

}  // namespace cmsched
