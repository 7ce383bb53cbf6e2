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

#include "cmsched/swd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "cmsched/error.hpp"
#include "cmsched/rng.hpp"

namespace cmsched {

unsigned thread_cap() {
  if (const char* env = std::getenv("CM_SCHED_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Eigen::MatrixXd swd_directions(int dim, int projections, std::uint64_t seed) {
  if (dim < 1 || projections < 1) throw ConfigError("swd needs dim >= 1 and projections >= 1");
  Rng rng(seed);
  Eigen::MatrixXd dirs(dim, projections);
  for (int p = 0; p < projections; ++p) {
    double norm = 0.0;
    do {
      for (int d = 0; d < dim; ++d) dirs(d, p) = rng.normal();
      norm = dirs.col(p).norm();
    } while (norm == 0.0);
    dirs.col(p) /= norm;
  }
  return dirs;
}

double wasserstein1_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("wasserstein1 needs non-empty inputs");
  // Walk the merged quantile breakpoints i/n and j/m on an integer grid of n*m.
  const auto n = static_cast<std::uint64_t>(a.size());
  const auto m = static_cast<std::uint64_t>(b.size());
  const double total = static_cast<double>(n) * static_cast<double>(m);
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  std::uint64_t pos = 0;
  double acc = 0.0;
  while (i < n && j < m) {
    const std::uint64_t next_a = (i + 1) * m;
    const std::uint64_t next_b = (j + 1) * n;
    const std::uint64_t next = std::min(next_a, next_b);
    acc += std::abs(a[i] - b[j]) * static_cast<double>(next - pos);
    pos = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return acc / total;
}

double evaluate_swd(const PointSet& samples, const PointSet& reference, int projections, std::uint64_t seed) {
  if (samples.cols() == 0 || reference.cols() == 0) throw ConfigError("swd needs non-empty point sets");
  if (samples.rows() != reference.rows()) {
    throw ConfigError("swd dimension mismatch: " + std::to_string(samples.rows()) + " vs " +
                      std::to_string(reference.rows()));
  }
  const Eigen::MatrixXd dirs = swd_directions(static_cast<int>(samples.rows()), projections, seed);
  std::vector<double> per_projection(static_cast<std::size_t>(projections));

  auto work = [&](int begin, int end) {
    std::vector<double> pa(static_cast<std::size_t>(samples.cols()));
    std::vector<double> pb(static_cast<std::size_t>(reference.cols()));
    for (int p = begin; p < end; ++p) {
      Eigen::Map<Eigen::RowVectorXd>(pa.data(), samples.cols()) = dirs.col(p).transpose() * samples;
      Eigen::Map<Eigen::RowVectorXd>(pb.data(), reference.cols()) = dirs.col(p).transpose() * reference;
      std::sort(pa.begin(), pa.end());
      std::sort(pb.begin(), pb.end());
      per_projection[static_cast<std::size_t>(p)] = wasserstein1_sorted(pa, pb);
    }
  };

  const int workers = static_cast<int>(std::min<unsigned>(thread_cap(), static_cast<unsigned>(projections)));
  if (workers <= 1) {
    work(0, projections);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (projections + workers - 1) / workers;
    for (int begin = 0; begin < projections; begin += chunk) {
      pool.emplace_back(work, begin, std::min(projections, begin + chunk));
    }
    for (auto& t : pool) t.join();
  }

  // Fixed-order reduction keeps the result independent of the worker count.
  double sum = 0.0;
  for (double v : per_projection) sum += v;
  return sum / static_cast<double>(projections);
}

}  // namespace cmsched
