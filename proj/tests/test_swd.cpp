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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "cmsched/datasets.hpp"
#include "cmsched/error.hpp"
#include "cmsched/rng.hpp"
#include "cmsched/swd.hpp"

using namespace cmsched;

namespace {

// W1 of two empirical measures as the integral of |F_a - F_b|.
double w1_by_cdf(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> xs(a);
  xs.insert(xs.end(), b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < xs.size(); ++t) {
    const double x = xs[t];
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / a.size();
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / b.size();
    total += std::abs(fa - fb) * (xs[t + 1] - x);
  }
  return total;
}

}  // namespace

TEST_CASE("swd of identical sets is zero and point masses give their distance") {
  const PointSet a = sample_dataset(Dataset::two_moons, 300, 1);
  CHECK(evaluate_swd(a, a, 64, 0) == 0.0);
  PointSet p0(1, 1);
  PointSet p1(1, 1);
  p0(0, 0) = 0.0;
  p1(0, 0) = 1.0;
  for (int projections : {1, 7, 128}) CHECK(evaluate_swd(p0, p1, projections, 3) == 1.0);
}

TEST_CASE("swd matches a sort-based brute force on offset Gaussians") {
  Rng rng(4);
  const int n = 10000;
  PointSet a(2, n);
  PointSet b(2, n);
  for (int j = 0; j < n; ++j) {
    a(0, j) = rng.normal();
    a(1, j) = rng.normal();
    b(0, j) = 2.0 + rng.normal();
    b(1, j) = rng.normal();
  }
  const Eigen::MatrixXd dirs = swd_directions(2, 128, 99);
  double brute = 0.0;
  for (int p = 0; p < 128; ++p) {
    std::vector<double> pa(n);
    std::vector<double> pb(n);
    for (int j = 0; j < n; ++j) {
      pa[static_cast<std::size_t>(j)] = dirs(0, p) * a(0, j) + dirs(1, p) * a(1, j);
      pb[static_cast<std::size_t>(j)] = dirs(0, p) * b(0, j) + dirs(1, p) * b(1, j);
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    double w = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) w += std::abs(pa[i] - pb[i]);
    brute += w / n;
  }
  brute /= 128.0;
  CHECK(std::abs(evaluate_swd(a, b, 128, 99) - brute) <= 1e-6);
  CHECK(evaluate_swd(a, b, 128, 99) == evaluate_swd(b, a, 128, 99));
}

TEST_CASE("1D W1 with unequal sizes matches the CDF integral") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(1 + rng.below(40));
    std::vector<double> b(1 + rng.below(40));
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = 0.5 + 2.0 * rng.normal();
    const double expected = w1_by_cdf(a, b);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(wasserstein1_sorted(a, b) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("swd directions are unit vectors and reproducible") {
  const auto d1 = swd_directions(3, 50, 7);
  const auto d2 = swd_directions(3, 50, 7);
  CHECK(d1 == d2);
  for (int p = 0; p < 50; ++p) CHECK(d1.col(p).norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("swd does not depend on the worker count") {
  const PointSet a = sample_dataset(Dataset::swiss_roll_2d, 2000, 1);
  const PointSet b = sample_dataset(Dataset::gaussian_mixture_8, 1500, 2);
  setenv("CM_SCHED_THREADS", "1", 1);
  const double one = evaluate_swd(a, b, 96, 3);
  setenv("CM_SCHED_THREADS", "5", 1);
  const double five = evaluate_swd(a, b, 96, 3);
  unsetenv("CM_SCHED_THREADS");
  CHECK(one == five);
}

TEST_CASE("swd input checks") {
  CHECK_THROWS_AS(evaluate_swd(PointSet(2, 3), PointSet(3, 3), 4, 0), ConfigError);
  CHECK_THROWS_AS(evaluate_swd(PointSet(2, 0), PointSet(2, 3), 4, 0), ConfigError);
  CHECK_THROWS_AS(evaluate_swd(PointSet::Zero(2, 3), PointSet::Zero(2, 3), 0, 0), ConfigError);
}

TEST_CASE("toy datasets are seeded and bounded") {
  for (Dataset ds : {Dataset::two_moons, Dataset::gaussian_mixture_8, Dataset::swiss_roll_2d}) {
    const PointSet a = sample_dataset(ds, 500, 11);
    CHECK(a == sample_dataset(ds, 500, 11));
    CHECK(a != sample_dataset(ds, 500, 12));
    CHECK(a.rows() == 2);
    CHECK(a.cwiseAbs().maxCoeff() < 2.0);
    CHECK(dataset_from_string(to_string(ds)) == ds);
  }
  CHECK(sample_dataset(Dataset::two_moons, 0, 1).cols() == 0);
  CHECK_THROWS_AS(dataset_from_string("mnist"), ConfigError);
}
