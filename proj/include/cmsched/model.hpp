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

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace cmsched {

// Points are stored one per column: a (dim x n) matrix.
using PointSet = Eigen::MatrixXd;

// Boundary parameterization f(x, sigma) = c_skip(sigma) x + c_out(sigma) NN(x, sigma).
struct ConsistencyParam {
  double sigma_data = 0.5;
  double sigma_min = 0.002;

  void validate() const;
  double c_skip(double sigma) const;
  double c_out(double sigma) const;
  // Input scaling applied inside the network, 1 / sqrt(sigma^2 + sigma_data^2).
  double c_in(double sigma) const;
};

struct ModelShape {
  int data_dim = 2;
  std::vector<int> hidden{128, 128, 128};
  int fourier_features = 8;  // sin/cos pairs of log(sigma)

  void validate() const;
  int input_dim() const { return data_dim + 2 * fourier_features; }
};

// Weights and biases of every dense layer. Also used as the gradient container.
struct Parameters {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t count() const;
  bool all_finite() const;
  void set_zero();
  // this += scale * other
  void axpy(double scale, const Parameters& other);
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

// Activations kept from a forward pass for the backward pass.
struct ForwardTape {
  std::vector<Eigen::MatrixXd> inputs;       // input to each layer
  std::vector<Eigen::MatrixXd> pre_act;      // pre-activation of each hidden layer
  Eigen::RowVectorXd c_skip;
  Eigen::RowVectorXd c_out;
};

// Sigma-conditioned MLP with SiLU hidden activations and a consistency
// output parameterization.
class ToyModel {
 public:
  ToyModel() = default;
  ToyModel(const ModelShape& shape, const ConsistencyParam& cp, std::uint64_t seed);

  const ModelShape& shape() const { return shape_; }
  const ConsistencyParam& consistency() const { return cp_; }
  const Parameters& params() const { return params_; }
  Parameters& params() { return params_; }

  // Raw network output NN(x, sigma), dim x n.
  Eigen::MatrixXd network(const PointSet& x, std::span<const double> sigma, ForwardTape* tape = nullptr) const;

  // Consistency output f(x, sigma). Throws on non-finite input or sigma < sigma_min.
  PointSet forward(const PointSet& x, std::span<const double> sigma, ForwardTape* tape = nullptr) const;

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(f) for the
  // forward pass recorded in `tape`.
  void backward(const ForwardTape& tape, const Eigen::MatrixXd& grad_f, Parameters& grad) const;

  Parameters zero_like() const;

 private:
  Eigen::MatrixXd embed(const PointSet& x, std::span<const double> sigma) const;

  ModelShape shape_;
  ConsistencyParam cp_;
  Parameters params_;
};

// Convenience wrapper matching the free-function form.
PointSet consistency_forward(const ToyModel& model, const PointSet& x, std::span<const double> sigma);

}  // namespace cmsched
