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

#include "cmsched/model.hpp"

#include <cmath>
#include <numbers>

#include "cmsched/error.hpp"
#include "cmsched/rng.hpp"

namespace cmsched {
namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

}  // namespace

void ConsistencyParam::validate() const {
  if (!(std::isfinite(sigma_data) && sigma_data > 0.0)) throw ConfigError("model.sigma_data must be > 0");
  if (!(std::isfinite(sigma_min) && sigma_min > 0.0)) throw ConfigError("sigma_min must be > 0");
}

double ConsistencyParam::c_skip(double sigma) const {
  const double d = sigma - sigma_min;
  const double sd2 = sigma_data * sigma_data;
  return sd2 / (d * d + sd2);
}

double ConsistencyParam::c_out(double sigma) const {
  return sigma_data * (sigma - sigma_min) / std::sqrt(sigma * sigma + sigma_data * sigma_data);
}

double ConsistencyParam::c_in(double sigma) const {
  return 1.0 / std::sqrt(sigma * sigma + sigma_data * sigma_data);
}

void ModelShape::validate() const {
  if (data_dim < 1) throw ConfigError("model.data_dim must be >= 1");
  if (hidden.empty()) throw ConfigError("model.hidden must list at least one layer width");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("model.hidden widths must be >= 1");
  }
  if (fourier_features < 0) throw ConfigError("model.fourier_features must be >= 0");
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
  return n;
}

bool Parameters::all_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

void Parameters::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

void Parameters::axpy(double scale, const Parameters& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += scale * other.weights[l];
    biases[l] += scale * other.biases[l];
  }
}

// Layer by layer: weights in column-major order, then the bias.
std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].data(), weights[l].data() + weights[l].size());
    flat.insert(flat.end(), biases[l].data(), biases[l].data() + biases[l].size());
  }
  return flat;
}

void Parameters::unflatten(std::span<const double> flat) {
  if (flat.size() != count()) throw ConfigError("parameter vector has the wrong length");
  std::size_t at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), weights[l].size(), weights[l].data());
    at += static_cast<std::size_t>(weights[l].size());
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), biases[l].size(), biases[l].data());
    at += static_cast<std::size_t>(biases[l].size());
  }
}

ToyModel::ToyModel(const ModelShape& shape, const ConsistencyParam& cp, std::uint64_t seed)
    : shape_(shape), cp_(cp) {
  shape_.validate();
  cp_.validate();
  Rng rng(seed);
  int fan_in = shape_.input_dim();
  std::vector<int> widths = shape_.hidden;
  widths.push_back(shape_.data_dim);
  for (int width : widths) {
    Eigen::MatrixXd w(width, fan_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = scale * rng.normal();
    params_.weights.push_back(std::move(w));
    params_.biases.push_back(Eigen::VectorXd::Zero(width));
    fan_in = width;
  }
}

Parameters ToyModel::zero_like() const {
  Parameters p = params_;
  p.set_zero();
  return p;
}

Eigen::MatrixXd ToyModel::embed(const PointSet& x, std::span<const double> sigma) const {
  const int f = shape_.fourier_features;
  Eigen::MatrixXd in(shape_.input_dim(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double s = sigma[static_cast<std::size_t>(j)];
    in.block(0, j, shape_.data_dim, 1) = cp_.c_in(s) * x.col(j);
    const double c_noise = 0.25 * std::log(s);
    for (int m = 0; m < f; ++m) {
      const double angle = 2.0 * std::numbers::pi * std::ldexp(0.25, m) * c_noise;
      in(shape_.data_dim + 2 * m, j) = std::sin(angle);
      in(shape_.data_dim + 2 * m + 1, j) = std::cos(angle);
    }
  }
  return in;
}

Eigen::MatrixXd ToyModel::network(const PointSet& x, std::span<const double> sigma, ForwardTape* tape) const {
  Eigen::MatrixXd h = embed(x, sigma);
  const std::size_t layers = params_.weights.size();
  if (tape) {
    tape->inputs.clear();
    tape->pre_act.clear();
  }
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd a = params_.weights[l] * h;
    a.colwise() += params_.biases[l];
    if (tape) tape->inputs.push_back(std::move(h));
    if (l + 1 == layers) return a;
    h = a.unaryExpr([](double v) { return v * sigmoid(v); });
    if (tape) tape->pre_act.push_back(std::move(a));
  }
  return h;
}

PointSet ToyModel::forward(const PointSet& x, std::span<const double> sigma, ForwardTape* tape) const {
  if (x.rows() != shape_.data_dim) throw ConfigError("input dimension does not match the model");
  if (static_cast<Eigen::Index>(sigma.size()) != x.cols()) throw ConfigError("one sigma per sample is required");
  if (!x.allFinite()) throw ConfigError("non-finite input to consistency_forward");
  for (double s : sigma) {
    if (!(std::isfinite(s) && s >= cp_.sigma_min)) {
      throw ConfigError("consistency_forward needs sigma >= sigma_min, got " + std::to_string(s));
    }
  }
  Eigen::RowVectorXd skip(x.cols());
  Eigen::RowVectorXd out(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    skip(j) = cp_.c_skip(sigma[static_cast<std::size_t>(j)]);
    out(j) = cp_.c_out(sigma[static_cast<std::size_t>(j)]);
  }
  const Eigen::MatrixXd nn = network(x, sigma, tape);
  if (tape) {
    tape->c_skip = skip;
    tape->c_out = out;
  }
  return x.array().rowwise() * skip.array() + nn.array().rowwise() * out.array();
}

void ToyModel::backward(const ForwardTape& tape, const Eigen::MatrixXd& grad_f, Parameters& grad) const {
  // d f / d NN is diagonal per sample: c_out.
  Eigen::MatrixXd delta = grad_f.array().rowwise() * tape.c_out.array();
  for (std::size_t l = params_.weights.size(); l-- > 0;) {
    grad.weights[l].noalias() += delta * tape.inputs[l].transpose();
    grad.biases[l] += delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = params_.weights[l].transpose() * delta;
    const Eigen::MatrixXd& a = tape.pre_act[l - 1];
    delta = back.array() * a.unaryExpr([](double v) {
                              const double s = sigmoid(v);
                              return s + v * s * (1.0 - s);
                            }).array();
  }
}

PointSet consistency_forward(const ToyModel& model, const PointSet& x, std::span<const double> sigma) {
  return model.forward(x, sigma);
}

}  // namespace cmsched
