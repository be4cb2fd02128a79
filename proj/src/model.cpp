// Copyright 2026 The AirGNN Authors
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

#include "airgnn/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace airgnn {

FilterBank::FilterBank(const LayerShape& shape) : shape_(shape) {
  weights_ = Matrix::Zero(static_cast<Eigen::Index>((shape.order + 1) * shape.in),
                          static_cast<Eigen::Index>(shape.out));
}

AirGnnParameters AirGnnParameters::zeros(const Architecture& arch) {
  arch.validate();
  AirGnnParameters p;
  p.layers.reserve(arch.layers.size());
  for (const auto& shape : arch.layers) p.layers.emplace_back(shape);
  return p;
}

Architecture AirGnnParameters::architecture() const {
  Architecture arch;
  for (const auto& bank : layers) arch.layers.push_back(bank.shape());
  return arch;
}

std::size_t AirGnnParameters::size() const { return architecture().parameter_count(); }

std::vector<double> AirGnnParameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  for (const auto& bank : layers) {
    const auto& s = bank.shape();
    for (std::size_t g = 0; g < s.in; ++g)
      for (std::size_t f = 0; f < s.out; ++f)
        for (std::size_t k = 0; k <= s.order; ++k) flat.push_back(bank.alpha(g, f, k));
  }
  return flat;
}

void AirGnnParameters::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw std::invalid_argument("flat parameter size mismatch");
  std::size_t i = 0;
  for (auto& bank : layers) {
    const auto s = bank.shape();
    for (std::size_t g = 0; g < s.in; ++g)
      for (std::size_t f = 0; f < s.out; ++f)
        for (std::size_t k = 0; k <= s.order; ++k) bank.alpha(g, f, k) = flat[i++];
  }
}

bool AirGnnParameters::all_finite() const {
  for (const auto& bank : layers)
    if (!bank.stacked().allFinite()) return false;
  return true;
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kIdentity: return z;
  }
  return z;
}

double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;  // 0 at z == 0
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kIdentity: return 1.0;
  }
  return 1.0;
}

FilterOutput air_filter_apply(const GraphShiftOperator& graph, const GraphSignal& x,
                              std::span<const double> alpha,
                              std::span<const HopRealization> hops) {
  if (alpha.empty() || alpha.size() != hops.size() + 1)
    throw std::invalid_argument("filter needs K + 1 coefficients for K hops");
  FilterOutput out;
  out.stack.reserve(alpha.size());
  out.stack.push_back(x);
  for (const auto& hop : hops) out.stack.push_back(air_shift(graph, out.stack.back(), hop));
  out.output = GraphSignal::Zero(x.rows(), x.cols());
  for (std::size_t k = 0; k < alpha.size(); ++k) out.output += alpha[k] * out.stack[k];
  return out;
}

LayerOutput layer_forward(const GraphShiftOperator& graph, const Matrix& inputs,
                          const FilterBank& bank, const LayerRealization& realization) {
  const auto& shape = bank.shape();
  if (inputs.cols() != static_cast<Eigen::Index>(shape.in))
    throw std::invalid_argument("layer input width " + std::to_string(inputs.cols()) +
                                " != bank input width " + std::to_string(shape.in));
  if (realization.hops.size() != shape.order)
    throw std::invalid_argument("layer realization has wrong hop count");
  const auto in = static_cast<Eigen::Index>(shape.in);
  LayerOutput out;
  Matrix& stack = out.tape.stack;
  stack.resize(inputs.rows(), (static_cast<Eigen::Index>(shape.order) + 1) * in);
  stack.leftCols(in) = inputs;
  if (shape.order > 0) stack.rightCols(static_cast<Eigen::Index>(shape.order) * in).setZero();
  for (std::size_t k = 0; k < shape.order; ++k) {
    const auto from = static_cast<Eigen::Index>(k) * in;
    air_shift_into(graph, realization.hops[k], column_view(std::as_const(stack), from, in),
                   column_view(stack, from + in, in));
  }
  Matrix& z = out.tape.pre_activation;
  z.noalias() = stack * bank.stacked();
  if (shape.activation == Activation::kIdentity) {
    out.output = z;
  } else {
    out.output = z.unaryExpr([a = shape.activation](double v) { return activate(a, v); });
  }
  return out;
}

namespace {

void check_input(const GraphShiftOperator& graph, const GraphSignal& x,
                 const AirGnnParameters& params) {
  if (params.layers.empty()) throw std::invalid_argument("empty parameter set");
  const auto n = static_cast<Eigen::Index>(graph.size());
  if (x.rows() == 0 || x.rows() % n != 0)
    throw std::invalid_argument("input rows must be a multiple of the node count");
  if (x.cols() != static_cast<Eigen::Index>(params.layers.front().shape().in))
    throw std::invalid_argument("input feature width mismatch");
}

}  // namespace

ForwardResult forward(const GraphShiftOperator& graph, const GraphSignal& x,
                      const AirGnnParameters& params,
                      std::shared_ptr<const ChannelRealization> realization) {
  check_input(graph, x, params);
  if (!realization) throw std::invalid_argument("forward requires a realization");
  realization->check_shape(graph, params.architecture());
  ForwardResult result;
  result.tape.realization = realization;
  result.tape.layers.reserve(params.layers.size());
  Matrix current = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    LayerOutput layer = layer_forward(graph, current, params.layers[l], realization->layers[l]);
    current = std::move(layer.output);
    result.tape.layers.push_back(std::move(layer.tape));
  }
  result.output = std::move(current);
  return result;
}

GraphSignal forward_output(const GraphShiftOperator& graph, const GraphSignal& x,
                           const AirGnnParameters& params,
                           const ChannelRealization& realization) {
  check_input(graph, x, params);
  realization.check_shape(graph, params.architecture());
  Matrix current = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    current = layer_forward(graph, current, params.layers[l], realization.layers[l]).output;
  return current;
}

AirGnnParameters backward(const GraphShiftOperator& graph, const ForwardTape& tape,
                          const AirGnnParameters& params, const GraphSignal& output_grad) {
  if (!tape.realization || tape.layers.size() != params.layers.size())
    throw std::invalid_argument("tape does not match parameters");
  const Architecture arch = params.architecture();
  tape.realization->check_shape(graph, arch);
  for (std::size_t l = 0; l < tape.layers.size(); ++l) {
    const auto& t = tape.layers[l];
    const auto& s = arch.layers[l];
    if (t.stack.cols() != static_cast<Eigen::Index>((s.order + 1) * s.in) ||
        t.pre_activation.cols() != static_cast<Eigen::Index>(s.out) ||
        t.stack.rows() != t.pre_activation.rows())
      throw std::invalid_argument("tape shape does not match parameters at layer " +
                                  std::to_string(l));
  }
  const auto& last = tape.layers.back().pre_activation;
  if (output_grad.rows() != last.rows() || output_grad.cols() != last.cols())
    throw std::invalid_argument("output gradient shape mismatch");

  AirGnnParameters grad = AirGnnParameters::zeros(arch);
  Matrix upstream = output_grad;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& shape = arch.layers[l];
    const auto& t = tape.layers[l];
    const auto& bank = params.layers[l];
    Matrix dz = upstream;
    if (shape.activation != Activation::kIdentity) {
      dz.array() *= t.pre_activation.unaryExpr(
          [a = shape.activation](double v) { return activate_derivative(a, v); }).array();
    }
    grad.layers[l].stacked().noalias() = t.stack.transpose() * dz;
    if (l == 0) break;
    // g_K = dz A_K^T; g_{k-1} = dz A_{k-1}^T + H_k^T g_k, built in place on
    // the column blocks of dz W^T.
    const auto& hops = tape.realization->layers[l].hops;
    const auto in = static_cast<Eigen::Index>(shape.in);
    Matrix all = dz * bank.stacked().transpose();
    for (std::size_t k = shape.order; k > 0; --k) {
      const auto at = static_cast<Eigen::Index>(k) * in;
      air_shift_transpose_accumulate(graph, hops[k - 1], column_view(std::as_const(all), at, in),
                                     column_view(all, at - in, in));
    }
    upstream = all.leftCols(in);
  }
  return grad;
}

AirGnnParameters init_parameters(const Architecture& arch, InitScheme scheme, Rng& rng,
                                 double constant) {
  AirGnnParameters p = AirGnnParameters::zeros(arch);
  for (auto& bank : p.layers) {
    const auto s = bank.shape();
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.in * (s.order + 1)));
    for (std::size_t g = 0; g < s.in; ++g)
      for (std::size_t f = 0; f < s.out; ++f)
        for (std::size_t k = 0; k <= s.order; ++k)
          bank.alpha(g, f, k) =
              scheme == InitScheme::kConstant ? constant : rng.uniform(-bound, bound);
  }
  return p;
}

}  // namespace airgnn
