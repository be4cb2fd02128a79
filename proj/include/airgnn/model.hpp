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

#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "airgnn/architecture.hpp"
#include "airgnn/channel.hpp"
#include "airgnn/graph.hpp"
#include "airgnn/rng.hpp"

namespace airgnn {

// Filter taps of one layer. alpha(g, f, k) is the k-th coefficient of the
// filter from input feature g to output feature f; taps(k) is the in x out
// matrix of all k-th coefficients. The taps are stored stacked as one
// (K + 1) in x out matrix, tap k in rows [k in, (k + 1) in).
class FilterBank {
 public:
  explicit FilterBank(const LayerShape& shape);

  const LayerShape& shape() const { return shape_; }
  double& alpha(std::size_t g, std::size_t f, std::size_t k) {
    return weights_(static_cast<Eigen::Index>(k * shape_.in + g), static_cast<Eigen::Index>(f));
  }
  double alpha(std::size_t g, std::size_t f, std::size_t k) const {
    return weights_(static_cast<Eigen::Index>(k * shape_.in + g), static_cast<Eigen::Index>(f));
  }
  auto taps(std::size_t k) const {
    return weights_.middleRows(static_cast<Eigen::Index>(k * shape_.in),
                               static_cast<Eigen::Index>(shape_.in));
  }
  auto taps(std::size_t k) {
    return weights_.middleRows(static_cast<Eigen::Index>(k * shape_.in),
                               static_cast<Eigen::Index>(shape_.in));
  }
  const Matrix& stacked() const { return weights_; }
  Matrix& stacked() { return weights_; }

  friend bool operator==(const FilterBank&, const FilterBank&) = default;

 private:
  LayerShape shape_;
  Matrix weights_;
};

// All filter coefficients of the network. The flat layout is
// [layer][g][f][k], row-major, which is also the checkpoint order.
struct AirGnnParameters {
  std::vector<FilterBank> layers;

  static AirGnnParameters zeros(const Architecture& arch);
  Architecture architecture() const;
  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  bool all_finite() const;

  friend bool operator==(const AirGnnParameters&, const AirGnnParameters&) = default;
};

double activate(Activation a, double z);
double activate_derivative(Activation a, double z);

struct FilterOutput {
  GraphSignal output;
  std::vector<GraphSignal> stack;  // x^(0) .. x^(K)
};

// Single air graph filter: sum_k alpha_k x^(k), with x^(k) obtained by
// recursive air shifts through `hops`.
FilterOutput air_filter_apply(const GraphShiftOperator& graph, const GraphSignal& x,
                              std::span<const double> alpha,
                              std::span<const HopRealization> hops);

struct LayerTape {
  Matrix stack;           // rows x (K + 1) F_in, column block k holds x^(k)
  Matrix pre_activation;      // rows x F_out
};

struct LayerOutput {
  Matrix output;
  LayerTape tape;
};

LayerOutput layer_forward(const GraphShiftOperator& graph, const Matrix& inputs,
                          const FilterBank& bank, const LayerRealization& realization);

// Everything backward() needs besides the graph and parameters.
struct ForwardTape {
  std::shared_ptr<const ChannelRealization> realization;
  std::vector<LayerTape> layers;
};

struct ForwardResult {
  GraphSignal output;
  ForwardTape tape;
};

// x stacks one or more n-row samples that share the same realization.
ForwardResult forward(const GraphShiftOperator& graph, const GraphSignal& x,
                      const AirGnnParameters& params,
                      std::shared_ptr<const ChannelRealization> realization);

// Forward pass without recording a tape.
GraphSignal forward_output(const GraphShiftOperator& graph, const GraphSignal& x,
                           const AirGnnParameters& params,
                           const ChannelRealization& realization);

// Exact reverse-mode gradient of <output_grad, output> with respect to every
// coefficient, holding the recorded realization fixed.
AirGnnParameters backward(const GraphShiftOperator& graph, const ForwardTape& tape,
                          const AirGnnParameters& params, const GraphSignal& output_grad);

enum class InitScheme { kUniformFanIn, kConstant };

// kUniformFanIn: alpha ~ U(-b, b), b = 1 / sqrt(F_in (K + 1)).
AirGnnParameters init_parameters(const Architecture& arch, InitScheme scheme, Rng& rng,
                                 double constant = 0.0);

// JSON checkpoint; coefficients are stored as hexadecimal floats so a
// save/load round trip is bit-exact.
void save_parameters(const AirGnnParameters& params, const std::filesystem::path& path);
AirGnnParameters load_parameters(const std::filesystem::path& path);
std::string parameters_to_json(const AirGnnParameters& params);
AirGnnParameters parameters_from_json(const std::string& text);

}  // namespace airgnn
