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

#include "airgnn/architecture.hpp"

#include <stdexcept>
#include <string>

namespace airgnn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown nonlinearity: " + std::string(name));
}

void Architecture::validate() const {
  if (layers.empty()) throw std::invalid_argument("architecture needs at least one layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].in == 0 || layers[l].out == 0)
      throw std::invalid_argument("layer widths must be positive");
    if (l > 0 && layers[l].in != layers[l - 1].out)
      throw std::invalid_argument("layer " + std::to_string(l) + " input width " +
                                  std::to_string(layers[l].in) + " != previous output width " +
                                  std::to_string(layers[l - 1].out));
  }
}

std::size_t Architecture::parameter_count() const {
  std::size_t count = 0;
  for (const auto& l : layers) count += l.in * l.out * (l.order + 1);
  return count;
}

std::size_t Architecture::total_hops() const {
  std::size_t hops = 0;
  for (const auto& l : layers) hops += l.order;
  return hops;
}

}  // namespace airgnn
