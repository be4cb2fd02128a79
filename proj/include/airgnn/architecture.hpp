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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace airgnn {

enum class Activation { kRelu, kTanh, kIdentity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

// One layer of a filter bank: `in` input features, `out` output features,
// filter order K (K channel hops, K + 1 taps) and the pointwise nonlinearity.
struct LayerShape {
  std::size_t in = 1;
  std::size_t out = 1;
  std::size_t order = 1;
  Activation activation = Activation::kIdentity;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

struct Architecture {
  std::vector<LayerShape> layers;

  // Throws std::invalid_argument when consecutive widths disagree.
  void validate() const;
  std::size_t input_width() const { return layers.front().in; }
  std::size_t output_width() const { return layers.back().out; }
  std::size_t parameter_count() const;
  std::size_t total_hops() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

}  // namespace airgnn
