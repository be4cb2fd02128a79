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

#include <cstdint>
#include <vector>

#include "airgnn/channel.hpp"
#include "airgnn/dataset.hpp"
#include "airgnn/graph.hpp"
#include "airgnn/model.hpp"

namespace airgnn {

struct DiffusionConfig {
  std::size_t nodes = 100;
  std::size_t communities = 10;
  double p_intra = 0.8;
  double p_inter = 0.2;
  std::size_t samples = 15000;
  std::size_t train = 10000;
  std::size_t validation = 2500;
  std::size_t test = 2500;
  std::size_t tau_min = 1;
  std::size_t tau_max = 100;
  double noise_sigma = 0.01;
};

// Lowest node index of every community (communities are contiguous blocks).
std::vector<std::size_t> community_sources(std::size_t nodes, std::size_t communities);

// Samples x = S^tau delta_c + noise with the source c and tau drawn
// uniformly; label = index of c in `sources`. Splits are contiguous:
// [0, train), [train, train + validation), then test.
TaskDataset build_diffusion_dataset(const GraphShiftOperator& shift,
                                    const std::vector<std::size_t>& sources,
                                    const DiffusionConfig& config, std::uint64_t seed);

// SBM graph (seeded from the graph stream), spectral normalization and the
// dataset in one call.
TaskDataset make_source_localization(const DiffusionConfig& config, std::uint64_t seed);

// Fraction of correct argmax(mean readout) predictions, averaged over
// `redraws` independent channel draws; every sample gets its own realization.
double classify_accuracy(const AirGnnParameters& params, const SupervisedData& data,
                         std::span<const std::size_t> indices, const ChannelModel& model,
                         std::size_t redraws, std::uint64_t seed);

}  // namespace airgnn
