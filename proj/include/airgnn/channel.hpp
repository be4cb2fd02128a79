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
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "airgnn/architecture.hpp"
#include "airgnn/graph.hpp"
#include "airgnn/rng.hpp"

namespace airgnn {

// kReplace: the fading draw is the link weight. kMultiply: it scales s_ij.
enum class FadingMode { kReplace, kMultiply };

std::string_view to_string(FadingMode m);
FadingMode parse_fading_mode(std::string_view name);

struct ChannelModel {
  double fading_scale = 1.0;  // Rayleigh scale delta
  double snr_db = 40.0;
  FadingMode fading_mode = FadingMode::kReplace;
  double reference_power = 1.0;
  // Independent fading per input feature instead of one draw per hop.
  bool per_filter_channels = false;
  // Nominal gains and zero noise; reduces the AirGNN to a conventional GNN.
  bool ideal = false;

  static ChannelModel ideal_channel() {
    ChannelModel m;
    m.ideal = true;
    return m;
  }
  void validate() const;
};

// sigma^2 = reference_power / 10^(snr_db / 10).
double noise_variance(const ChannelModel& model);

// Realized link gains aligned with graph.entries(). Diagonal entries keep
// their nominal value.
std::vector<double> sample_fading(const GraphShiftOperator& graph, const ChannelModel& model,
                                  Rng& rng);

struct HopRealization {
  // One gain vector per channel group (1, or F_in with per_filter_channels).
  std::vector<std::vector<double>> gains;
  Matrix noise;  // n x F_in, added at the receivers

  friend bool operator==(const HopRealization&, const HopRealization&) = default;
};

struct LayerRealization {
  std::vector<HopRealization> hops;

  friend bool operator==(const LayerRealization&, const LayerRealization&) = default;
};

// Every fading matrix and noise block consumed by one forward pass.
struct ChannelRealization {
  std::size_t nodes = 0;
  std::size_t nnz = 0;
  std::vector<LayerRealization> layers;

  std::size_t hop_count() const;
  // Throws if the realization does not fit this graph and architecture.
  void check_shape(const GraphShiftOperator& graph, const Architecture& arch) const;

  friend bool operator==(const ChannelRealization&, const ChannelRealization&) = default;
};

// Identifies the substream family a realization is drawn from. Hop (layer, k)
// uses Rng::substream(master, kChannel, {a, b, layer, k}).
struct ChannelStreamKey {
  std::uint64_t master = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

ChannelRealization sample_realization(const GraphShiftOperator& graph, const Architecture& arch,
                                      const ChannelModel& model, const ChannelStreamKey& key);

// Nominal gains, zero noise.
ChannelRealization ideal_realization(const GraphShiftOperator& graph, const Architecture& arch);

// y = H x + noise for one hop. x may stack several n-row blocks; noise is
// added to every block.
GraphSignal air_shift(const GraphShiftOperator& graph, const GraphSignal& x,
                      const HopRealization& hop);
GraphSignal air_shift(const GraphShiftOperator& graph, const GraphSignal& x,
                      std::span<const double> gains, const Matrix& noise);

// Reverse of the linear part of air_shift: y += H^T g.
void air_shift_transpose_accumulate(const GraphShiftOperator& graph, const HopRealization& hop,
                                    const Matrix& g, Matrix& y);

// View forms used by the layer kernels. y must be zero (or hold a partial
// sum) on entry; air_shift_into adds H x and then the noise.
void air_shift_into(const GraphShiftOperator& graph, const HopRealization& hop, ConstSignalView x,
                    SignalView y);
void air_shift_transpose_accumulate(const GraphShiftOperator& graph, const HopRealization& hop,
                                    ConstSignalView g, SignalView y);

void save_realization(const ChannelRealization& realization, const std::filesystem::path& path);
ChannelRealization load_realization(const std::filesystem::path& path);

}  // namespace airgnn
