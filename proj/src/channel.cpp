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

#include "airgnn/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace airgnn {

std::string_view to_string(FadingMode m) {
  return m == FadingMode::kReplace ? "replace" : "multiply";
}

FadingMode parse_fading_mode(std::string_view name) {
  if (name == "replace") return FadingMode::kReplace;
  if (name == "multiply") return FadingMode::kMultiply;
  throw std::invalid_argument("unknown fading mode: " + std::string(name));
}

void ChannelModel::validate() const {
  if (!(fading_scale > 0.0) || !std::isfinite(fading_scale))
    throw std::invalid_argument("fading scale must be positive");
  if (!(reference_power > 0.0) || !std::isfinite(reference_power))
    throw std::invalid_argument("reference power must be positive");
  if (std::isnan(snr_db)) throw std::invalid_argument("snr_db is NaN");
}

double noise_variance(const ChannelModel& model) {
  return model.reference_power / std::pow(10.0, model.snr_db / 10.0);
}

std::vector<double> sample_fading(const GraphShiftOperator& graph, const ChannelModel& model,
                                  Rng& rng) {
  const auto entries = graph.entries();
  std::vector<double> gains(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& entry = entries[e];
    if (model.ideal || entry.row == entry.col) {
      gains[e] = entry.value;
      continue;
    }
    const double h = rng.rayleigh(model.fading_scale);
    gains[e] = model.fading_mode == FadingMode::kReplace ? h : h * entry.value;
  }
  return gains;
}

std::size_t ChannelRealization::hop_count() const {
  std::size_t hops = 0;
  for (const auto& l : layers) hops += l.hops.size();
  return hops;
}

void ChannelRealization::check_shape(const GraphShiftOperator& graph,
                                     const Architecture& arch) const {
  if (nodes != graph.size() || nnz != graph.nnz())
    throw std::invalid_argument("realization was sampled for a different graph");
  if (layers.size() != arch.layers.size())
    throw std::invalid_argument("realization layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& shape = arch.layers[l];
    if (layers[l].hops.size() != shape.order)
      throw std::invalid_argument("realization hop count mismatch at layer " + std::to_string(l));
    for (const auto& hop : layers[l].hops) {
      if (hop.gains.size() != 1 && hop.gains.size() != shape.in)
        throw std::invalid_argument("realization channel groups mismatch");
      for (const auto& g : hop.gains)
        if (g.size() != nnz) throw std::invalid_argument("realization gain size mismatch");
      if (hop.noise.rows() != static_cast<Eigen::Index>(nodes) ||
          hop.noise.cols() != static_cast<Eigen::Index>(shape.in))
        throw std::invalid_argument("realization noise shape mismatch");
    }
  }
}

ChannelRealization sample_realization(const GraphShiftOperator& graph, const Architecture& arch,
                                      const ChannelModel& model, const ChannelStreamKey& key) {
  if (model.ideal) return ideal_realization(graph, arch);
  model.validate();
  const double sigma = std::sqrt(noise_variance(model));
  const auto n = static_cast<Eigen::Index>(graph.size());
  ChannelRealization r;
  r.nodes = graph.size();
  r.nnz = graph.nnz();
  r.layers.resize(arch.layers.size());
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const auto& shape = arch.layers[l];
    if (shape.order == 0) continue;
    auto& hops = r.layers[l].hops;
    hops.resize(shape.order);
    for (std::size_t k = 0; k < shape.order; ++k) {
      Rng rng = Rng::substream(key.master, StreamTag::kChannel, {key.a, key.b, l, k});
      const std::size_t groups = model.per_filter_channels ? shape.in : 1;
      hops[k].gains.reserve(groups);
      for (std::size_t g = 0; g < groups; ++g) hops[k].gains.push_back(sample_fading(graph, model, rng));
      hops[k].noise.resize(n, static_cast<Eigen::Index>(shape.in));
      for (Eigen::Index i = 0; i < hops[k].noise.size(); ++i)
        hops[k].noise.data()[i] = sigma * rng.normal();
    }
  }
  return r;
}

ChannelRealization ideal_realization(const GraphShiftOperator& graph, const Architecture& arch) {
  ChannelRealization r;
  r.nodes = graph.size();
  r.nnz = graph.nnz();
  r.layers.resize(arch.layers.size());
  const auto nominal = graph.values();
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const auto& shape = arch.layers[l];
    r.layers[l].hops.resize(shape.order);
    for (auto& hop : r.layers[l].hops) {
      hop.gains = {nominal};
      hop.noise = Matrix::Zero(static_cast<Eigen::Index>(graph.size()),
                               static_cast<Eigen::Index>(shape.in));
    }
  }
  return r;
}

namespace {

void add_noise_blocks(const Matrix& noise, SignalView y) {
  const auto n = noise.rows();
  const auto cols = noise.cols();
  for (Eigen::Index base = 0; base < y.rows; base += n)
    for (Eigen::Index i = 0; i < n; ++i) {
      double* dst = y.data + (base + i) * y.stride;
      const double* src = noise.data() + i * cols;
      for (Eigen::Index f = 0; f < cols; ++f) dst[f] += src[f];
    }
}

// Per-feature gains: column g is shifted with gains[g].
void grouped_shift(const GraphShiftOperator& graph, const std::vector<std::vector<double>>& gains,
                   ConstSignalView x, SignalView y, bool transpose) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  const auto entries = graph.entries();
  for (Eigen::Index base = 0; base < x.rows; base += n) {
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto dst = base + (transpose ? entries[e].col : entries[e].row);
      const auto src = base + (transpose ? entries[e].row : entries[e].col);
      for (Eigen::Index f = 0; f < x.cols; ++f)
        y.data[dst * y.stride + f] += gains[static_cast<std::size_t>(f)][e] * x.data[src * x.stride + f];
    }
  }
}

void check_hop(const GraphShiftOperator& graph, const HopRealization& hop, ConstSignalView x,
               SignalView y, bool noise) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  if (x.rows % n != 0 || x.rows != y.rows || x.cols != y.cols)
    throw std::invalid_argument("air_shift dimension mismatch");
  if (noise && (hop.noise.rows() != n || hop.noise.cols() != x.cols))
    throw std::invalid_argument("air_shift dimension mismatch");
  if (hop.gains.size() != 1 && hop.gains.size() != static_cast<std::size_t>(x.cols))
    throw std::invalid_argument("air_shift dimension mismatch");
}

}  // namespace

void air_shift_into(const GraphShiftOperator& graph, const HopRealization& hop, ConstSignalView x,
                    SignalView y) {
  check_hop(graph, hop, x, y, true);
  if (hop.gains.size() == 1)
    shift_accumulate(graph, hop.gains.front(), x, y, false);
  else
    grouped_shift(graph, hop.gains, x, y, false);
  add_noise_blocks(hop.noise, y);
}

void air_shift_transpose_accumulate(const GraphShiftOperator& graph, const HopRealization& hop,
                                    ConstSignalView g, SignalView y) {
  check_hop(graph, hop, g, y, false);
  if (hop.gains.size() == 1)
    shift_accumulate(graph, hop.gains.front(), g, y, true);
  else
    grouped_shift(graph, hop.gains, g, y, true);
}

GraphSignal air_shift(const GraphShiftOperator& graph, const GraphSignal& x,
                      std::span<const double> gains, const Matrix& noise) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  if (x.rows() % n != 0 || noise.rows() != n || noise.cols() != x.cols())
    throw std::invalid_argument("air_shift dimension mismatch");
  GraphSignal y = GraphSignal::Zero(x.rows(), x.cols());
  shift_accumulate(graph, gains, x, y);
  add_noise_blocks(noise, view_of(y));
  return y;
}

GraphSignal air_shift(const GraphShiftOperator& graph, const GraphSignal& x,
                      const HopRealization& hop) {
  GraphSignal y = GraphSignal::Zero(x.rows(), x.cols());
  air_shift_into(graph, hop, view_of(x), view_of(y));
  return y;
}

void air_shift_transpose_accumulate(const GraphShiftOperator& graph, const HopRealization& hop,
                                    const Matrix& g, Matrix& y) {
  air_shift_transpose_accumulate(graph, hop, view_of(g), view_of(y));
}

}  // namespace airgnn
