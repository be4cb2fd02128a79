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

#include "airgnn/source_localization.hpp"

#include <stdexcept>

#include "airgnn/rng.hpp"

namespace airgnn {

std::vector<std::size_t> community_sources(std::size_t nodes, std::size_t communities) {
  if (communities == 0 || nodes % communities != 0)
    throw std::invalid_argument("communities must divide n");
  std::vector<std::size_t> sources;
  for (std::size_t c = 0; c < communities; ++c) sources.push_back(c * (nodes / communities));
  return sources;
}

TaskDataset build_diffusion_dataset(const GraphShiftOperator& shift,
                                    const std::vector<std::size_t>& sources,
                                    const DiffusionConfig& config, std::uint64_t seed) {
  if (sources.empty()) throw std::invalid_argument("need at least one source");
  for (std::size_t s : sources)
    if (s >= shift.size()) throw std::invalid_argument("source node out of range");
  if (config.tau_min == 0 || config.tau_min > config.tau_max)
    throw std::invalid_argument("invalid diffusion time range: need 1 <= tau_min <= tau_max");
  if (config.samples == 0) throw std::invalid_argument("need at least one sample");
  if (config.train + config.validation + config.test != config.samples)
    throw std::invalid_argument("split sizes must add up to the sample count");
  if (config.noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");

  // diffused[c][tau] = S^tau delta_{s_c}, by repeated shifts.
  std::vector<std::vector<GraphSignal>> diffused(sources.size());
  for (std::size_t c = 0; c < sources.size(); ++c) {
    diffused[c].reserve(config.tau_max + 1);
    diffused[c].push_back(kronecker_delta(shift.size(), sources[c]));
    for (std::size_t tau = 1; tau <= config.tau_max; ++tau)
      diffused[c].push_back(ideal_shift(shift, diffused[c].back()));
  }

  TaskDataset ds;
  ds.task = "source_localization";
  ds.sources = sources;
  ds.data.graphs = {shift};
  ds.data.examples.reserve(config.samples);
  const std::size_t span = config.tau_max - config.tau_min + 1;
  for (std::size_t i = 0; i < config.samples; ++i) {
    Rng rng = Rng::substream(seed, StreamTag::kDataset, {i});
    const auto c = static_cast<std::size_t>(rng.index(sources.size()));
    const std::size_t tau = config.tau_min + static_cast<std::size_t>(rng.index(span));
    Example ex;
    ex.graph = 0;
    ex.label = static_cast<int>(c);
    ex.x = diffused[c][tau];
    for (Eigen::Index v = 0; v < ex.x.size(); ++v) ex.x.data()[v] += config.noise_sigma * rng.normal();
    ds.data.examples.push_back(std::move(ex));
  }
  for (std::size_t i = 0; i < config.samples; ++i) {
    if (i < config.train) {
      ds.train.push_back(i);
    } else if (i < config.train + config.validation) {
      ds.validation.push_back(i);
    } else {
      ds.test.push_back(i);
    }
  }
  ds.reference_power = ds.train.empty() ? 1.0 : mean_square_input(ds.data, ds.train);
  return ds;
}

TaskDataset make_source_localization(const DiffusionConfig& config, std::uint64_t seed) {
  const auto adjacency = generate_sbm(config.nodes, config.communities, config.p_intra,
                                      config.p_inter, derive_seed(seed, StreamTag::kGraph, {}));
  const auto shift = normalize_by_spectral_radius(adjacency);
  return build_diffusion_dataset(shift, community_sources(config.nodes, config.communities),
                                 config, derive_seed(seed, StreamTag::kDataset, {}));
}

double classify_accuracy(const AirGnnParameters& params, const SupervisedData& data,
                         std::span<const std::size_t> indices, const ChannelModel& model,
                         std::size_t redraws, std::uint64_t seed) {
  if (indices.empty()) return 0.0;
  if (redraws == 0) throw std::invalid_argument("need at least one redraw");
  const auto arch = params.architecture();
  const std::size_t effective = model.ideal ? 1 : redraws;
  const std::uint64_t master = derive_seed(seed, StreamTag::kEvaluation, {});
  std::size_t correct = 0;
  for (std::size_t r = 0; r < effective; ++r) {
    for (std::size_t idx : indices) {
      const auto& ex = data.examples.at(idx);
      const auto& graph = data.graphs.at(ex.graph);
      const auto realization = sample_realization(graph, arch, model, {master, r, idx});
      const auto logits = mean_readout(forward_output(graph, ex.x, params, realization));
      Eigen::Index best = 0;
      logits.maxCoeff(&best);
      if (best == ex.label) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(effective * indices.size());
}

}  // namespace airgnn
