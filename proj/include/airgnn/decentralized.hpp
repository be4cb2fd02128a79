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
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "airgnn/channel.hpp"
#include "airgnn/graph.hpp"
#include "airgnn/model.hpp"

namespace airgnn {

// One synchronized broadcast round per (layer, hop).
struct RoundSchedule {
  struct Round {
    std::size_t layer = 0;
    std::size_t hop = 0;       // 1-based hop index k within the layer
    std::size_t features = 0;  // scalars each node broadcasts
  };
  std::vector<Round> rounds;

  static RoundSchedule for_architecture(const Architecture& arch);
};

struct TransmitLogEntry {
  std::size_t round = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::size_t feature = 0;
  double value_sent = 0.0;
  double gain = 0.0;
  double noise_applied = 0.0;
};

// A value consumed by `reader` that originated at node `origin`.
struct ReadEvent {
  std::size_t round = 0;
  std::uint32_t reader = 0;
  std::uint32_t origin = 0;
};

struct RunLog {
  std::size_t rounds = 0;
  std::vector<TransmitLogEntry> transmissions;
  std::vector<ReadEvent> reads;
};

struct DecentralizedOptions {
  bool audit = false;
  bool log_transmissions = false;
  // Randomizes the node processing order inside every round.
  std::optional<std::uint64_t> shuffle_seed;
  // Test hook: before the first round, `first` reads the state of `second`
  // directly instead of through its inbox.
  std::optional<std::pair<std::uint32_t, std::uint32_t>> inject_nonlocal_read;
};

struct DecentralizedResult {
  GraphSignal output;
  RunLog log;
};

// Executes the network node by node. In every round each node broadcasts its
// current shifted values; the medium scales them by the link gains and the
// receiver adds its own noise draw (taken from `realization`).
DecentralizedResult run_decentralized(const GraphShiftOperator& graph, const GraphSignal& x,
                                      const AirGnnParameters& params,
                                      const ChannelRealization& realization,
                                      const DecentralizedOptions& options = {});

// Scalars sent over directed links: sum over rounds of F_round * |E|.
std::size_t count_transmissions(const RoundSchedule& schedule, const GraphShiftOperator& graph);

// True iff every read originated at the reader or at one of its neighbors.
bool locality_audit(const RunLog& log, const GraphShiftOperator& graph);

void write_transmit_log(const RunLog& log, const std::filesystem::path& path);

}  // namespace airgnn
