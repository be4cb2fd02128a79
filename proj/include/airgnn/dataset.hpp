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
#include <string>
#include <vector>

#include "airgnn/training.hpp"

namespace airgnn {

// A generated task dataset plus the metadata the experiments need.
struct TaskDataset {
  std::string task;  // "source_localization" or "flocking"
  double reference_power = 1.0;  // mean per-node squared input value over the train split
  // Per-column factors already applied to every input; empty means none.
  // Controllers that compute features online apply the same factors.
  std::vector<double> input_scale;
  std::vector<std::size_t> sources;  // source localization only
  SupervisedData data;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  // Flocking only: initial swarm states of the held-out test trajectories.
  std::vector<Matrix> test_positions;
  std::vector<Matrix> test_velocities;
};

double mean_square_input(const SupervisedData& data, std::span<const std::size_t> indices);

// Multiplies every input signal by `factor`; reference_power scales by
// factor^2 so the channel SNR is unchanged. The factor is recorded in
// input_scale.
void scale_inputs(TaskDataset& dataset, double factor);
// Multiplies input column f by factors[f] and recomputes reference_power
// over the train split. Factors compose with any earlier scaling.
void scale_input_columns(TaskDataset& dataset, std::span<const double> factors);
// Factors that bring every input column to unit mean square over the train
// split; columns that are identically zero keep factor 1.
std::vector<double> unit_power_factors(const TaskDataset& dataset);

// Versioned little-endian binary; see README for the layout.
void save_dataset(const TaskDataset& dataset, const std::filesystem::path& path);
TaskDataset load_dataset(const std::filesystem::path& path);
// One row per (sample, node).
void export_dataset_csv(const TaskDataset& dataset, const std::filesystem::path& path);

// 64-bit FNV-1a over a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace airgnn
