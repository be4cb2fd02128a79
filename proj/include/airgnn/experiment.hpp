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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "airgnn/config.hpp"
#include "airgnn/dataset.hpp"
#include "airgnn/flocking.hpp"
#include "airgnn/source_localization.hpp"
#include "airgnn/training.hpp"

namespace airgnn {

std::string_view version();

// Everything needed to repeat a command: the resolved config is the input,
// the remaining fields document what the run used.
struct RunManifest {
  std::string command;
  std::string config_text;
  std::string version;
  std::uint64_t master_seed = 0;
  std::map<std::string, std::uint64_t> substreams;
  std::string dataset_hash;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
};

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

// AIRGNN_SEED, when set, replaces the configured seed.
void apply_environment(Config& config);

// Config -> library settings.
DiffusionConfig diffusion_config(const Config& config);
FlockingConfig flocking_config(const Config& config);
Architecture build_architecture(const Config& config, std::size_t input_width,
                                std::size_t output_width);
ChannelModel build_channel(const Config& config, double reference_power);
OptimizerConfig build_optimizer(const Config& config);
Objective build_objective(const Config& config);
TrainConfig build_train_config(const Config& config, const TaskDataset& dataset);

TaskDataset generate_dataset(const Config& config);

enum class EvalMode { kAirGnn, kGnnIdeal, kGnnWithChannel };
std::string_view to_string(EvalMode mode);
EvalMode parse_eval_mode(std::string_view name);

// Test metric of one condition: accuracy for source localization, velocity
// variance cost for flocking. One value per channel re-draw.
struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> values;
};

MetricSummary evaluate_condition(const Config& config, const TaskDataset& dataset,
                                 const AirGnnParameters& params, const ChannelModel& test_channel,
                                 std::size_t redraws, std::uint64_t seed);

// Output file names inside output_dir.
namespace files {
inline constexpr const char* kDataset = "dataset.bin";
inline constexpr const char* kDatasetCsv = "dataset.csv";
inline constexpr const char* kResolvedConfig = "config.resolved";
std::string checkpoint(std::string_view channel_tag);
std::string train_record(std::string_view channel_tag);
std::string train_state(std::string_view channel_tag);
std::string manifest(std::string_view command);
}  // namespace files

struct GenDataOutcome {
  RunManifest manifest;
  std::string dataset_hash;
  std::size_t samples = 0;
};
GenDataOutcome cmd_gen_data(const Config& config, bool export_csv = false);

struct TrainOutcome {
  RunManifest manifest;
  TrainResult result;
};
TrainOutcome cmd_train(const Config& config);

struct EvalOutcome {
  RunManifest manifest;
  MetricSummary summary;
  MetricSummary test_loss;  // training objective on the test split
};
EvalOutcome cmd_eval(const Config& config);

struct GradcheckInstance {
  std::size_t nodes = 0;
  std::size_t parameters = 0;
  double max_relative_error = 0.0;
  double median_relative_error = 0.0;
  std::size_t worst_index = 0;
};

struct GradcheckFailure {
  std::size_t instance = 0;
  std::size_t flat_index = 0;
  std::size_t layer = 0, g = 0, f = 0, k = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradcheckReport {
  RunManifest manifest;
  bool passed = false;
  double max_relative_error = 0.0;
  double median_relative_error = 0.0;
  std::vector<GradcheckInstance> instances;
  std::vector<GradcheckFailure> failures;
  std::string text() const;
};
GradcheckReport cmd_gradcheck(const Config& config);

struct ConvergenceRun {
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double step_size = 0.0;
  double gradient_bound = 0.0;
  double lipschitz = 0.0;
  double initial_loss = 0.0;
  double min_grad_norm_sq = 0.0;
  std::size_t argmin_iteration = 0;
  double bias_at_min = 0.0;
  double tail_loss = 0.0;          // mean minibatch loss over the last window of the run
  double quarter_tail_loss = 0.0;  // same window ending at T / 4
};

struct ConvergenceReport {
  RunManifest manifest;
  std::vector<ConvergenceRun> runs;
  std::vector<std::size_t> horizons;
  std::vector<double> mean_min_grad_norm_sq;  // per horizon, over seeds
  // mean_min(first horizon) / mean_min(last horizon).
  double decay_ratio = 0.0;
  double mean_of_seed_ratios = 0.0;
  // For the longest horizon: mean over seeds of the trailing-window losses.
  double tail_loss = 0.0;
  double quarter_tail_loss = 0.0;
  std::string text() const;
};
ConvergenceReport cmd_convergence(const Config& config);

struct SweepRow {
  double delta = 0.0;
  EvalMode mode = EvalMode::kAirGnn;
  MetricSummary summary;
};
struct SweepOutcome {
  RunManifest manifest;
  std::vector<SweepRow> rows;
};
SweepOutcome cmd_sweep_delta(const Config& config);

// Length of the trailing loss window used by the convergence report.
inline constexpr std::size_t kLossWindow = 200;

}  // namespace airgnn
