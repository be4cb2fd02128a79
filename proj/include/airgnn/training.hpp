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
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "airgnn/channel.hpp"
#include "airgnn/model.hpp"
#include "airgnn/optim.hpp"

namespace airgnn {

enum class LossKind { kCrossEntropyMeanPool, kMse };
enum class Readout { kMeanOverNodes, kPerNode };

std::string_view to_string(LossKind k);
LossKind parse_loss(std::string_view name);

struct Objective {
  LossKind loss = LossKind::kCrossEntropyMeanPool;
  Readout readout = Readout::kMeanOverNodes;

  void validate(const Architecture& arch) const;
};

// One supervised sample on graph `graph` of the owning dataset. Classification
// uses `label`; regression uses `target` (n x F_out).
struct Example {
  std::uint32_t graph = 0;
  Matrix x;
  int label = -1;
  Matrix target;
};

struct SupervisedData {
  std::vector<GraphShiftOperator> graphs;
  std::vector<Example> examples;
};

// Loss of one sample given its n x F_out network output. When `grad` is not
// null, scale * d(loss)/d(output) is written into it.
double sample_loss(const Objective& objective, const Matrix& output, const Example& example,
                   Matrix* grad = nullptr, double scale = 1.0);

// Logits under mean-over-nodes readout.
Eigen::RowVectorXd mean_readout(const Matrix& output);

// Supplies the realization used for all samples of the batch that live on
// graph `graph_id`.
using RealizationSource =
    std::function<std::shared_ptr<const ChannelRealization>(std::uint32_t graph_id)>;

struct BatchResult {
  double loss = 0.0;
  std::vector<double> gradient;  // flat, empty unless requested
};

// Mean loss over `batch` (and its gradient). Samples on the same graph share
// one realization; groups are visited in order of first appearance and the
// gradient is reduced in that fixed order.
BatchResult batch_loss_and_gradient(const AirGnnParameters& params, const SupervisedData& data,
                                    std::span<const std::size_t> batch,
                                    const Objective& objective, const RealizationSource& realize,
                                    bool with_gradient);

// Minibatch objective with a single realization applied to
// every sample. All samples must live on the same graph.
double minibatch_objective(const AirGnnParameters& params, const SupervisedData& data,
                           std::span<const std::size_t> batch,
                           const ChannelRealization& realization, const Objective& objective);

// Draws realizations from `model` keyed by (a, graph id).
RealizationSource channel_source(const SupervisedData& data, const Architecture& arch,
                                 const ChannelModel& model, std::uint64_t master, std::uint64_t a);

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

// Monte-Carlo expected loss over the sample set `indices` using M fresh
// realizations.
Estimate estimate_expected_loss(const AirGnnParameters& params, const SupervisedData& data,
                                std::span<const std::size_t> indices, const Objective& objective,
                                const ChannelModel& model, std::size_t draws, std::uint64_t seed);

struct GradientNormEstimate {
  double norm_sq = 0.0;         // ||mean of M gradients||^2
  double bias = 0.0;            // trace(sample covariance) / M
  std::size_t draws = 0;
  double max_sample_norm = 0.0;  // max_m ||g_m||
};

// Squared norm of the average of M full-set stochastic gradients.
GradientNormEstimate estimate_gradient_norm(const AirGnnParameters& params,
                                            const SupervisedData& data,
                                            std::span<const std::size_t> indices,
                                            const Objective& objective, const ChannelModel& model,
                                            std::size_t draws, std::uint64_t seed);

struct TrainRecord {
  std::size_t iteration = 0;
  double loss = 0.0;
  double expected_loss = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

struct TrainConfig {
  Architecture arch;
  Objective objective;
  OptimizerConfig optimizer;
  ChannelModel channel;  // channel seen during training
  std::size_t iterations = 100;
  std::size_t batch_size = 50;
  std::uint64_t seed = 1;
  std::size_t restarts = 1;
  InitScheme init = InitScheme::kUniformFanIn;
  double init_constant = 0.0;
  // Diagnostics; 0 disables.
  std::size_t record_every = 0;
  std::size_t expected_loss_draws = 8;
  std::size_t grad_norm_draws = 0;
  std::size_t validation_draws = 4;
  bool record_wall_time = false;

  void validate() const;
};

// Observer invoked with A_t for t = 0..T (A_0 before the first update).
using ParameterObserver = std::function<void(std::size_t t, const AirGnnParameters&)>;

// Everything needed to continue a run exactly where it stopped.
struct TrainState {
  AirGnnParameters params;
  AdamState adam;
  std::size_t next_iteration = 0;
};

struct TrainResult {
  AirGnnParameters params;
  TrainState final_state;
  std::vector<TrainRecord> records;  // records of the selected restart
  std::size_t best_restart = 0;
  std::vector<double> validation_losses;
};

// Seed of restart r; restart streams are disjoint.
std::uint64_t restart_seed(std::uint64_t master, std::size_t restart);

// Minibatch R_t: `batch_size` distinct draws from `pool` (fewer if the pool
// is smaller), from substream (seed, kBatch, {t}).
std::vector<std::size_t> sample_batch(std::span<const std::size_t> pool, std::size_t batch_size,
                                      std::uint64_t seed, std::size_t t);

// Training procedure: per iteration, sample (h_t, n_t) and R_t, evaluate the
// minibatch objective and step the optimizer. With several restarts the run
// with the lowest validation loss is kept. `resume` continues a single run
// from a saved state; iterations then run t = next_iteration .. + T - 1.
TrainResult train(const TrainConfig& config, const SupervisedData& data,
                  std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> validation_indices = {},
                  const ParameterObserver& observer = {},
                  const TrainState* resume = nullptr);

void save_train_state(const TrainState& state, const std::filesystem::path& path);
TrainState load_train_state(const std::filesystem::path& path);

struct EquivalenceReport {
  bool identical = false;
  std::optional<std::size_t> first_divergence;  // index t of A_t
  double max_abs_difference = 0.0;
  std::size_t iterations = 0;
};

struct EquivalenceOptions {
  // Seed used by the SGD-on-the-expected-objective path; defaults to the
  // training seed.
  std::optional<std::uint64_t> reference_seed;
  // Perturbs one link gain of the realization sampled at this iteration in
  // the reference path.
  std::optional<std::size_t> perturb_iteration;
};

// Runs the training procedure and, through a separate loop, plain SGD on
// randomly sampled objectives (channel batch size 1), and compares the
// parameter traces bit for bit. config.optimizer must be constant-step SGD.
EquivalenceReport sgd_equivalence_trace(const TrainConfig& config, const SupervisedData& data,
                                        std::span<const std::size_t> train_indices,
                                        const EquivalenceOptions& options = {});

// gamma = sqrt(2 (L0 - L*) / (T C_L C_g^2)).
double theoretical_step_size(double initial_loss, double optimal_loss_bound, double lipschitz,
                             double gradient_bound, std::size_t iterations);

// Largest stochastic-gradient norm over `probes` minibatch/channel draws at
// the given parameters.
double probe_gradient_bound(const AirGnnParameters& params, const SupervisedData& data,
                            std::span<const std::size_t> train_indices,
                            const Objective& objective, const ChannelModel& model,
                            std::size_t batch_size, std::size_t probes, std::uint64_t seed);

// Largest absolute Hessian eigenvalue of the expected loss over `indices` at
// `params`: power iteration on central-difference Hessian-vector products of
// the gradient averaged over `draws` fixed channel realizations.
double estimate_smoothness(const AirGnnParameters& params, const SupervisedData& data,
                           std::span<const std::size_t> indices, const Objective& objective,
                           const ChannelModel& model, std::size_t draws, std::size_t iterations,
                           std::uint64_t seed);

std::string records_to_csv(std::span<const TrainRecord> records);

}  // namespace airgnn
