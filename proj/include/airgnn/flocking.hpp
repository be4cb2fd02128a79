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
#include <functional>
#include <vector>

#include "airgnn/channel.hpp"
#include "airgnn/dataset.hpp"
#include "airgnn/graph.hpp"
#include "airgnn/model.hpp"
#include "airgnn/training.hpp"

namespace airgnn {

struct FlockingConfig {
  std::size_t robots = 50;
  std::size_t trajectories = 450;
  std::size_t steps = 100;
  std::size_t train = 400;
  std::size_t validation = 25;
  std::size_t test = 25;
  double dt = 0.01;                 // s
  double max_acceleration = 10.0;   // m/s^2, per component
  double potential_cutoff = 1.0;    // m
  double comm_radius = 1.5;         // m
  double max_initial_speed = 3.0;   // m/s, per component
  double min_distance = 0.1;        // m
  double target_degree = 6.0;
  std::size_t max_attempts = 1000;
  // Divide every communication graph by its spectral radius before it is
  // used as the shift operator. Features only depend on the support.
  bool normalize_shift = false;

  void validate() const;
};

struct SwarmState {
  Matrix positions;   // n x 2
  Matrix velocities;  // n x 2
  std::size_t time = 0;
};

struct FlockStep {
  SwarmState state;
  GraphShiftOperator graph;
  GraphSignal features;  // n x 6
  Matrix action;         // n x 2, expert acceleration
};

struct FlockTrajectory {
  std::vector<FlockStep> steps;
};

// Communication graph of a swarm state as used by the GNN.
GraphShiftOperator communication_graph(const Matrix& positions, const FlockingConfig& config);

// Centralized expert: velocity consensus over all robots plus the gradient of
// the collision potential U(r) = 1/r^2 + log r^2 for r < cutoff. Each
// component is clamped to [-max_acceleration, max_acceleration].
Matrix oracle_controller(const SwarmState& state, double cutoff, double max_acceleration);

// Collision potential and the sum over pairs, used to check the controller.
double collision_potential(double distance, double cutoff);
double total_potential(const Matrix& positions, double cutoff);

// Explicit Euler: r += dt v, then v += dt u (u clamped).
SwarmState swarm_step(const SwarmState& state, const Matrix& actions, double dt,
                      double max_acceleration);

// Per node: [sum (v_i - v_j); sum r_ij / |r_ij|^4; sum r_ij / |r_ij|^2] over
// graph neighbors j, with r_ij = r_i - r_j.
GraphSignal flock_features(const SwarmState& state, const GraphShiftOperator& graph);

double velocity_variance(const Matrix& velocities);
// Time average of the per-step velocity variance.
double velocity_variance_cost(const std::vector<Matrix>& velocities);
double velocity_variance_cost(const FlockTrajectory& trajectory);

// Positions uniform in a disc sized for the target mean degree and
// velocities uniform in [-v, v]^2; resampled until the communication graph is
// connected and robots are at least min_distance apart.
SwarmState sample_initial_state(const FlockingConfig& config, Rng& rng);

FlockTrajectory rollout_oracle(const SwarmState& initial, const FlockingConfig& config);

struct FlockDataset {
  std::vector<FlockTrajectory> trajectories;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Trajectories whose communication graph disconnects during the expert
// rollout are redrawn; more than max_attempts draws for one trajectory is an
// error.
FlockDataset build_flock_dataset(const FlockingConfig& config, std::uint64_t seed);

// Imitation-learning view: one example per (trajectory, step) with its own
// graph; splits follow the trajectory splits.
TaskDataset to_task_dataset(const FlockDataset& flock);

using Controller = std::function<Matrix(const SwarmState& state, const GraphShiftOperator& graph,
                                        const GraphSignal& features, std::size_t step)>;

// Velocities of a closed-loop rollout, one matrix per step (steps entries).
std::vector<Matrix> rollout(const SwarmState& initial, const FlockingConfig& config,
                            const Controller& controller);

// `input_scale` (one factor per feature column, or empty) is applied to the
// features before the forward pass, matching a column-scaled training set.
Controller airgnn_controller(const AirGnnParameters& params, const ChannelModel& model,
                             std::uint64_t seed, std::uint64_t episode,
                             std::vector<double> input_scale = {});

struct CostSummary {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> costs;
};

// Velocity-variance cost of the AirGNN controller over the given initial
// states, with fresh channel draws at every control step.
CostSummary closed_loop_eval(const AirGnnParameters& params, const ChannelModel& model,
                             const std::vector<SwarmState>& initial_states,
                             const FlockingConfig& config, std::uint64_t seed,
                             const std::vector<double>& input_scale = {});

CostSummary summarize_costs(std::vector<double> costs);

}  // namespace airgnn
