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

#include "airgnn/flocking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace airgnn {

void FlockingConfig::validate() const {
  if (robots < 2) throw std::invalid_argument("flocking needs at least two robots");
  if (steps == 0) throw std::invalid_argument("trajectories need at least one step");
  if (train + validation + test != trajectories)
    throw std::invalid_argument("trajectory splits must add up to the trajectory count");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(max_acceleration > 0.0) || !(potential_cutoff > 0.0) || !(comm_radius > 0.0))
    throw std::invalid_argument("flocking limits must be positive");
  if (!(target_degree > 0.0)) throw std::invalid_argument("target degree must be positive");
}

GraphShiftOperator communication_graph(const Matrix& positions, const FlockingConfig& config) {
  auto graph = generate_geometric(positions, config.comm_radius);
  if (!config.normalize_shift || graph.nnz() == 0) return graph;
  double radius = 0.0;
  try {
    radius = spectral_radius(graph).value;
  } catch (const std::runtime_error&) {
    // A split swarm can have components with almost equal leading
    // eigenvalues, which stalls power iteration. Swarms are small; solve densely.
    const Eigen::MatrixXd dense = graph.to_dense();
    radius = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense, Eigen::EigenvaluesOnly)
                 .eigenvalues()
                 .cwiseAbs()
                 .maxCoeff();
  }
  return graph.scaled(1.0 / radius);
}

double collision_potential(double distance, double cutoff) {
  const double r = std::min(distance, cutoff);
  return 1.0 / (r * r) + std::log(r * r);
}

double total_potential(const Matrix& positions, double cutoff) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < positions.rows(); ++i)
    for (Eigen::Index j = i + 1; j < positions.rows(); ++j)
      total += collision_potential((positions.row(i) - positions.row(j)).norm(), cutoff);
  return total;
}

Matrix oracle_controller(const SwarmState& state, double cutoff, double max_acceleration) {
  const auto n = state.positions.rows();
  Matrix u = Matrix::Zero(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      u.row(i) -= state.velocities.row(i) - state.velocities.row(j);
      const Eigen::RowVector2d rij = state.positions.row(i) - state.positions.row(j);
      const double r = rij.norm();
      if (r == 0.0)
        throw std::invalid_argument("coincident robots " + std::to_string(i) + " and " +
                                    std::to_string(j));
      if (r < cutoff) {
        // dU/dr = -2/r^3 + 2/r; -grad_{r_i} U = -(dU/dr) rij / r.
        const double dudr = -2.0 / (r * r * r) + 2.0 / r;
        u.row(i) -= (dudr / r) * rij;
      }
    }
  }
  return u.cwiseMax(-max_acceleration).cwiseMin(max_acceleration);
}

SwarmState swarm_step(const SwarmState& state, const Matrix& actions, double dt,
                      double max_acceleration) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (actions.rows() != state.velocities.rows() || actions.cols() != 2)
    throw std::invalid_argument("action shape mismatch");
  if (!actions.allFinite()) throw std::invalid_argument("non-finite action");
  const Matrix u = actions.cwiseMax(-max_acceleration).cwiseMin(max_acceleration);
  SwarmState next;
  next.positions = state.positions + dt * state.velocities;
  next.velocities = state.velocities + dt * u;
  next.time = state.time + 1;
  return next;
}

GraphSignal flock_features(const SwarmState& state, const GraphShiftOperator& graph) {
  const auto n = state.positions.rows();
  if (static_cast<std::size_t>(n) != graph.size()) throw std::invalid_argument("graph size mismatch");
  GraphSignal x = GraphSignal::Zero(n, 6);
  for (const auto& e : graph.entries()) {
    if (e.row == e.col) continue;
    const Eigen::RowVector2d dv = state.velocities.row(e.row) - state.velocities.row(e.col);
    const Eigen::RowVector2d rij = state.positions.row(e.row) - state.positions.row(e.col);
    const double d2 = rij.squaredNorm();
    if (d2 == 0.0) throw std::invalid_argument("neighbor at zero distance");
    x.block<1, 2>(e.row, 0) += dv;
    x.block<1, 2>(e.row, 2) += rij / (d2 * d2);
    x.block<1, 2>(e.row, 4) += rij / d2;
  }
  return x;
}

double velocity_variance(const Matrix& velocities) {
  const Eigen::RowVectorXd mean = velocities.colwise().mean();
  return (velocities.rowwise() - mean).rowwise().squaredNorm().mean();
}

double velocity_variance_cost(const std::vector<Matrix>& velocities) {
  if (velocities.empty()) return 0.0;
  double total = 0.0;
  for (const auto& v : velocities) total += velocity_variance(v);
  return total / static_cast<double>(velocities.size());
}

double velocity_variance_cost(const FlockTrajectory& trajectory) {
  std::vector<Matrix> v;
  v.reserve(trajectory.steps.size());
  for (const auto& s : trajectory.steps) v.push_back(s.state.velocities);
  return velocity_variance_cost(v);
}

namespace {

std::optional<SwarmState> try_initial_state(const FlockingConfig& config, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(config.robots);
  const double radius =
      config.comm_radius * std::sqrt(static_cast<double>(config.robots - 1) / config.target_degree);
  SwarmState s;
  s.positions.resize(n, 2);
  s.velocities.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rho = radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    s.positions(i, 0) = rho * std::cos(theta);
    s.positions(i, 1) = rho * std::sin(theta);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index d = 0; d < 2; ++d)
      s.velocities(i, d) = rng.uniform(-config.max_initial_speed, config.max_initial_speed);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if ((s.positions.row(i) - s.positions.row(j)).norm() < config.min_distance) return std::nullopt;
  if (!generate_geometric(s.positions, config.comm_radius).is_connected()) return std::nullopt;
  return s;
}

}  // namespace

SwarmState sample_initial_state(const FlockingConfig& config, Rng& rng) {
  for (std::size_t attempt = 0; attempt < config.max_attempts; ++attempt)
    if (auto s = try_initial_state(config, rng)) return *s;
  throw std::runtime_error("no connected initial configuration after " +
                           std::to_string(config.max_attempts) + " attempts");
}

FlockTrajectory rollout_oracle(const SwarmState& initial, const FlockingConfig& config) {
  FlockTrajectory traj;
  traj.steps.reserve(config.steps);
  SwarmState state = initial;
  for (std::size_t t = 0; t < config.steps; ++t) {
    FlockStep step;
    step.graph = communication_graph(state.positions, config);
    step.features = flock_features(state, step.graph);
    step.action = oracle_controller(state, config.potential_cutoff, config.max_acceleration);
    step.state = state;
    state = swarm_step(state, step.action, config.dt, config.max_acceleration);
    traj.steps.push_back(std::move(step));
  }
  return traj;
}

FlockDataset build_flock_dataset(const FlockingConfig& config, std::uint64_t seed) {
  config.validate();
  FlockDataset ds;
  ds.trajectories.reserve(config.trajectories);
  for (std::size_t i = 0; i < config.trajectories; ++i) {
    Rng rng = Rng::substream(seed, StreamTag::kDataset, {i});
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < config.max_attempts && !accepted; ++attempt) {
      auto initial = try_initial_state(config, rng);
      if (!initial) continue;
      auto traj = rollout_oracle(*initial, config);
      accepted = std::all_of(traj.steps.begin(), traj.steps.end(),
                             [](const FlockStep& s) { return s.graph.is_connected(); });
      if (accepted) ds.trajectories.push_back(std::move(traj));
    }
    if (!accepted)
      throw std::runtime_error("trajectory " + std::to_string(i) + ": no connected rollout after " +
                               std::to_string(config.max_attempts) + " attempts");
  }
  for (std::size_t i = 0; i < config.trajectories; ++i) {
    if (i < config.train) {
      ds.train.push_back(i);
    } else if (i < config.train + config.validation) {
      ds.validation.push_back(i);
    } else {
      ds.test.push_back(i);
    }
  }
  return ds;
}

TaskDataset to_task_dataset(const FlockDataset& flock) {
  TaskDataset ds;
  ds.task = "flocking";
  std::vector<std::vector<std::size_t>> per_trajectory(flock.trajectories.size());
  for (std::size_t i = 0; i < flock.trajectories.size(); ++i) {
    for (const auto& step : flock.trajectories[i].steps) {
      Example ex;
      ex.graph = static_cast<std::uint32_t>(ds.data.graphs.size());
      ex.x = step.features;
      ex.target = step.action;
      ds.data.graphs.push_back(step.graph);
      per_trajectory[i].push_back(ds.data.examples.size());
      ds.data.examples.push_back(std::move(ex));
    }
  }
  const auto collect = [&](const std::vector<std::size_t>& trajs, std::vector<std::size_t>& out) {
    for (std::size_t t : trajs) out.insert(out.end(), per_trajectory[t].begin(), per_trajectory[t].end());
  };
  collect(flock.train, ds.train);
  collect(flock.validation, ds.validation);
  collect(flock.test, ds.test);
  for (std::size_t t : flock.test) {
    ds.test_positions.push_back(flock.trajectories[t].steps.front().state.positions);
    ds.test_velocities.push_back(flock.trajectories[t].steps.front().state.velocities);
  }
  ds.reference_power = ds.train.empty() ? 1.0 : mean_square_input(ds.data, ds.train);
  return ds;
}

std::vector<Matrix> rollout(const SwarmState& initial, const FlockingConfig& config,
                            const Controller& controller) {
  std::vector<Matrix> velocities;
  velocities.reserve(config.steps);
  SwarmState state = initial;
  for (std::size_t t = 0; t < config.steps; ++t) {
    const auto graph = communication_graph(state.positions, config);
    const auto features = flock_features(state, graph);
    const Matrix u = controller(state, graph, features, t);
    velocities.push_back(state.velocities);
    state = swarm_step(state, u, config.dt, config.max_acceleration);
  }
  return velocities;
}

Controller airgnn_controller(const AirGnnParameters& params, const ChannelModel& model,
                             std::uint64_t seed, std::uint64_t episode,
                             std::vector<double> input_scale) {
  const std::uint64_t master = derive_seed(seed, StreamTag::kRollout, {episode});
  if (!input_scale.empty() && input_scale.size() != params.architecture().input_width())
    throw std::invalid_argument("input scale width does not match the network input");
  return [params, model, master, arch = params.architecture(), scale = std::move(input_scale)](
             const SwarmState&, const GraphShiftOperator& graph, const GraphSignal& features,
             std::size_t step) -> Matrix {
    const auto realization = sample_realization(graph, arch, model, {master, step, 0});
    if (scale.empty()) return forward_output(graph, features, params, realization);
    const Eigen::Map<const Eigen::RowVectorXd> row(scale.data(), static_cast<Eigen::Index>(scale.size()));
    const GraphSignal scaled = features.array().rowwise() * row.array();
    return forward_output(graph, scaled, params, realization);
  };
}

CostSummary summarize_costs(std::vector<double> costs) {
  CostSummary s;
  s.costs = std::move(costs);
  if (s.costs.empty()) return s;
  double sum = 0.0;
  for (double c : s.costs) sum += c;
  s.mean = sum / static_cast<double>(s.costs.size());
  if (s.costs.size() > 1) {
    double ss = 0.0;
    for (double c : s.costs) ss += (c - s.mean) * (c - s.mean);
    const double k = static_cast<double>(s.costs.size());
    s.standard_error = std::sqrt(ss / (k - 1.0) / k);
  }
  return s;
}

CostSummary closed_loop_eval(const AirGnnParameters& params, const ChannelModel& model,
                             const std::vector<SwarmState>& initial_states,
                             const FlockingConfig& config, std::uint64_t seed,
                             const std::vector<double>& input_scale) {
  std::vector<double> costs;
  costs.reserve(initial_states.size());
  for (std::size_t e = 0; e < initial_states.size(); ++e)
    costs.push_back(velocity_variance_cost(
        rollout(initial_states[e], config, airgnn_controller(params, model, seed, e, input_scale))));
  return summarize_costs(std::move(costs));
}

}  // namespace airgnn
