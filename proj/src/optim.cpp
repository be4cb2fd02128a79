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

#include "airgnn/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace airgnn {

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer: " + std::string(name));
}

std::string_view to_string(StepSchedule s) {
  switch (s) {
    case StepSchedule::kConstant: return "constant";
    case StepSchedule::kInverse: return "inverse";
    case StepSchedule::kInverseSqrt: return "inverse_sqrt";
  }
  return "?";
}

StepSchedule parse_schedule(std::string_view name) {
  if (name == "constant") return StepSchedule::kConstant;
  if (name == "inverse") return StepSchedule::kInverse;
  if (name == "inverse_sqrt") return StepSchedule::kInverseSqrt;
  throw std::invalid_argument("unknown step schedule: " + std::string(name));
}

void OptimizerConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("ADAM betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

double scheduled_step(const OptimizerConfig& config, std::size_t t) {
  const double tt = static_cast<double>(t + 1);
  switch (config.schedule) {
    case StepSchedule::kConstant: return config.step_size;
    case StepSchedule::kInverse: return config.step_size / tt;
    case StepSchedule::kInverseSqrt: return config.step_size / std::sqrt(tt);
  }
  return config.step_size;
}

namespace {

void prepare(AdamState& state, std::size_t n, std::size_t grad_size) {
  if (n != grad_size) throw std::invalid_argument("gradient/parameter size mismatch");
  if (state.m.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  if (state.m.size() != n) throw std::invalid_argument("ADAM state size mismatch");
}

}  // namespace

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               double step, double beta1, double beta2, double epsilon) {
  prepare(state, params.size(), grad.size());
  ++state.steps;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= step * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

void adam_step_vectorized(AdamState& state, std::span<double> params,
                          std::span<const double> grad, double step, double beta1,
                          double beta2, double epsilon) {
  prepare(state, params.size(), grad.size());
  ++state.steps;
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::Map<Eigen::ArrayXd> p(params.data(), n);
  Eigen::Map<const Eigen::ArrayXd> g(grad.data(), n);
  Eigen::Map<Eigen::ArrayXd> m(state.m.data(), n);
  Eigen::Map<Eigen::ArrayXd> v(state.v.data(), n);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.steps));
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v + (1.0 - beta2) * g.square();
  p -= step * (m / c1) / ((v / c2).sqrt() + epsilon);
}

void sgd_step(std::span<double> params, std::span<const double> grad, double step) {
  if (params.size() != grad.size()) throw std::invalid_argument("gradient/parameter size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= step * grad[i];
}

Optimizer::Optimizer(const OptimizerConfig& config, std::size_t parameter_count)
    : config_(config) {
  config_.validate();
  adam_.m.assign(parameter_count, 0.0);
  adam_.v.assign(parameter_count, 0.0);
}

Optimizer::Optimizer(const OptimizerConfig& config, AdamState state, std::size_t iteration)
    : config_(config), adam_(std::move(state)), t_(iteration) {
  config_.validate();
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  const double gamma = scheduled_step(config_, t_);
  if (config_.kind == OptimizerKind::kSgd) {
    sgd_step(params, grad, gamma);
  } else {
    adam_step(adam_, params, grad, gamma, config_.beta1, config_.beta2, config_.epsilon);
  }
  ++t_;
}

}  // namespace airgnn
