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

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace airgnn {

enum class OptimizerKind { kSgd, kAdam };
// gamma_t = gamma_0, gamma_0 / (t + 1) or gamma_0 / sqrt(t + 1), t counted from 0.
enum class StepSchedule { kConstant, kInverse, kInverseSqrt };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);
std::string_view to_string(StepSchedule s);
StepSchedule parse_schedule(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  StepSchedule schedule = StepSchedule::kConstant;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

double scheduled_step(const OptimizerConfig& config, std::size_t t);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t steps = 0;
};

// Bias-corrected ADAM update, element by element.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               double step, double beta1, double beta2, double epsilon);
// Same recurrences written with Eigen array expressions.
void adam_step_vectorized(AdamState& state, std::span<double> params,
                          std::span<const double> grad, double step, double beta1,
                          double beta2, double epsilon);

// params -= step * grad.
void sgd_step(std::span<double> params, std::span<const double> grad, double step);

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, std::size_t parameter_count);
  Optimizer(const OptimizerConfig& config, AdamState state, std::size_t iteration);

  // Applies one update and advances the iteration counter.
  void step(std::span<double> params, std::span<const double> grad);
  std::size_t iteration() const { return t_; }
  const OptimizerConfig& config() const { return config_; }
  const AdamState& adam_state() const { return adam_; }

 private:
  OptimizerConfig config_;
  AdamState adam_;
  std::size_t t_ = 0;
};

}  // namespace airgnn
