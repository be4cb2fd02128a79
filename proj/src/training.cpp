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

#include "airgnn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace airgnn {

std::string_view to_string(LossKind k) {
  return k == LossKind::kCrossEntropyMeanPool ? "cross_entropy" : "mse";
}

LossKind parse_loss(std::string_view name) {
  if (name == "cross_entropy") return LossKind::kCrossEntropyMeanPool;
  if (name == "mse") return LossKind::kMse;
  throw std::invalid_argument("unknown loss: " + std::string(name));
}

void Objective::validate(const Architecture& arch) const {
  if (loss == LossKind::kCrossEntropyMeanPool && readout != Readout::kMeanOverNodes)
    throw std::invalid_argument("cross-entropy uses the mean-over-nodes readout");
  if (loss == LossKind::kMse && readout != Readout::kPerNode)
    throw std::invalid_argument("mse uses the per-node readout");
  if (loss == LossKind::kCrossEntropyMeanPool && arch.output_width() < 2)
    throw std::invalid_argument("cross-entropy needs one output feature per class");
}

Eigen::RowVectorXd mean_readout(const Matrix& output) {
  return output.colwise().mean();
}

double sample_loss(const Objective& objective, const Matrix& output, const Example& example,
                   Matrix* grad, double scale) {
  if (objective.loss == LossKind::kCrossEntropyMeanPool) {
    const auto classes = output.cols();
    if (example.label < 0 || example.label >= classes)
      throw std::invalid_argument("label outside the class range");
    const Eigen::RowVectorXd logits = mean_readout(output);
    const double top = logits.maxCoeff();
    const Eigen::RowVectorXd shifted = (logits.array() - top).exp().matrix();
    const double total = shifted.sum();
    const double loss = std::log(total) + top - logits(example.label);
    if (grad) {
      Eigen::RowVectorXd d = shifted / total;
      d(example.label) -= 1.0;
      d *= scale / static_cast<double>(output.rows());
      grad->resize(output.rows(), classes);
      grad->rowwise() = d;
    }
    return loss;
  }
  if (example.target.rows() != output.rows() || example.target.cols() != output.cols())
    throw std::invalid_argument("regression target shape mismatch");
  const Matrix diff = output - example.target;
  const double count = static_cast<double>(diff.size());
  if (grad) *grad = (2.0 * scale / count) * diff;
  return diff.squaredNorm() / count;
}

namespace {

struct Group {
  std::uint32_t graph;
  std::vector<std::size_t> members;
};

std::vector<Group> group_by_graph(const SupervisedData& data, std::span<const std::size_t> batch) {
  std::vector<Group> groups;
  std::map<std::uint32_t, std::size_t> slot;
  for (std::size_t idx : batch) {
    if (idx >= data.examples.size()) throw std::out_of_range("sample index out of range");
    const auto gid = data.examples[idx].graph;
    auto [it, inserted] = slot.emplace(gid, groups.size());
    if (inserted) groups.push_back({gid, {}});
    groups[it->second].members.push_back(idx);
  }
  return groups;
}

Matrix stack_inputs(const SupervisedData& data, const std::vector<std::size_t>& members,
                    Eigen::Index n) {
  const auto width = data.examples[members.front()].x.cols();
  Matrix x(n * static_cast<Eigen::Index>(members.size()), width);
  for (std::size_t b = 0; b < members.size(); ++b) {
    const auto& ex = data.examples[members[b]].x;
    if (ex.rows() != n || ex.cols() != width) throw std::invalid_argument("sample shape mismatch");
    x.middleRows(static_cast<Eigen::Index>(b) * n, n) = ex;
  }
  return x;
}

// Memoizes one realization per graph so chunked passes over the same graph
// see the same draw.
RealizationSource memoize(RealizationSource source) {
  auto cache = std::make_shared<std::map<std::uint32_t, std::shared_ptr<const ChannelRealization>>>();
  return [source = std::move(source), cache](std::uint32_t gid) {
    auto it = cache->find(gid);
    if (it != cache->end()) return it->second;
    auto r = source(gid);
    cache->emplace(gid, r);
    return r;
  };
}

constexpr std::size_t kChunk = 512;

// Full-set loss/gradient evaluated in chunks; the realization is shared per
// graph across chunks.
BatchResult full_set(const AirGnnParameters& params, const SupervisedData& data,
                     std::span<const std::size_t> indices, const Objective& objective,
                     const RealizationSource& source, bool with_gradient) {
  auto realize = memoize(source);
  BatchResult total;
  if (with_gradient) total.gradient.assign(params.size(), 0.0);
  for (std::size_t start = 0; start < indices.size(); start += kChunk) {
    const auto len = std::min(kChunk, indices.size() - start);
    auto part = batch_loss_and_gradient(params, data, indices.subspan(start, len), objective,
                                        realize, with_gradient);
    const double w = static_cast<double>(len) / static_cast<double>(indices.size());
    total.loss += w * part.loss;
    for (std::size_t i = 0; i < total.gradient.size(); ++i) total.gradient[i] += w * part.gradient[i];
  }
  return total;
}

double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

BatchResult batch_loss_and_gradient(const AirGnnParameters& params, const SupervisedData& data,
                                    std::span<const std::size_t> batch,
                                    const Objective& objective, const RealizationSource& realize,
                                    bool with_gradient) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  BatchResult result;
  if (with_gradient) result.gradient.assign(params.size(), 0.0);
  for (const auto& group : group_by_graph(data, batch)) {
    const auto& graph = data.graphs.at(group.graph);
    const auto n = static_cast<Eigen::Index>(graph.size());
    const Matrix x = stack_inputs(data, group.members, n);
    auto realization = realize(group.graph);
    if (!with_gradient) {
      const Matrix out = forward_output(graph, x, params, *realization);
      for (std::size_t b = 0; b < group.members.size(); ++b) {
        const Matrix block = out.middleRows(static_cast<Eigen::Index>(b) * n, n);
        result.loss += scale * sample_loss(objective, block, data.examples[group.members[b]]);
      }
      continue;
    }
    auto fwd = forward(graph, x, params, std::move(realization));
    Matrix out_grad(fwd.output.rows(), fwd.output.cols());
    Matrix block_grad;
    for (std::size_t b = 0; b < group.members.size(); ++b) {
      const auto offset = static_cast<Eigen::Index>(b) * n;
      const Matrix block = fwd.output.middleRows(offset, n);
      result.loss +=
          scale * sample_loss(objective, block, data.examples[group.members[b]], &block_grad, scale);
      out_grad.middleRows(offset, n) = block_grad;
    }
    const auto flat = backward(graph, fwd.tape, params, out_grad).flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) result.gradient[i] += flat[i];
  }
  return result;
}

double minibatch_objective(const AirGnnParameters& params, const SupervisedData& data,
                           std::span<const std::size_t> batch,
                           const ChannelRealization& realization, const Objective& objective) {
  auto shared = std::make_shared<const ChannelRealization>(realization);
  std::uint32_t graph = 0;
  bool first = true;
  for (std::size_t idx : batch) {
    const auto gid = data.examples.at(idx).graph;
    if (!first && gid != graph)
      throw std::invalid_argument("minibatch_objective expects samples on one graph");
    graph = gid;
    first = false;
  }
  return batch_loss_and_gradient(params, data, batch, objective,
                                 [&](std::uint32_t) { return shared; }, false)
      .loss;
}

RealizationSource channel_source(const SupervisedData& data, const Architecture& arch,
                                 const ChannelModel& model, std::uint64_t master,
                                 std::uint64_t a) {
  return [&data, arch, model, master, a](std::uint32_t gid) {
    return std::make_shared<const ChannelRealization>(
        sample_realization(data.graphs.at(gid), arch, model, {master, a, gid}));
  };
}

Estimate estimate_expected_loss(const AirGnnParameters& params, const SupervisedData& data,
                                std::span<const std::size_t> indices, const Objective& objective,
                                const ChannelModel& model, std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("need at least one channel draw");
  if (indices.empty()) throw std::invalid_argument("empty sample set");
  const auto arch = params.architecture();
  const std::uint64_t master = derive_seed(seed, StreamTag::kEstimate, {0});
  const std::size_t effective = model.ideal ? 1 : draws;
  std::vector<double> values;
  values.reserve(effective);
  for (std::size_t m = 0; m < effective; ++m)
    values.push_back(
        full_set(params, data, indices, objective, channel_source(data, arch, model, master, m), false)
            .loss);
  Estimate e;
  e.samples = draws;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(effective);
  if (effective > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.standard_error = std::sqrt(ss / static_cast<double>(effective - 1) / static_cast<double>(effective));
  }
  return e;
}

GradientNormEstimate estimate_gradient_norm(const AirGnnParameters& params,
                                            const SupervisedData& data,
                                            std::span<const std::size_t> indices,
                                            const Objective& objective, const ChannelModel& model,
                                            std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("need at least one channel draw");
  if (indices.empty()) throw std::invalid_argument("empty sample set");
  const auto arch = params.architecture();
  const std::uint64_t master = derive_seed(seed, StreamTag::kEstimate, {1});
  GradientNormEstimate est;
  est.draws = draws;
  if (model.ideal) {
    // Zero channel variance: every draw yields the same gradient.
    const auto g =
        full_set(params, data, indices, objective, channel_source(data, arch, model, master, 0), true)
            .gradient;
    est.norm_sq = squared_norm(g);
    est.max_sample_norm = std::sqrt(est.norm_sq);
    return est;
  }
  std::vector<std::vector<double>> grads;
  grads.reserve(draws);
  for (std::size_t m = 0; m < draws; ++m) {
    grads.push_back(
        full_set(params, data, indices, objective, channel_source(data, arch, model, master, m), true)
            .gradient);
    est.max_sample_norm = std::max(est.max_sample_norm, std::sqrt(squared_norm(grads.back())));
  }
  std::vector<double> mean(params.size(), 0.0);
  for (const auto& g : grads)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += g[i];
  for (double& v : mean) v /= static_cast<double>(draws);
  est.norm_sq = squared_norm(mean);
  if (draws > 1) {
    double trace = 0.0;
    for (const auto& g : grads)
      for (std::size_t i = 0; i < mean.size(); ++i) trace += (g[i] - mean[i]) * (g[i] - mean[i]);
    trace /= static_cast<double>(draws - 1);
    est.bias = trace / static_cast<double>(draws);
  }
  return est;
}

void TrainConfig::validate() const {
  arch.validate();
  objective.validate(arch);
  optimizer.validate();
  if (!channel.ideal) channel.validate();
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (restarts == 0) throw std::invalid_argument("restarts must be at least 1");
}

std::uint64_t restart_seed(std::uint64_t master, std::size_t restart) {
  return derive_seed(master, StreamTag::kInit, {0x7265737461727473ULL, restart});
}

std::vector<std::size_t> sample_batch(std::span<const std::size_t> pool, std::size_t batch_size,
                                      std::uint64_t seed, std::size_t t) {
  if (pool.empty()) throw std::invalid_argument("empty training pool");
  std::vector<std::size_t> idx(pool.begin(), pool.end());
  const std::size_t take = std::min(batch_size, idx.size());
  Rng rng = Rng::substream(seed, StreamTag::kBatch, {t});
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

TrainResult train(const TrainConfig& config, const SupervisedData& data,
                  std::span<const std::size_t> train_indices,
                  std::span<const std::size_t> validation_indices,
                  const ParameterObserver& observer, const TrainState* resume) {
  config.validate();
  if (train_indices.empty()) throw std::invalid_argument("empty training split");
  if (resume && config.restarts != 1) throw std::invalid_argument("resume supports a single run");
  TrainResult best;
  double best_validation = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < config.restarts; ++r) {
    const std::uint64_t run_seed = restart_seed(config.seed, r);
    AirGnnParameters params;
    std::size_t t0 = 0;
    std::optional<Optimizer> optimizer;
    if (resume) {
      params = resume->params;
      if (!(params.architecture() == config.arch))
        throw std::invalid_argument("resume state architecture differs from config");
      t0 = resume->next_iteration;
      optimizer.emplace(config.optimizer, resume->adam, t0);
    } else {
      Rng init_rng = Rng::substream(run_seed, StreamTag::kInit, {});
      params = init_parameters(config.arch, config.init, init_rng, config.init_constant);
      optimizer.emplace(config.optimizer, params.size());
    }
    std::vector<double> flat = params.flatten();
    std::vector<TrainRecord> records;
    records.reserve(config.iterations);
    if (observer) observer(t0, params);
    const auto clock_start = std::chrono::steady_clock::now();
    for (std::size_t t = t0; t < t0 + config.iterations; ++t) {
      const auto batch = sample_batch(train_indices, config.batch_size, run_seed, t);
      const auto result =
          batch_loss_and_gradient(params, data, batch, config.objective,
                                  channel_source(data, config.arch, config.channel, run_seed, t), true);
      if (!std::isfinite(result.loss))
        throw std::runtime_error("training diverged: non-finite loss at iteration " +
                                 std::to_string(t) + " (restart " + std::to_string(r) + ")");
      TrainRecord rec;
      rec.iteration = t;
      rec.loss = result.loss;
      const bool diagnose = config.record_every > 0 &&
                            ((t - t0) % config.record_every == 0 || t + 1 == t0 + config.iterations);
      if (diagnose && config.expected_loss_draws > 0) {
        rec.expected_loss =
            estimate_expected_loss(params, data, train_indices, config.objective, config.channel,
                                   config.expected_loss_draws,
                                   derive_seed(run_seed, StreamTag::kEstimate, {t}))
                .mean;
      }
      if (diagnose && config.grad_norm_draws > 0) {
        rec.grad_norm_sq =
            estimate_gradient_norm(params, data, train_indices, config.objective, config.channel,
                                   config.grad_norm_draws,
                                   derive_seed(run_seed, StreamTag::kEstimate, {t, 1}))
                .norm_sq;
      }
      optimizer->step(flat, result.gradient);
      params.assign(flat);
      if (!params.all_finite())
        throw std::runtime_error("training diverged: non-finite parameters after iteration " +
                                 std::to_string(t));
      if (config.record_wall_time) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                clock_start)
                          .count();
      }
      records.push_back(rec);
      if (observer) observer(t + 1, params);
    }
    double validation;
    if (!validation_indices.empty()) {
      validation = estimate_expected_loss(params, data, validation_indices, config.objective,
                                          config.channel, config.validation_draws,
                                          derive_seed(run_seed, StreamTag::kEvaluation, {}))
                       .mean;
    } else if (!records.empty()) {
      validation = records.back().loss;
    } else {
      validation = 0.0;
    }
    best.validation_losses.push_back(validation);
    if (r == 0 || validation < best_validation) {
      best_validation = validation;
      best.params = params;
      best.records = std::move(records);
      best.best_restart = r;
      best.final_state = {params, optimizer->adam_state(), t0 + config.iterations};
    }
  }
  return best;
}

EquivalenceReport sgd_equivalence_trace(const TrainConfig& config, const SupervisedData& data,
                                        std::span<const std::size_t> train_indices,
                                        const EquivalenceOptions& options) {
  if (config.optimizer.kind != OptimizerKind::kSgd ||
      config.optimizer.schedule != StepSchedule::kConstant)
    throw std::invalid_argument("equivalence trace compares constant-step SGD");
  TrainConfig single = config;
  single.restarts = 1;
  single.record_every = 0;

  std::vector<std::vector<double>> training_trace;
  train(single, data, train_indices, {},
        [&](std::size_t, const AirGnnParameters& p) { training_trace.push_back(p.flatten()); });

  // Reference path: sample a random objective L(R_t | h_t, n_t), take its
  // gradient, step. Channel batch size 1, data batch size |R_t|.
  const std::uint64_t run_seed = restart_seed(options.reference_seed.value_or(config.seed), 0);
  Rng init_rng = Rng::substream(run_seed, StreamTag::kInit, {});
  AirGnnParameters current = init_parameters(config.arch, config.init, init_rng, config.init_constant);
  std::vector<double> a = current.flatten();
  std::vector<std::vector<double>> sgd_trace{a};
  const double gamma = config.optimizer.step_size;
  for (std::size_t t = 0; t < config.iterations; ++t) {
    const auto batch = sample_batch(train_indices, config.batch_size, run_seed, t);
    std::map<std::uint32_t, std::shared_ptr<const ChannelRealization>> sampled;
    for (std::size_t idx : batch) {
      const auto gid = data.examples.at(idx).graph;
      if (sampled.count(gid)) continue;
      auto r = sample_realization(data.graphs.at(gid), config.arch, config.channel,
                                  {run_seed, t, gid});
      if (options.perturb_iteration && *options.perturb_iteration == t) {
        for (auto& layer : r.layers) {
          if (!layer.hops.empty() && !layer.hops.front().gains.front().empty()) {
            layer.hops.front().gains.front().front() += 1e-3;
            break;
          }
        }
      }
      sampled.emplace(gid, std::make_shared<const ChannelRealization>(std::move(r)));
    }
    const auto sampled_objective = [&](const AirGnnParameters& p) {
      return batch_loss_and_gradient(p, data, batch, config.objective,
                                     [&](std::uint32_t gid) { return sampled.at(gid); }, true);
    };
    const auto g = sampled_objective(current).gradient;
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] - gamma * g[i];
    current.assign(a);
    sgd_trace.push_back(a);
  }

  EquivalenceReport report;
  report.iterations = config.iterations;
  report.identical = training_trace.size() == sgd_trace.size();
  for (std::size_t t = 0; t < std::min(training_trace.size(), sgd_trace.size()); ++t) {
    const auto& x = training_trace[t];
    const auto& y = sgd_trace[t];
    const bool same = x.size() == y.size() &&
                      std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
    if (!same) {
      report.identical = false;
      if (!report.first_divergence) report.first_divergence = t;
      for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
        report.max_abs_difference = std::max(report.max_abs_difference, std::abs(x[i] - y[i]));
    }
  }
  return report;
}

double theoretical_step_size(double initial_loss, double optimal_loss_bound, double lipschitz,
                             double gradient_bound, std::size_t iterations) {
  if (!(initial_loss > optimal_loss_bound))
    throw std::invalid_argument("initial loss must exceed the optimal-loss bound");
  if (!(lipschitz > 0.0) || !(gradient_bound > 0.0) || iterations == 0)
    throw std::invalid_argument("C_L, C_g and T must be positive");
  return std::sqrt(2.0 * (initial_loss - optimal_loss_bound) /
                   (static_cast<double>(iterations) * lipschitz * gradient_bound * gradient_bound));
}

double probe_gradient_bound(const AirGnnParameters& params, const SupervisedData& data,
                            std::span<const std::size_t> train_indices,
                            const Objective& objective, const ChannelModel& model,
                            std::size_t batch_size, std::size_t probes, std::uint64_t seed) {
  const auto arch = params.architecture();
  const std::uint64_t master = derive_seed(seed, StreamTag::kProbe, {});
  double bound = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    const auto batch = sample_batch(train_indices, batch_size, master, p);
    const auto g = batch_loss_and_gradient(params, data, batch, objective,
                                           channel_source(data, arch, model, master, p), true)
                       .gradient;
    bound = std::max(bound, std::sqrt(squared_norm(g)));
  }
  return bound;
}

double estimate_smoothness(const AirGnnParameters& params, const SupervisedData& data,
                           std::span<const std::size_t> indices, const Objective& objective,
                           const ChannelModel& model, std::size_t draws, std::size_t iterations,
                           std::uint64_t seed) {
  if (draws == 0 || iterations == 0) throw std::invalid_argument("need draws and iterations");
  if (indices.empty()) throw std::invalid_argument("empty sample set");
  const auto arch = params.architecture();
  const std::uint64_t master = derive_seed(seed, StreamTag::kProbe, {1});
  const std::size_t used = model.ideal ? 1 : draws;
  AirGnnParameters probe = params;
  const auto gradient_at = [&](const std::vector<double>& a) {
    probe.assign(a);
    std::vector<double> g(a.size(), 0.0);
    for (std::size_t m = 0; m < used; ++m) {
      const auto part =
          full_set(probe, data, indices, objective, channel_source(data, arch, model, master, m), true)
              .gradient;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += part[i] / static_cast<double>(used);
    }
    return g;
  };

  const std::vector<double> base = params.flatten();
  const double eps = 1e-4 * std::max(1.0, std::sqrt(squared_norm(base)));
  Rng rng = Rng::substream(master, StreamTag::kProbe, {2});
  std::vector<double> v(base.size());
  for (double& x : v) x = rng.normal();
  double norm = std::sqrt(squared_norm(v));
  double value = 0.0;
  for (std::size_t it = 0; it < iterations && norm > 0.0; ++it) {
    std::vector<double> plus = base, minus = base;
    for (std::size_t i = 0; i < base.size(); ++i) {
      v[i] /= norm;
      plus[i] += eps * v[i];
      minus[i] -= eps * v[i];
    }
    const auto gp = gradient_at(plus);
    const auto gm = gradient_at(minus);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (gp[i] - gm[i]) / (2.0 * eps);
    norm = std::sqrt(squared_norm(v));
    value = norm;
  }
  return value;
}

namespace {

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::vector<double> hex_array(const nlohmann::json& arr) {
  std::vector<double> out;
  for (const auto& s : arr) out.push_back(std::strtod(s.get<std::string>().c_str(), nullptr));
  return out;
}

}  // namespace

std::string records_to_csv(std::span<const TrainRecord> records) {
  std::string out = "iter,loss,expected_loss,grad_norm_sq,wall_ms\n";
  for (const auto& r : records) {
    out += std::to_string(r.iteration) + ',' + csv_number(r.loss) + ',' +
           csv_number(r.expected_loss) + ',' + csv_number(r.grad_norm_sq) + ',' +
           csv_number(r.wall_ms) + '\n';
  }
  return out;
}

void save_train_state(const TrainState& state, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["next_iteration"] = state.next_iteration;
  doc["adam_steps"] = state.adam.steps;
  auto m = nlohmann::json::array();
  auto v = nlohmann::json::array();
  for (double x : state.adam.m) m.push_back(hex(x));
  for (double x : state.adam.v) v.push_back(hex(x));
  doc["adam_m"] = std::move(m);
  doc["adam_v"] = std::move(v);
  doc["parameters"] = nlohmann::ordered_json::parse(parameters_to_json(state.params));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << doc.dump(1) << '\n';
}

TrainState load_train_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto doc = nlohmann::json::parse(in);
  TrainState state;
  state.next_iteration = doc.at("next_iteration").get<std::size_t>();
  state.adam.steps = doc.at("adam_steps").get<std::size_t>();
  state.adam.m = hex_array(doc.at("adam_m"));
  state.adam.v = hex_array(doc.at("adam_v"));
  state.params = parameters_from_json(doc.at("parameters").dump());
  return state;
}

}  // namespace airgnn
