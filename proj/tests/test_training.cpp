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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "airgnn/optim.hpp"
#include "airgnn/training.hpp"
#include "oracles.hpp"

using namespace airgnn;

namespace {

// Small classification set: `count` random signals on one random graph.
SupervisedData toy_data(std::uint64_t seed, std::size_t n, std::size_t count, int classes) {
  Rng rng(seed);
  SupervisedData data;
  data.graphs.push_back(oracle::random_graph(rng, n, 0.5));
  for (std::size_t i = 0; i < count; ++i) {
    Example ex;
    ex.x = oracle::random_matrix(rng, static_cast<Eigen::Index>(n), 1);
    ex.label = static_cast<int>(i % static_cast<std::size_t>(classes));
    data.examples.push_back(ex);
  }
  return data;
}

std::vector<std::size_t> iota_indices(std::size_t count) {
  std::vector<std::size_t> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = i;
  return v;
}

Architecture toy_arch(std::size_t classes) {
  return Architecture{{LayerShape{1, 4, 2, Activation::kTanh}, LayerShape{4, classes, 0, Activation::kIdentity}}};
}

TrainConfig sgd_config(std::size_t classes, std::size_t iterations) {
  TrainConfig c;
  c.arch = toy_arch(classes);
  c.optimizer.kind = OptimizerKind::kSgd;
  c.optimizer.step_size = 0.05;
  c.iterations = iterations;
  c.batch_size = 4;
  c.seed = 21;
  c.channel.snr_db = 20;
  return c;
}

}  // namespace

TEST(SampleLoss, MseZeroAtTarget) {
  Example ex;
  ex.target = (Matrix(2, 2) << 1, 2, 3, 4).finished();
  const Objective obj{LossKind::kMse, Readout::kPerNode};
  Matrix grad;
  EXPECT_EQ(sample_loss(obj, ex.target, ex, &grad), 0.0);
  EXPECT_EQ(grad, Matrix::Zero(2, 2));
}

TEST(SampleLoss, UniformLogitsGiveLogClasses) {
  Example ex;
  ex.label = 3;
  EXPECT_NEAR(sample_loss(Objective{}, Matrix::Constant(5, 10, 0.7), ex), std::log(10.0), 1e-12);
  EXPECT_THROW(sample_loss(Objective{}, Matrix::Zero(5, 3), ex), std::invalid_argument);
}

TEST(SampleLoss, CrossEntropyGradientMatchesFiniteDifference) {
  Rng rng(1);
  Example ex;
  ex.label = 2;
  const Matrix out = oracle::random_matrix(rng, 4, 5);
  Matrix grad;
  sample_loss(Objective{}, out, ex, &grad);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    Matrix up = out, down = out;
    up.data()[i] += 1e-6;
    down.data()[i] -= 1e-6;
    const double fd = (sample_loss(Objective{}, up, ex) - sample_loss(Objective{}, down, ex)) / 2e-6;
    EXPECT_NEAR(grad.data()[i], fd, 1e-8);
  }
}

TEST(BatchLoss, AveragesSingleSampleLosses) {
  const auto data = toy_data(2, 6, 2, 3);
  Rng rng(2);
  const auto arch = toy_arch(3);
  const auto params = init_parameters(arch, InitScheme::kUniformFanIn, rng);
  const auto real = sample_realization(data.graphs[0], arch, ChannelModel{}, {2, 0, 0});
  const std::vector<std::size_t> both{0, 1}, first{0}, second{1};
  const double pair = minibatch_objective(params, data, both, real, Objective{});
  const double avg = 0.5 * (minibatch_objective(params, data, first, real, Objective{}) +
                            minibatch_objective(params, data, second, real, Objective{}));
  EXPECT_NEAR(pair, avg, 1e-12);
}

TEST(BatchLoss, GradientMatchesFiniteDifference) {
  const auto data = toy_data(3, 5, 6, 3);
  Rng rng(3);
  const auto arch = toy_arch(3);
  const auto params = init_parameters(arch, InitScheme::kUniformFanIn, rng);
  const auto idx = iota_indices(6);
  const auto source = channel_source(data, arch, ChannelModel{}, 3, 0);
  const auto res = batch_loss_and_gradient(params, data, idx, Objective{}, source, true);
  auto flat = params.flatten();
  AirGnnParameters probe = params;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + 1e-6;
    probe.assign(flat);
    const double up = batch_loss_and_gradient(probe, data, idx, Objective{}, source, false).loss;
    flat[i] = keep - 1e-6;
    probe.assign(flat);
    const double down = batch_loss_and_gradient(probe, data, idx, Objective{}, source, false).loss;
    flat[i] = keep;
    const double fd = (up - down) / 2e-6;
    EXPECT_LE(std::abs(res.gradient[i] - fd) / std::max(1e-8, std::abs(fd)), 1e-5) << i;
  }
}

TEST(SampleBatch, DistinctAndDeterministic) {
  const auto pool = iota_indices(30);
  const auto a = sample_batch(pool, 10, 5, 0);
  EXPECT_EQ(a, sample_batch(pool, 10, 5, 0));
  EXPECT_NE(a, sample_batch(pool, 10, 5, 1));
  std::set<std::size_t> unique(a.begin(), a.end());
  EXPECT_EQ(unique.size(), 10u);
  EXPECT_EQ(sample_batch(pool, 50, 5, 0).size(), 30u);
}

TEST(Train, ZeroIterationsKeepsInitialParameters) {
  const auto data = toy_data(4, 5, 8, 2);
  auto cfg = sgd_config(2, 0);
  AirGnnParameters initial;
  const auto result = train(cfg, data, iota_indices(8), {}, [&](std::size_t t, const AirGnnParameters& p) {
    if (t == 0) initial = p;
  });
  EXPECT_EQ(result.params, initial);
  EXPECT_TRUE(result.records.empty());
}

TEST(Train, OneSgdStepMatchesFiniteDifference) {
  // Two-node graph, both samples in the batch; the realization of t = 0 is
  // reproduced from the documented stream key.
  SupervisedData data;
  data.graphs.push_back(GraphShiftOperator::from_entries(2, {{0, 1, 1.0}, {1, 0, 1.0}}));
  for (int c = 0; c < 2; ++c) {
    Example ex;
    ex.x = (Matrix(2, 1) << 1.0 - c, 0.5 + c).finished();
    ex.label = c;
    data.examples.push_back(ex);
  }
  TrainConfig cfg;
  cfg.arch = Architecture{{LayerShape{1, 2, 1, Activation::kIdentity}}};
  cfg.optimizer.kind = OptimizerKind::kSgd;
  cfg.optimizer.step_size = 0.1;
  cfg.iterations = 1;
  cfg.batch_size = 2;
  cfg.seed = 33;
  std::vector<AirGnnParameters> trace;
  const auto pool = iota_indices(2);
  train(cfg, data, pool, {}, [&](std::size_t, const AirGnnParameters& p) { trace.push_back(p); });
  ASSERT_EQ(trace.size(), 2u);
  const auto real = sample_realization(data.graphs[0], cfg.arch, cfg.channel, {restart_seed(33, 0), 0, 0});
  auto flat = trace[0].flatten();
  const auto next = trace[1].flatten();
  AirGnnParameters probe = trace[0];
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + 1e-6;
    probe.assign(flat);
    const double up = minibatch_objective(probe, data, pool, real, Objective{});
    flat[i] = keep - 1e-6;
    probe.assign(flat);
    const double down = minibatch_objective(probe, data, pool, real, Objective{});
    flat[i] = keep;
    const double expected = keep - 0.1 * (up - down) / 2e-6;
    EXPECT_LE(std::abs(next[i] - expected), 1e-5 * std::max(1.0, std::abs(expected))) << i;
  }
}

TEST(Train, DeterministicRecords) {
  const auto data = toy_data(5, 6, 20, 2);
  auto cfg = sgd_config(2, 15);
  cfg.record_every = 5;
  cfg.expected_loss_draws = 2;
  const auto a = train(cfg, data, iota_indices(16), iota_indices(20));
  const auto b = train(cfg, data, iota_indices(16), iota_indices(20));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].loss, b.records[i].loss);
    EXPECT_EQ(std::isnan(a.records[i].expected_loss), std::isnan(b.records[i].expected_loss));
  }
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(records_to_csv(a.records), records_to_csv(b.records));
}

TEST(Train, ResumeReproducesContinuation) {
  const auto data = toy_data(6, 6, 20, 2);
  auto cfg = sgd_config(2, 12);
  cfg.optimizer.kind = OptimizerKind::kAdam;
  const auto full = train(cfg, data, iota_indices(20));
  cfg.iterations = 5;
  const auto head = train(cfg, data, iota_indices(20));
  cfg.iterations = 7;
  const auto tail = train(cfg, data, iota_indices(20), {}, {}, &head.final_state);
  EXPECT_EQ(tail.params, full.params);
}

TEST(Train, RestartsKeepLowestValidationLoss) {
  const auto data = toy_data(7, 6, 24, 2);
  auto cfg = sgd_config(2, 10);
  cfg.restarts = 3;
  const auto res = train(cfg, data, iota_indices(16), std::vector<std::size_t>{16, 17, 18, 19, 20, 21, 22, 23});
  ASSERT_EQ(res.validation_losses.size(), 3u);
  const auto best = std::min_element(res.validation_losses.begin(), res.validation_losses.end()) -
                    res.validation_losses.begin();
  EXPECT_EQ(res.best_restart, static_cast<std::size_t>(best));
}

TEST(Train, DescendsOnSeparableToy) {
  auto data = toy_data(8, 6, 40, 2);
  for (auto& ex : data.examples) ex.x = Matrix::Constant(6, 1, ex.label == 0 ? 1.0 : -1.0);
  TrainConfig cfg = sgd_config(2, 200);
  cfg.optimizer.kind = OptimizerKind::kAdam;
  cfg.optimizer.step_size = 0.01;
  cfg.channel.snr_db = 30;
  const auto idx = iota_indices(40);
  Rng rng(8);
  AirGnnParameters initial;
  const auto res = train(cfg, data, idx, {}, [&](std::size_t t, const AirGnnParameters& p) {
    if (t == 0) initial = p;
  });
  const auto before = estimate_expected_loss(initial, data, idx, Objective{}, cfg.channel, 8, 1);
  const auto after = estimate_expected_loss(res.params, data, idx, Objective{}, cfg.channel, 8, 1);
  EXPECT_LT(after.mean, 0.5 * before.mean);
}

TEST(Equivalence, TracesIdentical) {
  const auto data = toy_data(9, 5, 20, 2);
  const auto report = sgd_equivalence_trace(sgd_config(2, 10), data, iota_indices(20));
  EXPECT_TRUE(report.identical);
  EXPECT_FALSE(report.first_divergence.has_value());
  EXPECT_EQ(report.max_abs_difference, 0.0);
  EXPECT_EQ(report.iterations, 10u);
}

TEST(Equivalence, PerturbationFlagsFirstDivergence) {
  const auto data = toy_data(9, 5, 20, 2);
  EquivalenceOptions opt;
  opt.perturb_iteration = 4;
  const auto report = sgd_equivalence_trace(sgd_config(2, 10), data, iota_indices(20), opt);
  EXPECT_FALSE(report.identical);
  ASSERT_TRUE(report.first_divergence.has_value());
  EXPECT_EQ(*report.first_divergence, 5u);  // A_5 is the first iterate using the perturbed draw
}

TEST(Equivalence, DifferentSeedDivergesImmediately) {
  const auto data = toy_data(9, 5, 20, 2);
  EquivalenceOptions opt;
  opt.reference_seed = 99;
  const auto report = sgd_equivalence_trace(sgd_config(2, 10), data, iota_indices(20), opt);
  ASSERT_TRUE(report.first_divergence.has_value());
  EXPECT_EQ(*report.first_divergence, 0u);
}

TEST(ExpectedLoss, IdealChannelIsDeterministic) {
  const auto data = toy_data(10, 5, 10, 2);
  Rng rng(10);
  const auto params = init_parameters(toy_arch(2), InitScheme::kUniformFanIn, rng);
  const auto idx = iota_indices(10);
  const auto est = estimate_expected_loss(params, data, idx, Objective{}, ChannelModel::ideal_channel(), 50, 1);
  const auto ideal = ideal_realization(data.graphs[0], toy_arch(2));
  EXPECT_EQ(est.standard_error, 0.0);
  EXPECT_NEAR(est.mean, minibatch_objective(params, data, idx, ideal, Objective{}), 1e-12);
}

TEST(ExpectedLoss, SingleDrawEqualsOneObjective) {
  const auto data = toy_data(11, 5, 10, 2);
  Rng rng(11);
  const auto arch = toy_arch(2);
  const auto params = init_parameters(arch, InitScheme::kUniformFanIn, rng);
  const auto idx = iota_indices(10);
  const auto est = estimate_expected_loss(params, data, idx, Objective{}, ChannelModel{}, 1, 77);
  const auto real = sample_realization(data.graphs[0], arch, ChannelModel{},
                                       {derive_seed(77, StreamTag::kEstimate, {0}), 0, 0});
  EXPECT_NEAR(est.mean, minibatch_objective(params, data, idx, real, Objective{}), 1e-12);
}

TEST(ExpectedLoss, MonteCarloSelfConsistent) {
  const auto data = toy_data(12, 4, 4, 2);
  Rng rng(12);
  const auto params = init_parameters(toy_arch(2), InitScheme::kUniformFanIn, rng);
  const auto idx = iota_indices(4);
  ChannelModel m;
  m.snr_db = 10;
  const auto small = estimate_expected_loss(params, data, idx, Objective{}, m, 10000, 1);
  const auto large = estimate_expected_loss(params, data, idx, Objective{}, m, 100000, 2);
  const double se = std::hypot(small.standard_error, large.standard_error);
  EXPECT_GT(se, 0.0);
  EXPECT_LE(std::abs(small.mean - large.mean), 3 * se);
}

TEST(GradientNorm, ZeroInstanceIsZero) {
  SupervisedData data;
  data.graphs.push_back(GraphShiftOperator::from_entries(3, {{0, 1, 1.0}, {1, 0, 1.0}}));
  Example ex;
  ex.x = Matrix::Zero(3, 1);
  ex.target = Matrix::Zero(3, 1);
  data.examples = {ex, ex};
  const Architecture arch{{LayerShape{1, 1, 2, Activation::kIdentity}}};
  ChannelModel m;
  m.snr_db = 300;  // noise small enough that the check stays exact
  const auto est = estimate_gradient_norm(AirGnnParameters::zeros(arch), data, iota_indices(2),
                                          Objective{LossKind::kMse, Readout::kPerNode}, m, 4, 1);
  EXPECT_EQ(est.norm_sq, 0.0);
}

TEST(GradientNorm, IdealChannelMatchesDeterministicGradient) {
  const auto data = toy_data(13, 5, 8, 2);
  Rng rng(13);
  const auto arch = toy_arch(2);
  const auto params = init_parameters(arch, InitScheme::kUniformFanIn, rng);
  const auto idx = iota_indices(8);
  const auto ideal = std::make_shared<const ChannelRealization>(ideal_realization(data.graphs[0], arch));
  const auto g = batch_loss_and_gradient(params, data, idx, Objective{}, [&](std::uint32_t) { return ideal; }, true);
  double expected = 0;
  for (double v : g.gradient) expected += v * v;
  for (std::size_t m : {1u, 7u}) {
    const auto est = estimate_gradient_norm(params, data, idx, Objective{}, ChannelModel::ideal_channel(), m, 3);
    EXPECT_NEAR(est.norm_sq, expected, 1e-14 * std::max(1.0, expected));
    EXPECT_EQ(est.bias, 0.0);
  }
}

TEST(GradientNorm, BiasShrinksAsPredicted) {
  // E ||mean of M gradients||^2 = ||g||^2 + tr(Sigma) / M. The gap between M =
  // 256 and M = 4096 is therefore about tr(Sigma)(1/256 - 1/4096), with
  // sampling fluctuation of order 2 ||g|| sqrt(tr(Sigma) / M).
  const auto data = toy_data(14, 4, 4, 2);
  Rng rng(14);
  const auto params = init_parameters(toy_arch(2), InitScheme::kUniformFanIn, rng);
  const auto idx = iota_indices(4);
  ChannelModel m;
  m.snr_db = 5;
  const auto coarse = estimate_gradient_norm(params, data, idx, Objective{}, m, 256, 1);
  const auto fine = estimate_gradient_norm(params, data, idx, Objective{}, m, 4096, 2);
  const double trace_cov = fine.bias * 4096;
  EXPECT_NEAR(coarse.bias * 256, trace_cov, 0.3 * trace_cov);
  const double predicted_gap = trace_cov * (1.0 / 256 - 1.0 / 4096);
  const double fluctuation = 3 * 2 * std::sqrt(fine.norm_sq * trace_cov / 256);
  EXPECT_LE(std::abs(coarse.norm_sq - fine.norm_sq - predicted_gap), fluctuation + predicted_gap);
  EXPECT_GT(coarse.norm_sq - coarse.bias, 0.0);
}

TEST(StepSize, DirectSubstitution) {
  EXPECT_NEAR(theoretical_step_size(1.0, 0.0, 1.0, 1.0, 100), std::sqrt(2.0 / 100.0), 1e-15);
  EXPECT_NEAR(theoretical_step_size(3.0, 1.0, 2.0, 0.5, 400) / theoretical_step_size(3.0, 1.0, 2.0, 0.5, 1600),
              2.0, 1e-12);
  EXPECT_THROW(theoretical_step_size(1.0, 1.0, 1.0, 1.0, 100), std::invalid_argument);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  AdamState s;
  std::vector<double> p{1.0, -2.0};
  const std::vector<double> g1{0.5, 0.5}, zero{0.0, 0.0};
  adam_step(s, p, g1, 0.1, 0.9, 0.999, 1e-8);
  const auto m = s.m, v = s.v;
  AdamState s2;
  std::vector<double> q{1.0, -2.0};
  adam_step(s2, q, zero, 0.1, 0.9, 0.999, 1e-8);
  EXPECT_EQ(q, (std::vector<double>{1.0, -2.0}));
  // Moments decay geometrically under zero gradient.
  adam_step(s, p, zero, 0.1, 0.9, 0.999, 1e-8);
  EXPECT_DOUBLE_EQ(s.m[0], 0.9 * m[0]);
  EXPECT_DOUBLE_EQ(s.v[0], 0.999 * v[0]);
}

TEST(Adam, HandComputedSteps) {
  AdamState s;
  std::vector<double> p{0.0};
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  adam_step(s, p, std::vector<double>{2.0}, lr, b1, b2, eps);
  // m = 0.2, v = 0.004; m_hat = 2, v_hat = 4.
  EXPECT_NEAR(p[0], -lr * 2.0 / (2.0 + eps), 1e-16);
  adam_step(s, p, std::vector<double>{-1.0}, lr, b1, b2, eps);
  const double m = 0.9 * 0.2 - 0.1, v = 0.999 * 0.004 + 0.001;
  const double mh = m / (1 - b1 * b1), vh = v / (1 - b2 * b2);
  EXPECT_NEAR(p[0], -lr * 2.0 / (2.0 + eps) - lr * mh / (std::sqrt(vh) + eps), 1e-15);
}

TEST(Adam, LoopAndVectorizedAgree) {
  Rng rng(15);
  AdamState a, b;
  std::vector<double> p(50), q;
  for (auto& x : p) x = rng.normal();
  q = p;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> g(50);
    for (auto& x : g) x = rng.normal();
    adam_step(a, p, g, 1e-3, 0.9, 0.999, 1e-8);
    adam_step_vectorized(b, q, g, 1e-3, 0.9, 0.999, 1e-8);
  }
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-14);
}

TEST(Optimizer, SchedulesAndSgd) {
  OptimizerConfig c;
  c.step_size = 0.4;
  c.schedule = StepSchedule::kInverse;
  EXPECT_DOUBLE_EQ(scheduled_step(c, 3), 0.1);
  c.schedule = StepSchedule::kInverseSqrt;
  EXPECT_DOUBLE_EQ(scheduled_step(c, 3), 0.2);
  std::vector<double> p{1.0, 1.0};
  sgd_step(p, std::vector<double>{1.0, -2.0}, 0.5);
  EXPECT_EQ(p, (std::vector<double>{0.5, 2.0}));
  c.step_size = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Smoothness, MatchesDenseHessianOfQuadraticLoss) {
  // Linear filter + mse on the ideal channel: the loss is quadratic, so the
  // Hessian from second differences of the loss is exact.
  Rng rng(41);
  SupervisedData data;
  data.graphs.push_back(oracle::random_graph(rng, 6, 0.5));
  for (int i = 0; i < 12; ++i) {
    Example ex;
    ex.x = oracle::random_matrix(rng, 6, 2);
    ex.target = oracle::random_matrix(rng, 6, 1);
    data.examples.push_back(ex);
  }
  const Architecture arch{{LayerShape{2, 1, 3, Activation::kIdentity}}};
  const auto params = init_parameters(arch, InitScheme::kUniformFanIn, rng);
  const Objective obj{LossKind::kMse, Readout::kPerNode};
  const auto idx = iota_indices(12);
  const auto ideal = ideal_realization(data.graphs[0], arch);
  const std::vector<double> a = params.flatten();
  const auto p = static_cast<Eigen::Index>(a.size());
  const auto loss = [&](std::vector<double> v) {
    AirGnnParameters q = params;
    q.assign(v);
    return minibatch_objective(q, data, idx, ideal, obj);
  };
  const double h = 0.1;
  Eigen::MatrixXd hess(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      double total = 0.0;
      for (int si : {1, -1})
        for (int sj : {1, -1}) {
          auto v = a;
          v[static_cast<std::size_t>(i)] += si * h;
          v[static_cast<std::size_t>(j)] += sj * h;
          total += si * sj * loss(v);
        }
      hess(i, j) = total / (4.0 * h * h);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
  const double expected = es.eigenvalues().cwiseAbs().maxCoeff();
  const double est = estimate_smoothness(params, data, idx, obj, ChannelModel::ideal_channel(), 3, 300, 5);
  EXPECT_NEAR(est, expected, 1e-5 * expected);
  EXPECT_THROW(estimate_smoothness(params, data, idx, obj, ChannelModel{}, 0, 10, 5), std::invalid_argument);
}
