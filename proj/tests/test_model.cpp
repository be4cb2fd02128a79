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
#include <filesystem>

#include "airgnn/model.hpp"
#include "oracles.hpp"

using namespace airgnn;

namespace {

AirGnnParameters random_params(const Architecture& arch, Rng& rng) {
  return init_parameters(arch, InitScheme::kUniformFanIn, rng);
}

double weighted_sum(const Matrix& out, const Matrix& w) { return (out.array() * w.array()).sum(); }

}  // namespace

TEST(Architecture, ValidatesWidths) {
  Architecture bad{{LayerShape{1, 4, 2, Activation::kRelu}, LayerShape{3, 1, 1, Activation::kIdentity}}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  Architecture good{{LayerShape{1, 4, 2, Activation::kRelu}, LayerShape{4, 2, 1, Activation::kIdentity}}};
  EXPECT_NO_THROW(good.validate());
  EXPECT_EQ(good.parameter_count(), 1u * 4 * 3 + 4u * 2 * 2);
  EXPECT_EQ(good.total_hops(), 3u);
}

TEST(AirFilter, ZeroOrderTapBypassesChannel) {
  Rng rng(1);
  const auto g = oracle::random_graph(rng, 5, 0.6);
  const Architecture arch{{LayerShape{1, 1, 3, Activation::kIdentity}}};
  const auto real = sample_realization(g, arch, ChannelModel{}, {1, 0, 0});
  const Matrix x = oracle::random_matrix(rng, 5, 1);
  const std::vector<double> alpha{1.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(air_filter_apply(g, x, alpha, real.layers[0].hops).output, x);
}

TEST(AirFilter, IdealChannelIsPolynomialFilter) {
  Rng rng(2);
  const auto g = oracle::random_graph(rng, 6, 0.5, true);
  const Architecture arch{{LayerShape{1, 1, 4, Activation::kIdentity}}};
  const auto real = ideal_realization(g, arch);
  const Matrix x = oracle::random_matrix(rng, 6, 1);
  const std::vector<double> alpha{0.3, -1.2, 0.7, 0.25, -0.4};
  const Matrix s = g.to_dense();
  Matrix expected = Matrix::Zero(6, 1), power = Matrix::Identity(6, 6);
  for (double a : alpha) {
    expected += a * power * x;
    power = power * s;
  }
  EXPECT_LE(oracle::max_abs_diff(air_filter_apply(g, x, alpha, real.layers[0].hops).output, expected), 1e-12);
}

TEST(AirFilter, SignalPlusNoiseExpansion) {
  // y = sum_k a_k H_k..H_1 x + sum_k a_k sum_{j<=k} H_k..H_{j+1} n_j
  const auto g = GraphShiftOperator::from_entries(3, {{0, 1, 0.5}, {1, 0, 0.5}, {1, 2, 0.5}, {2, 1, 0.5}});
  const Architecture arch{{LayerShape{1, 1, 2, Activation::kIdentity}}};
  const auto real = sample_realization(g, arch, ChannelModel{}, {3, 0, 0});
  const auto& hops = real.layers[0].hops;
  const Matrix h1 = oracle::dense_hop(g, hops[0].gains[0]), h2 = oracle::dense_hop(g, hops[1].gains[0]);
  const Matrix n1 = hops[0].noise, n2 = hops[1].noise;
  const Matrix x = (Matrix(3, 1) << 1.0, -2.0, 0.5).finished();
  const std::vector<double> a{0.2, 1.5, -0.8};
  const Matrix signal = a[0] * x + a[1] * h1 * x + a[2] * h2 * h1 * x;
  const Matrix noise = a[1] * n1 + a[2] * (h2 * n1 + n2);
  EXPECT_LE(oracle::max_abs_diff(air_filter_apply(g, x, a, hops).output, signal + noise), 1e-12);
}

TEST(LayerForward, DegenerateBankMatchesFilter) {
  Rng rng(4);
  const auto g = oracle::random_graph(rng, 5, 0.6);
  const LayerShape shape{1, 1, 3, Activation::kIdentity};
  FilterBank bank(shape);
  std::vector<double> alpha;
  for (std::size_t k = 0; k <= 3; ++k) alpha.push_back(bank.alpha(0, 0, k) = rng.normal());
  const auto real = sample_realization(g, Architecture{{shape}}, ChannelModel{}, {4, 0, 0});
  const Matrix x = oracle::random_matrix(rng, 5, 1);
  EXPECT_LE(oracle::max_abs_diff(layer_forward(g, x, bank, real.layers[0]).output,
                                 air_filter_apply(g, x, alpha, real.layers[0].hops).output),
            1e-14);
}

TEST(LayerForward, ReluPointwise) {
  const auto g = GraphShiftOperator::from_entries(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  FilterBank bank(LayerShape{1, 1, 0, Activation::kRelu});
  bank.alpha(0, 0, 0) = 1.0;
  LayerRealization empty;
  const Matrix x = (Matrix(2, 1) << -1.0, 2.0).finished();
  const auto out = layer_forward(g, x, bank, empty);
  EXPECT_EQ(out.output, (Matrix(2, 1) << 0.0, 2.0).finished());
  EXPECT_EQ(out.tape.pre_activation, x);
}

TEST(LayerForward, MatchesNaiveLoopOracle) {
  for (bool per_filter : {false, true}) {
    Rng rng(5);
    const auto g = oracle::random_graph(rng, 5, 0.6, true);
    const Architecture arch{{LayerShape{3, 4, 3, Activation::kTanh}}};
    ChannelModel m;
    m.per_filter_channels = per_filter;
    const auto real = sample_realization(g, arch, m, {5, 0, 0});
    const auto params = random_params(arch, rng);
    const Matrix x = oracle::random_matrix(rng, 5, 3);
    EXPECT_LE(oracle::max_abs_diff(layer_forward(g, x, params.layers[0], real.layers[0]).output,
                                   oracle::naive_layer(g, x, params.layers[0], real.layers[0])),
              1e-12);
  }
}

TEST(Forward, IdentityNetworkReturnsInput) {
  Rng rng(6);
  const auto g = oracle::random_graph(rng, 4, 0.7);
  const Architecture arch{{LayerShape{1, 1, 2, Activation::kIdentity}}};
  auto params = AirGnnParameters::zeros(arch);
  params.layers[0].alpha(0, 0, 0) = 1.0;
  const auto real = std::make_shared<ChannelRealization>(sample_realization(g, arch, ChannelModel{}, {6, 0, 0}));
  const Matrix x = oracle::random_matrix(rng, 4, 1);
  EXPECT_EQ(forward(g, x, params, real).output, x);
}

TEST(Forward, IdealChannelMatchesConventionalGnn) {
  Rng rng(7);
  const auto g = oracle::random_graph(rng, 8, 0.4, true);
  const Architecture arch{{LayerShape{2, 5, 3, Activation::kRelu}, LayerShape{5, 3, 2, Activation::kTanh},
                           LayerShape{3, 2, 0, Activation::kIdentity}}};
  const auto params = random_params(arch, rng);
  const Matrix x = oracle::random_matrix(rng, 8, 2);
  const auto out = forward_output(g, x, params, ideal_realization(g, arch));
  EXPECT_LE(oracle::max_abs_diff(out, oracle::conventional_gnn(g.to_dense(), x, params)), 1e-12);
}

TEST(Forward, MatchesNaiveForwardAndReplaysExactly) {
  Rng rng(8);
  const auto g = oracle::random_graph(rng, 7, 0.5);
  const Architecture arch{{LayerShape{2, 3, 2, Activation::kRelu}, LayerShape{3, 2, 3, Activation::kIdentity}}};
  const auto params = random_params(arch, rng);
  ChannelModel m;
  m.snr_db = 10;
  const auto real = std::make_shared<ChannelRealization>(sample_realization(g, arch, m, {8, 0, 0}));
  const Matrix x = oracle::random_matrix(rng, 7, 2);
  const auto a = forward(g, x, params, real).output;
  EXPECT_LE(oracle::max_abs_diff(a, oracle::naive_forward(g, x, params, *real)), 1e-12);
  EXPECT_EQ(a, forward(g, x, params, real).output);
  EXPECT_EQ(a, forward_output(g, x, params, *real));
}

TEST(Forward, StackedSamplesShareRealization) {
  Rng rng(9);
  const auto g = oracle::random_graph(rng, 5, 0.6);
  const Architecture arch{{LayerShape{1, 2, 2, Activation::kTanh}}};
  const auto params = random_params(arch, rng);
  const auto real = sample_realization(g, arch, ChannelModel{}, {9, 0, 0});
  const Matrix a = oracle::random_matrix(rng, 5, 1), b = oracle::random_matrix(rng, 5, 1);
  Matrix both(10, 1);
  both << a, b;
  const Matrix out = forward_output(g, both, params, real);
  EXPECT_LE(oracle::max_abs_diff(out.topRows(5), forward_output(g, a, params, real)), 1e-14);
  EXPECT_LE(oracle::max_abs_diff(out.bottomRows(5), forward_output(g, b, params, real)), 1e-14);
}

TEST(Backward, LinearZeroOrderGradientIsInput) {
  Rng rng(10);
  const auto g = oracle::random_graph(rng, 4, 0.6);
  const Architecture arch{{LayerShape{1, 1, 0, Activation::kIdentity}}};
  const auto params = random_params(arch, rng);
  const Matrix x = oracle::random_matrix(rng, 4, 1);
  const auto fwd = forward(g, x, params, std::make_shared<ChannelRealization>(ideal_realization(g, arch)));
  const Matrix ones = Matrix::Ones(4, 1);
  EXPECT_NEAR(backward(g, fwd.tape, params, ones).layers[0].alpha(0, 0, 0), x.sum(), 1e-14);
}

TEST(Backward, ZeroOutputGradientGivesZero) {
  Rng rng(11);
  const auto g = oracle::random_graph(rng, 5, 0.6);
  const Architecture arch{{LayerShape{2, 3, 2, Activation::kTanh}, LayerShape{3, 1, 1, Activation::kIdentity}}};
  const auto params = random_params(arch, rng);
  const auto fwd = forward(g, oracle::random_matrix(rng, 5, 2), params,
                           std::make_shared<ChannelRealization>(sample_realization(g, arch, ChannelModel{}, {1, 1, 1})));
  for (double v : backward(g, fwd.tape, params, Matrix::Zero(5, 1)).flatten()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, MatchesCentralFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(100 + seed);
    const auto g = oracle::random_graph(rng, 6, 0.5, true);
    const Architecture arch{{LayerShape{2, 3, 3, Activation::kTanh}, LayerShape{3, 2, 2, Activation::kIdentity}}};
    const auto params = random_params(arch, rng);
    ChannelModel m;
    m.fading_mode = FadingMode::kMultiply;
    m.snr_db = 20;
    m.per_filter_channels = seed % 2 == 1;
    const auto real = std::make_shared<ChannelRealization>(sample_realization(g, arch, m, {seed, 0, 0}));
    const Matrix x = oracle::random_matrix(rng, 12, 2);
    const Matrix w = oracle::random_matrix(rng, 12, 2);
    const auto fwd = forward(g, x, params, real);
    const auto analytic = backward(g, fwd.tape, params, w).flatten();
    auto flat = params.flatten();
    AirGnnParameters probe = params;
    const double h = 1e-6;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double keep = flat[i];
      flat[i] = keep + h;
      probe.assign(flat);
      const double up = weighted_sum(forward_output(g, x, probe, *real), w);
      flat[i] = keep - h;
      probe.assign(flat);
      const double down = weighted_sum(forward_output(g, x, probe, *real), w);
      flat[i] = keep;
      const double fd = (up - down) / (2 * h);
      EXPECT_LE(std::abs(analytic[i] - fd) / std::max(1e-8, std::abs(fd)), 1e-5) << "seed " << seed << " index " << i;
    }
  }
}

TEST(Parameters, FlatLayoutAndRoundTrip) {
  const Architecture arch{{LayerShape{2, 3, 1, Activation::kRelu}}};
  auto p = AirGnnParameters::zeros(arch);
  p.layers[0].alpha(1, 2, 1) = 5.0;
  const auto flat = p.flatten();
  ASSERT_EQ(flat.size(), 12u);
  // [g][f][k]: g=1, f=2, k=1 -> 1*6 + 2*2 + 1.
  EXPECT_EQ(flat[11], 5.0);
  AirGnnParameters q = AirGnnParameters::zeros(arch);
  q.assign(flat);
  EXPECT_EQ(q, p);
  EXPECT_EQ(q.architecture(), arch);
}

TEST(Parameters, JsonRoundTripIsBitExact) {
  Rng rng(12);
  const Architecture arch{{LayerShape{1, 4, 3, Activation::kRelu}, LayerShape{4, 2, 0, Activation::kIdentity}}};
  const auto p = random_params(arch, rng);
  EXPECT_EQ(parameters_from_json(parameters_to_json(p)), p);
  const auto path = std::filesystem::temp_directory_path() / "airgnn_params.json";
  save_parameters(p, path);
  EXPECT_EQ(load_parameters(path), p);
  std::filesystem::remove(path);
  EXPECT_ANY_THROW(parameters_from_json("{\"layers\": 3}"));
}

TEST(Init, ConstantZero) {
  Rng rng(13);
  const Architecture arch{{LayerShape{2, 2, 2, Activation::kRelu}}};
  for (double v : init_parameters(arch, InitScheme::kConstant, rng, 0.0).flatten()) EXPECT_EQ(v, 0.0);
}

TEST(Init, UniformFanInReproducibleWithVariance) {
  const Architecture arch{{LayerShape{4, 5000, 4, Activation::kRelu}, LayerShape{5000, 2, 9, Activation::kIdentity}}};
  Rng a(14), b(14);
  const auto p = init_parameters(arch, InitScheme::kUniformFanIn, a);
  EXPECT_EQ(p, init_parameters(arch, InitScheme::kUniformFanIn, b));
  for (const auto& bank : p.layers) {
    const auto& sh = bank.shape();
    const double bound = 1.0 / std::sqrt(static_cast<double>(sh.in * (sh.order + 1)));
    const auto& w = bank.stacked();
    EXPECT_LE(w.cwiseAbs().maxCoeff(), bound);
    const double var = w.array().square().mean() - std::pow(w.mean(), 2);
    EXPECT_NEAR(var, bound * bound / 3.0, 0.02 * bound * bound / 3.0);
  }
}
