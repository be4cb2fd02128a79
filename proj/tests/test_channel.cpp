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
#include <numbers>

#include "airgnn/channel.hpp"
#include "oracles.hpp"

using namespace airgnn;

namespace {

GraphShiftOperator path3() {
  return GraphShiftOperator::from_entries(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
}

Architecture one_layer(std::size_t in, std::size_t out, std::size_t order) {
  return Architecture{{LayerShape{in, out, order, Activation::kIdentity}}};
}

}  // namespace

TEST(NoiseVariance, DecibelDefinition) {
  ChannelModel m;
  m.snr_db = 40;
  EXPECT_NEAR(noise_variance(m), 1e-4, 1e-18);
  m.snr_db = 0;
  EXPECT_NEAR(noise_variance(m), 1.0, 1e-15);
  m.snr_db = 40;
  m.reference_power = 2.5;
  EXPECT_NEAR(noise_variance(m), 2.5e-4, 1e-18);
}

TEST(ChannelModel, ValidateRejectsBadValues) {
  ChannelModel m;
  m.fading_scale = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = ChannelModel{};
  m.reference_power = -1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = ChannelModel{};
  m.snr_db = NAN;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Rayleigh, MeanMatchesClosedForm) {
  Rng rng(1);
  double sum = 0.0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) sum += rng.rayleigh(1.0);
  EXPECT_NEAR(sum / draws, std::sqrt(std::numbers::pi / 2.0), 0.01 * std::sqrt(std::numbers::pi / 2.0));
}

TEST(Rayleigh, SecondMomentMatchesClosedForm) {
  Rng rng(2);
  double sum = 0.0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    const double h = rng.rayleigh(0.5);
    sum += h * h;
  }
  EXPECT_NEAR(sum / draws, 0.5, 0.005);
}

TEST(SampleFading, PreservesSupport) {
  const auto g = path3();
  Rng rng(3);
  ChannelModel m;
  const auto gains = sample_fading(g, m, rng);
  ASSERT_EQ(gains.size(), g.nnz());
  Matrix h = oracle::dense_hop(g, gains);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      EXPECT_EQ(h(i, j) != 0.0, g.has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
}

TEST(SampleFading, MultiplyModeScalesNominal) {
  const auto g = path3().scaled(0.25);
  ChannelModel replace, multiply;
  multiply.fading_mode = FadingMode::kMultiply;
  Rng a(9), b(9);
  const auto r = sample_fading(g, replace, a);
  const auto m = sample_fading(g, multiply, b);
  for (std::size_t e = 0; e < r.size(); ++e) EXPECT_DOUBLE_EQ(m[e], 0.25 * r[e]);
}

TEST(SampleFading, DiagonalKeepsNominal) {
  const auto g = GraphShiftOperator::from_entries(2, {{0, 0, 0.7}, {0, 1, 0.3}, {1, 0, 0.3}});
  Rng rng(4);
  const auto gains = sample_fading(g, ChannelModel{}, rng);
  EXPECT_EQ(gains[0], 0.7);
}

TEST(AirShift, NominalNoiselessEqualsIdealShift) {
  Rng rng(5);
  const auto g = oracle::random_graph(rng, 7, 0.5, true);
  const Matrix x = oracle::random_matrix(rng, 7, 3);
  const Matrix y = air_shift(g, x, g.values(), Matrix::Zero(7, 3));
  EXPECT_EQ(y, ideal_shift(g, x));
}

TEST(AirShift, TwoNodeHandExample) {
  const auto g = GraphShiftOperator::from_entries(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const std::vector<double> gains{0.5, 2.0};
  const Matrix noise = (Matrix(2, 1) << 0.1, -0.1).finished();
  const Matrix x = (Matrix(2, 1) << 1.0, 2.0).finished();
  const Matrix y = air_shift(g, x, gains, noise);
  EXPECT_NEAR(y(0, 0), 1.1, 1e-15);
  EXPECT_NEAR(y(1, 0), 1.9, 1e-15);
}

TEST(AirShift, NoiseOnlyAndStackedBlocks) {
  Rng rng(6);
  const auto g = oracle::random_graph(rng, 4, 0.7);
  const Matrix noise = oracle::random_matrix(rng, 4, 2);
  EXPECT_EQ(air_shift(g, Matrix::Zero(4, 2), g.values(), noise), noise);
  const Matrix x = oracle::random_matrix(rng, 8, 2);
  const Matrix y = air_shift(g, x, g.values(), noise);
  EXPECT_LE(oracle::max_abs_diff(y.topRows(4), g.to_dense() * x.topRows(4) + noise), 1e-14);
  EXPECT_LE(oracle::max_abs_diff(y.bottomRows(4), g.to_dense() * x.bottomRows(4) + noise), 1e-14);
}

TEST(AirShift, TransposeIsAdjoint) {
  Rng rng(7);
  const auto g = oracle::random_graph(rng, 6, 0.5, true);
  ChannelRealization real = sample_realization(g, one_layer(2, 1, 1), ChannelModel{}, {7, 0, 0});
  HopRealization hop = real.layers[0].hops[0];
  hop.noise.setZero();
  const Matrix x = oracle::random_matrix(rng, 6, 2), u = oracle::random_matrix(rng, 6, 2);
  const Matrix hx = air_shift(g, x, hop);
  Matrix htu = Matrix::Zero(6, 2);
  air_shift_transpose_accumulate(g, hop, u, htu);
  EXPECT_NEAR((hx.array() * u.array()).sum(), (x.array() * htu.array()).sum(), 1e-12);
}

TEST(SampleRealization, MinimalShape) {
  const auto g = path3();
  const auto r = sample_realization(g, one_layer(1, 1, 1), ChannelModel{}, {1, 2, 3});
  ASSERT_EQ(r.layers.size(), 1u);
  ASSERT_EQ(r.layers[0].hops.size(), 1u);
  EXPECT_EQ(r.layers[0].hops[0].gains.size(), 1u);
  EXPECT_EQ(r.layers[0].hops[0].noise.rows(), 3);
  EXPECT_EQ(r.layers[0].hops[0].noise.cols(), 1);
  EXPECT_EQ(r.hop_count(), 1u);
  EXPECT_NO_THROW(r.check_shape(g, one_layer(1, 1, 1)));
  EXPECT_THROW(r.check_shape(g, one_layer(1, 1, 2)), std::invalid_argument);
}

TEST(SampleRealization, PerFilterGroups) {
  ChannelModel m;
  m.per_filter_channels = true;
  const auto r = sample_realization(path3(), one_layer(3, 2, 2), m, {1, 0, 0});
  for (const auto& hop : r.layers[0].hops) {
    EXPECT_EQ(hop.gains.size(), 3u);
    EXPECT_NE(hop.gains[0], hop.gains[1]);
  }
}

TEST(SampleRealization, DeterministicAndKeyed) {
  Rng rng(8);
  const auto g = oracle::random_graph(rng, 10, 0.4);
  const Architecture arch{{LayerShape{2, 3, 3, Activation::kRelu}, LayerShape{3, 1, 2, Activation::kIdentity}}};
  const auto a = sample_realization(g, arch, ChannelModel{}, {11, 1, 2});
  EXPECT_EQ(a, sample_realization(g, arch, ChannelModel{}, {11, 1, 2}));
  EXPECT_NE(a, sample_realization(g, arch, ChannelModel{}, {11, 1, 3}));
  EXPECT_NE(a, sample_realization(g, arch, ChannelModel{}, {12, 1, 2}));
}

TEST(SampleRealization, NoiseMomentsAndIndependence) {
  const auto g = path3();
  ChannelModel m;
  m.snr_db = 0.0;
  m.reference_power = 4.0;
  const auto arch = one_layer(1, 1, 2);
  double sum = 0, sumsq = 0, cross = 0;
  const int draws = 20000;
  for (int s = 0; s < draws; ++s) {
    const auto r = sample_realization(g, arch, m, {static_cast<std::uint64_t>(s), 0, 0});
    const double a = r.layers[0].hops[0].noise(0, 0), b = r.layers[0].hops[1].noise(0, 0);
    sum += a;
    sumsq += a * a;
    cross += a * b;
  }
  const double var = 4.0;
  EXPECT_NEAR(sum / draws, 0.0, 4 * std::sqrt(var / draws));
  EXPECT_NEAR(sumsq / draws, var, 4 * var * std::sqrt(2.0 / draws));
  EXPECT_NEAR(cross / draws, 0.0, 4 * var / std::sqrt(draws));
}

TEST(SampleRealization, MonteCarloMeanOfShift) {
  // E[H] = sqrt(pi / 2) S under replace-mode unit Rayleigh fading.
  const auto g = path3();
  const auto arch = one_layer(1, 1, 1);
  const Matrix x = (Matrix(3, 1) << 1.0, 2.0, 3.0).finished();
  Matrix mean = Matrix::Zero(3, 1);
  const int draws = 40000;
  for (int s = 0; s < draws; ++s)
    mean += air_shift(g, x, sample_realization(g, arch, ChannelModel{}, {static_cast<std::uint64_t>(s), 0, 0})
                                .layers[0].hops[0]);
  mean /= draws;
  const Matrix expected = std::sqrt(std::numbers::pi / 2.0) * (g.to_dense() * x);
  EXPECT_LE(oracle::max_abs_diff(mean, expected), 0.03);
}

TEST(IdealRealization, ReducesToShift) {
  const auto g = path3();
  const auto r = ideal_realization(g, one_layer(2, 1, 3));
  const Matrix x = (Matrix(3, 2) << 1, 0, 0, 1, 2, 3).finished();
  for (const auto& hop : r.layers[0].hops) EXPECT_EQ(air_shift(g, x, hop), ideal_shift(g, x));
}

TEST(Realization, SaveLoadRoundTrip) {
  Rng rng(10);
  const auto g = oracle::random_graph(rng, 5, 0.6);
  ChannelModel m;
  m.per_filter_channels = true;
  const auto r = sample_realization(g, Architecture{{LayerShape{2, 2, 2, Activation::kTanh}}}, m, {5, 6, 7});
  const auto path = std::filesystem::temp_directory_path() / "airgnn_realization.json";
  save_realization(r, path);
  EXPECT_EQ(load_realization(path), r);
  std::filesystem::remove(path);
}
