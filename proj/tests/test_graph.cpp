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

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <algorithm>
#include <numeric>

#include "airgnn/graph.hpp"
#include "airgnn/rng.hpp"
#include "oracles.hpp"

using namespace airgnn;

namespace {

GraphShiftOperator path3() {
  return GraphShiftOperator::from_entries(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
}

double dense_lambda_max(const Matrix& a) {
  const Eigen::MatrixXd dense = a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(GraphShiftOperator, RejectsMalformedEntries) {
  EXPECT_THROW(GraphShiftOperator::from_entries(2, {{0, 1, 1.0}, {0, 1, 2.0}}), std::invalid_argument);
  EXPECT_THROW(GraphShiftOperator::from_entries(2, {{0, 2, 1.0}}), std::invalid_argument);
  EXPECT_THROW(GraphShiftOperator::from_entries(2, {{0, 1, 0.0}}), std::invalid_argument);
  EXPECT_THROW(GraphShiftOperator::from_entries(2, {{0, 1, NAN}}), std::invalid_argument);
  EXPECT_THROW(GraphShiftOperator::from_entries(0, {}), std::invalid_argument);
}

TEST(GraphShiftOperator, EntriesSortedAndOffSupportZero) {
  const auto g = GraphShiftOperator::from_entries(3, {{2, 1, 3.0}, {0, 2, 1.0}, {1, 1, 2.0}});
  const auto e = g.entries();
  for (std::size_t i = 1; i < e.size(); ++i)
    EXPECT_TRUE(std::make_pair(e[i - 1].row, e[i - 1].col) < std::make_pair(e[i].row, e[i].col));
  const Matrix d = g.to_dense();
  int nonzero = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) nonzero += d.data()[i] != 0.0;
  EXPECT_EQ(nonzero, 3);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(GraphShiftOperator::from_dense(d), g);
}

TEST(Sbm, HundredNodesSymmetricWithBlocks) {
  const auto g = generate_sbm(100, 10, 0.8, 0.2, 7);
  EXPECT_EQ(g.size(), 100u);
  EXPECT_TRUE(g.is_symmetric());
  for (const auto& e : g.entries()) EXPECT_NE(e.row, e.col);
  // Intra-community density should clearly exceed inter-community density.
  double intra = 0, inter = 0;
  for (const auto& e : g.entries()) (e.row / 10 == e.col / 10 ? intra : inter) += 1;
  EXPECT_GT(intra / (100.0 * 9.0), 0.7);
  EXPECT_LT(inter / (100.0 * 90.0), 0.3);
}

TEST(Sbm, DegenerateProbabilitiesGiveDisjointCliques) {
  const auto g = generate_sbm(12, 3, 1.0, 0.0, 1);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j)
      EXPECT_EQ(g.has_edge(i, j), i != j && i / 4 == j / 4) << i << "," << j;
}

TEST(Sbm, ExpectedEdgeCountMonteCarlo) {
  // 0.8 * 2 * C(10, 2) + 0.2 * 100 = 92 undirected edges.
  double total = 0.0;
  const int seeds = 10000;
  for (int s = 0; s < seeds; ++s) total += static_cast<double>(generate_sbm(20, 2, 0.8, 0.2, s).edge_count()) / 2.0;
  EXPECT_NEAR(total / seeds, 92.0, 0.92);
}

TEST(Sbm, RejectsInvalidArguments) {
  EXPECT_THROW(generate_sbm(10, 3, 0.8, 0.2, 1), std::invalid_argument);
  EXPECT_THROW(generate_sbm(10, 2, 0.2, 0.8, 1), std::invalid_argument);
  EXPECT_THROW(generate_sbm(10, 2, 1.2, 0.2, 1), std::invalid_argument);
}

TEST(Geometric, DistanceThreshold) {
  Matrix near(2, 2);
  near << 0, 0, 1, 0;
  const auto g = generate_geometric(near, 1.5);
  EXPECT_EQ(g.nnz(), 2u);
  EXPECT_TRUE(g.has_edge(0, 1));
  Matrix far(2, 2);
  far << 0, 0, 2, 0;
  EXPECT_EQ(generate_geometric(far, 1.5).nnz(), 0u);
}

TEST(Geometric, SymmetricWithoutSelfLoops) {
  Rng rng(3);
  Matrix pos(30, 2);
  for (Eigen::Index i = 0; i < pos.size(); ++i) pos.data()[i] = rng.uniform(0.0, 4.0);
  const auto g = generate_geometric(pos, 1.5);
  EXPECT_TRUE(g.is_symmetric());
  for (const auto& e : g.entries()) {
    EXPECT_NE(e.row, e.col);
    EXPECT_LE((pos.row(e.row) - pos.row(e.col)).norm(), 1.5);
  }
}

TEST(Normalize, KnownSpectra) {
  const auto k3 = GraphShiftOperator::from_dense((Matrix(3, 3) << 0, 1, 1, 1, 0, 1, 1, 1, 0).finished());
  for (double v : normalize_by_spectral_radius(k3).values()) EXPECT_NEAR(v, 0.5, 1e-10);
  const auto p2 = GraphShiftOperator::from_entries(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  for (double v : normalize_by_spectral_radius(p2).values()) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(Normalize, MatchesDenseEigensolver) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = generate_sbm(60, 6, 0.7, 0.1, seed);
    EXPECT_NEAR(spectral_radius(g).value, dense_lambda_max(g.to_dense()), 1e-8);
    EXPECT_NEAR(dense_lambda_max(normalize_by_spectral_radius(g).to_dense()), 1.0, 1e-8);
  }
}

TEST(Normalize, RejectsAsymmetricAndEmpty) {
  EXPECT_THROW(normalize_by_spectral_radius(GraphShiftOperator::from_entries(2, {{0, 1, 1.0}})),
               std::invalid_argument);
  EXPECT_ANY_THROW(spectral_radius(GraphShiftOperator::from_entries(3, {})));
}

TEST(KroneckerDelta, Definition) {
  EXPECT_EQ(kronecker_delta(3, 1), (Matrix(3, 1) << 0, 1, 0).finished());
  EXPECT_EQ(kronecker_delta(1, 0), (Matrix(1, 1) << 1).finished());
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(kronecker_delta(7, i).sum(), 1.0);
  EXPECT_THROW(kronecker_delta(3, 3), std::out_of_range);
}

TEST(IdealShift, PathAndZero) {
  EXPECT_EQ(ideal_shift(path3(), kronecker_delta(3, 0)), kronecker_delta(3, 1));
  EXPECT_EQ(ideal_shift(path3(), Matrix::Zero(3, 2)), Matrix::Zero(3, 2));
}

TEST(IdealShift, DenseOracleAndLinearity) {
  Rng rng(11);
  const auto g = oracle::random_graph(rng, 6, 0.5, true);
  const Matrix x = oracle::random_matrix(rng, 6, 3);
  const Matrix y = oracle::random_matrix(rng, 6, 3);
  EXPECT_LE(oracle::max_abs_diff(ideal_shift(g, x), g.to_dense() * x), 1e-14);
  const Matrix lhs = ideal_shift(g, 2.5 * x - 0.5 * y);
  const Matrix rhs = 2.5 * ideal_shift(g, x) - 0.5 * ideal_shift(g, y);
  EXPECT_LE(oracle::max_abs_diff(lhs, rhs), 1e-13);
}

TEST(ShiftAccumulate, BlockwiseOnStackedSamples) {
  Rng rng(5);
  const auto g = oracle::random_graph(rng, 5, 0.6);
  const Matrix a = oracle::random_matrix(rng, 5, 2), b = oracle::random_matrix(rng, 5, 2);
  Matrix stacked(10, 2);
  stacked << a, b;
  Matrix out = Matrix::Zero(10, 2);
  shift_accumulate(g, g.values(), stacked, out);
  EXPECT_EQ(Matrix(out.topRows(5)), ideal_shift(g, a));
  EXPECT_EQ(Matrix(out.bottomRows(5)), ideal_shift(g, b));
}

TEST(IdealShift, PermutationEquivariance) {
  Rng rng(2);
  const auto g = generate_sbm(12, 3, 0.8, 0.2, 4);
  const Matrix x = oracle::random_matrix(rng, 12, 2);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  Matrix px(12, 2);
  for (std::size_t i = 0; i < 12; ++i) px.row(static_cast<Eigen::Index>(perm[i])) = x.row(static_cast<Eigen::Index>(i));
  const Matrix shifted = ideal_shift(g, x);
  Matrix expected(12, 2);
  for (std::size_t i = 0; i < 12; ++i)
    expected.row(static_cast<Eigen::Index>(perm[i])) = shifted.row(static_cast<Eigen::Index>(i));
  EXPECT_LE(oracle::max_abs_diff(ideal_shift(g.permuted(perm), px), expected), 1e-14);
}

TEST(EdgeList, RoundTrip) {
  const auto g = normalize_by_spectral_radius(generate_sbm(20, 4, 0.6, 0.1, 9));
  const auto path = std::filesystem::temp_directory_path() / "airgnn_edges.txt";
  save_edge_list(g, path);
  EXPECT_EQ(load_edge_list(path), g);
  std::filesystem::remove(path);
}
