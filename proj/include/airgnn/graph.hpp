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
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace airgnn {

// Row-major dense matrix. Graph signals are n x F (one row per node); batched
// signals stack B blocks of n rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using GraphSignal = Matrix;

struct GraphEntry {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;

  friend bool operator==(const GraphEntry&, const GraphEntry&) = default;
};

// Sparse shift operator in coordinate form, entries sorted by (row, col).
// Entry (i, j) means node i aggregates from node j. The stored coordinates are
// the support; diagonal entries are allowed and treated as a node's own term.
class GraphShiftOperator {
 public:
  GraphShiftOperator() = default;

  // Sorts entries, rejects duplicates, out-of-range indices, zero or
  // non-finite values.
  static GraphShiftOperator from_entries(std::size_t n, std::vector<GraphEntry> entries);
  static GraphShiftOperator from_dense(const Matrix& dense);

  std::size_t size() const { return n_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const GraphEntry> entries() const { return entries_; }
  // CSR-style offsets into entries(); row i spans [row_offset(i), row_offset(i+1)).
  std::size_t row_offset(std::size_t i) const { return row_offsets_[i]; }

  // Values in entry order; the nominal channel gains.
  std::vector<double> values() const;
  // Number of off-diagonal entries in row i (in-neighbors).
  std::size_t degree(std::size_t i) const;
  std::size_t edge_count() const;  // off-diagonal entries
  bool has_edge(std::size_t i, std::size_t j) const;
  bool is_symmetric() const;
  bool is_connected() const;  // treats the support as undirected

  Matrix to_dense() const;
  GraphShiftOperator scaled(double factor) const;
  // Returns P S P^T where node i moves to perm[i].
  GraphShiftOperator permuted(std::span<const std::size_t> perm) const;

  friend bool operator==(const GraphShiftOperator&, const GraphShiftOperator&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<GraphEntry> entries_;
  std::vector<std::size_t> row_offsets_;
};

// Row-major strided window into a signal: `rows` rows of `cols` values with
// consecutive rows `stride` doubles apart.
struct ConstSignalView {
  const double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index stride = 0;
};
struct SignalView {
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index stride = 0;
};

inline ConstSignalView view_of(const Matrix& m) { return {m.data(), m.rows(), m.cols(), m.cols()}; }
inline SignalView view_of(Matrix& m) { return {m.data(), m.rows(), m.cols(), m.cols()}; }
// Column block [first, first + count) of m.
inline ConstSignalView column_view(const Matrix& m, Eigen::Index first, Eigen::Index count) {
  return {m.data() + first, m.rows(), count, m.cols()};
}
inline SignalView column_view(Matrix& m, Eigen::Index first, Eigen::Index count) {
  return {m.data() + first, m.rows(), count, m.cols()};
}

// y += W x (or W^T x) on every n-row block, without shape checks beyond the
// block structure.
void shift_accumulate(const GraphShiftOperator& graph, std::span<const double> weights,
                      ConstSignalView x, SignalView y, bool transpose);

// y = W x on every n-row block of x, where W has the support of `graph` and
// values `weights` (aligned with graph.entries()). Accumulates into y.
void shift_accumulate(const GraphShiftOperator& graph, std::span<const double> weights,
                      const Matrix& x, Matrix& y);
// y += W^T x, blockwise.
void shift_transpose_accumulate(const GraphShiftOperator& graph,
                                std::span<const double> weights, const Matrix& x,
                                Matrix& y);

GraphShiftOperator generate_sbm(std::size_t n, std::size_t communities, double p_intra,
                                double p_inter, std::uint64_t seed);

// Positions are n x 2; edge iff distance <= radius and i != j.
GraphShiftOperator generate_geometric(const Matrix& positions, double radius);

struct SpectralRadius {
  double value = 0.0;
  std::size_t iterations = 0;
};

SpectralRadius spectral_radius(const GraphShiftOperator& graph, double tolerance = 1e-10,
                               std::size_t max_iterations = 10000);

GraphShiftOperator normalize_by_spectral_radius(const GraphShiftOperator& graph);

GraphSignal kronecker_delta(std::size_t n, std::size_t node);

GraphSignal ideal_shift(const GraphShiftOperator& graph, const GraphSignal& x);

// Edge-list text format: header `n=<count>`, then `i j weight` per line.
void save_edge_list(const GraphShiftOperator& graph, const std::filesystem::path& path);
GraphShiftOperator load_edge_list(const std::filesystem::path& path);

}  // namespace airgnn
