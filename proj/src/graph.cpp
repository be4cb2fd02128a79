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

#include "airgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "airgnn/rng.hpp"

namespace airgnn {

GraphShiftOperator GraphShiftOperator::from_entries(std::size_t n,
                                                    std::vector<GraphEntry> entries) {
  if (n == 0) throw std::invalid_argument("graph must have at least one node");
  std::sort(entries.begin(), entries.end(), [](const GraphEntry& a, const GraphEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& entry = entries[e];
    if (entry.row >= n || entry.col >= n)
      throw std::invalid_argument("graph entry index out of range");
    if (!std::isfinite(entry.value) || entry.value == 0.0)
      throw std::invalid_argument("graph entries must be finite and nonzero");
    if (e > 0 && entries[e - 1].row == entry.row && entries[e - 1].col == entry.col)
      throw std::invalid_argument("duplicate graph entry (" + std::to_string(entry.row) +
                                  ", " + std::to_string(entry.col) + ")");
  }
  GraphShiftOperator g;
  g.n_ = n;
  g.entries_ = std::move(entries);
  g.row_offsets_.assign(n + 1, 0);
  for (const auto& entry : g.entries_) ++g.row_offsets_[entry.row + 1];
  for (std::size_t i = 0; i < n; ++i) g.row_offsets_[i + 1] += g.row_offsets_[i];
  return g;
}

GraphShiftOperator GraphShiftOperator::from_dense(const Matrix& dense) {
  if (dense.rows() != dense.cols()) throw std::invalid_argument("shift operator must be square");
  std::vector<GraphEntry> entries;
  for (Eigen::Index i = 0; i < dense.rows(); ++i)
    for (Eigen::Index j = 0; j < dense.cols(); ++j)
      if (dense(i, j) != 0.0)
        entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           dense(i, j)});
  return from_entries(static_cast<std::size_t>(dense.rows()), std::move(entries));
}

std::vector<double> GraphShiftOperator::values() const {
  std::vector<double> v(entries_.size());
  for (std::size_t e = 0; e < entries_.size(); ++e) v[e] = entries_[e].value;
  return v;
}

std::size_t GraphShiftOperator::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e)
    if (entries_[e].col != i) ++d;
  return d;
}

std::size_t GraphShiftOperator::edge_count() const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [](const GraphEntry& e) { return e.row != e.col; }));
}

bool GraphShiftOperator::has_edge(std::size_t i, std::size_t j) const {
  auto first = entries_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  auto last = entries_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  return std::binary_search(first, last, GraphEntry{static_cast<std::uint32_t>(i),
                                                    static_cast<std::uint32_t>(j), 0.0},
                            [](const GraphEntry& a, const GraphEntry& b) { return a.col < b.col; });
}

bool GraphShiftOperator::is_symmetric() const {
  for (const auto& e : entries_) {
    auto first = entries_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[e.col]);
    auto last = entries_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[e.col + 1]);
    auto it = std::lower_bound(first, last, e.row,
                               [](const GraphEntry& a, std::uint32_t c) { return a.col < c; });
    if (it == last || it->col != e.row || it->value != e.value) return false;
  }
  return true;
}

bool GraphShiftOperator::is_connected() const {
  std::vector<std::vector<std::size_t>> adj(n_);
  for (const auto& e : entries_) {
    if (e.row == e.col) continue;
    adj[e.row].push_back(e.col);
    adj[e.col].push_back(e.row);
  }
  std::vector<char> seen(n_, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j : adj[i]) {
      if (!seen[j]) {
        seen[j] = 1;
        ++visited;
        stack.push_back(j);
      }
    }
  }
  return visited == n_;
}

Matrix GraphShiftOperator::to_dense() const {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (const auto& e : entries_) d(e.row, e.col) = e.value;
  return d;
}

GraphShiftOperator GraphShiftOperator::scaled(double factor) const {
  auto entries = entries_;
  for (auto& e : entries) e.value *= factor;
  return from_entries(n_, std::move(entries));
}

GraphShiftOperator GraphShiftOperator::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw std::invalid_argument("permutation size mismatch");
  auto entries = entries_;
  for (auto& e : entries) {
    e.row = static_cast<std::uint32_t>(perm[e.row]);
    e.col = static_cast<std::uint32_t>(perm[e.col]);
  }
  return from_entries(n_, std::move(entries));
}

namespace {

void check_blocks(const GraphShiftOperator& graph, std::span<const double> weights,
                  const Matrix& x, const Matrix& y) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  if (weights.size() != graph.nnz()) throw std::invalid_argument("weights/support mismatch");
  if (x.rows() % n != 0 || x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("signal dimension mismatch");
}

}  // namespace

namespace {

// y_b[dst] += w * x_b[src] over all entries and all n-row blocks b.
template <bool kTranspose>
void shift_blocks(const GraphShiftOperator& graph, std::span<const double> weights,
                  ConstSignalView x, SignalView y) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  const auto entries = graph.entries();
  const auto cols = x.cols;
  const std::size_t m = entries.size();
  for (Eigen::Index base = 0; base < x.rows; base += n) {
    const double* __restrict xb = x.data + base * x.stride;
    double* __restrict yb = y.data + base * y.stride;
    if (cols == 1) {
      for (std::size_t e = 0; e < m; ++e) {
        const auto& en = entries[e];
        const std::size_t src = kTranspose ? en.row : en.col;
        const std::size_t dst = kTranspose ? en.col : en.row;
        yb[dst * y.stride] += weights[e] * xb[src * x.stride];
      }
      continue;
    }
    for (std::size_t e = 0; e < m; ++e) {
      const auto& en = entries[e];
      const double w = weights[e];
      const double* __restrict src = xb + (kTranspose ? en.row : en.col) * x.stride;
      double* __restrict dst = yb + (kTranspose ? en.col : en.row) * y.stride;
      for (Eigen::Index f = 0; f < cols; ++f) dst[f] += w * src[f];
    }
  }
}

}  // namespace

void shift_accumulate(const GraphShiftOperator& graph, std::span<const double> weights,
                      ConstSignalView x, SignalView y, bool transpose) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  if (weights.size() != graph.nnz()) throw std::invalid_argument("weights/support mismatch");
  if (x.rows % n != 0 || x.rows != y.rows || x.cols != y.cols)
    throw std::invalid_argument("signal dimension mismatch");
  if (transpose)
    shift_blocks<true>(graph, weights, x, y);
  else
    shift_blocks<false>(graph, weights, x, y);
}

void shift_accumulate(const GraphShiftOperator& graph, std::span<const double> weights,
                      const Matrix& x, Matrix& y) {
  check_blocks(graph, weights, x, y);
  shift_blocks<false>(graph, weights, view_of(x), view_of(y));
}

void shift_transpose_accumulate(const GraphShiftOperator& graph,
                                std::span<const double> weights, const Matrix& x,
                                Matrix& y) {
  check_blocks(graph, weights, x, y);
  shift_blocks<true>(graph, weights, view_of(x), view_of(y));
}

GraphShiftOperator generate_sbm(std::size_t n, std::size_t communities, double p_intra,
                                double p_inter, std::uint64_t seed) {
  if (communities == 0 || n == 0 || n % communities != 0)
    throw std::invalid_argument("communities must divide n");
  if (!(0.0 <= p_inter && p_inter <= p_intra && p_intra <= 1.0))
    throw std::invalid_argument("invalid SBM probabilities: need 0 <= p_inter <= p_intra <= 1");
  const std::size_t block = n / communities;
  Rng rng(seed);
  std::vector<GraphEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = (i / block == j / block) ? p_intra : p_inter;
      if (rng.uniform() < p) {
        entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 1.0});
        entries.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), 1.0});
      }
    }
  }
  return GraphShiftOperator::from_entries(n, std::move(entries));
}

GraphShiftOperator generate_geometric(const Matrix& positions, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (positions.cols() != 2) throw std::invalid_argument("positions must be n x 2");
  if (!positions.allFinite()) throw std::invalid_argument("non-finite positions");
  const auto n = positions.rows();
  std::vector<GraphEntry> entries;
  const double r2 = radius * radius;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if ((positions.row(i) - positions.row(j)).squaredNorm() <= r2)
        entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 1.0});
    }
  }
  return GraphShiftOperator::from_entries(static_cast<std::size_t>(n), std::move(entries));
}

SpectralRadius spectral_radius(const GraphShiftOperator& graph, double tolerance,
                               std::size_t max_iterations) {
  if (graph.nnz() == 0) throw std::invalid_argument("zero shift operator has no spectral radius");
  const auto n = static_cast<Eigen::Index>(graph.size());
  const auto weights = graph.values();
  // Iterating on ||S v|| rather than the Rayleigh quotient of S converges to
  // the largest |eigenvalue| even when -lambda_max is also an eigenvalue.
  Matrix v(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) v(i, 0) = 1.0 + 1e-3 * static_cast<double>(i % 7);
  v /= v.norm();
  double estimate = 0.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    Matrix w = Matrix::Zero(n, 1);
    shift_accumulate(graph, weights, v, w);
    const double norm = w.norm();
    if (norm == 0.0) throw std::invalid_argument("shift operator is nilpotent on start vector");
    if (std::abs(norm - estimate) <= tolerance * norm) return {norm, it};
    estimate = norm;
    v = w / norm;
  }
  throw std::runtime_error("power iteration did not converge");
}

GraphShiftOperator normalize_by_spectral_radius(const GraphShiftOperator& graph) {
  if (!graph.is_symmetric()) throw std::invalid_argument("normalization requires symmetric S");
  return graph.scaled(1.0 / spectral_radius(graph).value);
}

GraphSignal kronecker_delta(std::size_t n, std::size_t node) {
  if (node >= n) throw std::out_of_range("kronecker_delta node index out of range");
  GraphSignal x = GraphSignal::Zero(static_cast<Eigen::Index>(n), 1);
  x(static_cast<Eigen::Index>(node), 0) = 1.0;
  return x;
}

GraphSignal ideal_shift(const GraphShiftOperator& graph, const GraphSignal& x) {
  if (x.rows() != static_cast<Eigen::Index>(graph.size()))
    throw std::invalid_argument("signal dimension mismatch");
  GraphSignal y = GraphSignal::Zero(x.rows(), x.cols());
  shift_accumulate(graph, graph.values(), x, y);
  return y;
}

void save_edge_list(const GraphShiftOperator& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "n=" << graph.size() << '\n';
  char buf[64];
  for (const auto& e : graph.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    out << e.row << ' ' << e.col << ' ' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

GraphShiftOperator load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("n=", 0) != 0)
    throw std::invalid_argument("edge list must start with n=<count>");
  const std::size_t n = std::stoul(line.substr(2));
  std::vector<GraphEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::uint64_t i = 0, j = 0;
    double w = 0.0;
    if (!(row >> i >> j >> w)) throw std::invalid_argument("malformed edge line: " + line);
    entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
  }
  return GraphShiftOperator::from_entries(n, std::move(entries));
}

}  // namespace airgnn
