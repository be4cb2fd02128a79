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

#include "airgnn/dataset.hpp"

#include <cstdio>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "airgnn/binary_io.hpp"

namespace airgnn {

namespace {

constexpr char kDatasetMagic[5] = "AGDS";
constexpr std::uint64_t kDatasetVersion = 2;

void write_matrix(std::ostream& out, const Matrix& m) {
  binary::write_u64(out, static_cast<std::uint64_t>(m.rows()));
  binary::write_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) binary::write_f64(out, m.data()[i]);
}

Matrix read_matrix(std::istream& in) {
  const auto rows = static_cast<Eigen::Index>(binary::read_u64(in));
  const auto cols = static_cast<Eigen::Index>(binary::read_u64(in));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = binary::read_f64(in);
  return m;
}

void write_indices(std::ostream& out, const std::vector<std::size_t>& v) {
  binary::write_u64(out, v.size());
  for (auto i : v) binary::write_u64(out, i);
}

std::vector<std::size_t> read_indices(std::istream& in) {
  std::vector<std::size_t> v(binary::read_u64(in));
  for (auto& i : v) i = binary::read_u64(in);
  return v;
}

}  // namespace

double mean_square_input(const SupervisedData& data, std::span<const std::size_t> indices) {
  double total = 0.0;
  double count = 0.0;
  for (std::size_t idx : indices) {
    const auto& x = data.examples.at(idx).x;
    total += x.squaredNorm();
    count += static_cast<double>(x.size());
  }
  return count > 0.0 ? total / count : 0.0;
}

void scale_inputs(TaskDataset& dataset, double factor) {
  if (!std::isfinite(factor) || factor <= 0.0) throw std::invalid_argument("scale must be positive");
  for (auto& ex : dataset.data.examples) ex.x *= factor;
  dataset.reference_power *= factor * factor;
  if (dataset.input_scale.empty() && !dataset.data.examples.empty())
    dataset.input_scale.assign(static_cast<std::size_t>(dataset.data.examples.front().x.cols()), 1.0);
  for (auto& s : dataset.input_scale) s *= factor;
}

void scale_input_columns(TaskDataset& dataset, std::span<const double> factors) {
  if (dataset.data.examples.empty()) throw std::invalid_argument("empty dataset");
  const auto width = dataset.data.examples.front().x.cols();
  if (static_cast<Eigen::Index>(factors.size()) != width)
    throw std::invalid_argument("one scale factor per input column required");
  for (double f : factors)
    if (!std::isfinite(f) || f <= 0.0) throw std::invalid_argument("scale must be positive");
  const Eigen::Map<const Eigen::RowVectorXd> row(factors.data(), width);
  for (auto& ex : dataset.data.examples) ex.x = ex.x.array().rowwise() * row.array();
  if (dataset.input_scale.empty()) dataset.input_scale.assign(factors.size(), 1.0);
  for (std::size_t f = 0; f < factors.size(); ++f) dataset.input_scale[f] *= factors[f];
  if (!dataset.train.empty()) dataset.reference_power = mean_square_input(dataset.data, dataset.train);
}

std::vector<double> unit_power_factors(const TaskDataset& dataset) {
  if (dataset.data.examples.empty() || dataset.train.empty())
    throw std::invalid_argument("unit power factors need a train split");
  const auto width = dataset.data.examples.front().x.cols();
  Eigen::RowVectorXd sums = Eigen::RowVectorXd::Zero(width);
  double rows = 0.0;
  for (std::size_t idx : dataset.train) {
    const auto& x = dataset.data.examples.at(idx).x;
    sums += x.colwise().squaredNorm();
    rows += static_cast<double>(x.rows());
  }
  std::vector<double> factors(static_cast<std::size_t>(width), 1.0);
  for (Eigen::Index f = 0; f < width; ++f)
    if (sums(f) > 0.0) factors[static_cast<std::size_t>(f)] = 1.0 / std::sqrt(sums(f) / rows);
  return factors;
}

void save_dataset(const TaskDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  binary::write_magic(out, kDatasetMagic, kDatasetVersion);
  binary::write_u64(out, ds.task.size());
  out.write(ds.task.data(), static_cast<std::streamsize>(ds.task.size()));
  binary::write_u64(out, ds.data.graphs.empty() ? 0 : ds.data.graphs.front().size());
  binary::write_u64(out, ds.data.examples.size());
  binary::write_u64(out, ds.train.size());
  binary::write_u64(out, ds.validation.size());
  binary::write_u64(out, ds.test.size());
  binary::write_f64(out, ds.reference_power);
  binary::write_u64(out, ds.input_scale.size());
  for (double s : ds.input_scale) binary::write_f64(out, s);
  write_indices(out, ds.sources);
  binary::write_u64(out, ds.data.graphs.size());
  for (const auto& g : ds.data.graphs) {
    binary::write_u64(out, g.size());
    binary::write_u64(out, g.nnz());
    for (const auto& e : g.entries()) {
      binary::write_u64(out, e.row);
      binary::write_u64(out, e.col);
      binary::write_f64(out, e.value);
    }
  }
  binary::write_u64(out, ds.data.examples.size());
  for (const auto& ex : ds.data.examples) {
    binary::write_u64(out, ex.graph);
    binary::write_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(ex.label)));
    write_matrix(out, ex.x);
    write_matrix(out, ex.target);
  }
  write_indices(out, ds.train);
  write_indices(out, ds.validation);
  write_indices(out, ds.test);
  binary::write_u64(out, ds.test_positions.size());
  for (std::size_t i = 0; i < ds.test_positions.size(); ++i) {
    write_matrix(out, ds.test_positions[i]);
    write_matrix(out, ds.test_velocities[i]);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TaskDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  if (binary::read_magic(in, kDatasetMagic) != kDatasetVersion)
    throw std::runtime_error("unsupported dataset version");
  TaskDataset ds;
  ds.task.resize(binary::read_u64(in));
  in.read(ds.task.data(), static_cast<std::streamsize>(ds.task.size()));
  binary::read_u64(in);  // node count of the first graph
  for (int i = 0; i < 4; ++i) binary::read_u64(in);  // counts, repeated below
  ds.reference_power = binary::read_f64(in);
  ds.input_scale.resize(binary::read_u64(in));
  for (auto& s : ds.input_scale) s = binary::read_f64(in);
  ds.sources = read_indices(in);
  ds.data.graphs.resize(binary::read_u64(in));
  for (auto& g : ds.data.graphs) {
    const auto n = binary::read_u64(in);
    std::vector<GraphEntry> entries(binary::read_u64(in));
    for (auto& e : entries) {
      e.row = static_cast<std::uint32_t>(binary::read_u64(in));
      e.col = static_cast<std::uint32_t>(binary::read_u64(in));
      e.value = binary::read_f64(in);
    }
    g = GraphShiftOperator::from_entries(n, std::move(entries));
  }
  ds.data.examples.resize(binary::read_u64(in));
  for (auto& ex : ds.data.examples) {
    ex.graph = static_cast<std::uint32_t>(binary::read_u64(in));
    ex.label = static_cast<int>(static_cast<std::int64_t>(binary::read_u64(in)));
    ex.x = read_matrix(in);
    ex.target = read_matrix(in);
  }
  ds.train = read_indices(in);
  ds.validation = read_indices(in);
  ds.test = read_indices(in);
  const auto states = binary::read_u64(in);
  for (std::uint64_t i = 0; i < states; ++i) {
    ds.test_positions.push_back(read_matrix(in));
    ds.test_velocities.push_back(read_matrix(in));
  }
  return ds;
}

void export_dataset_csv(const TaskDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  std::vector<const char*> split(ds.data.examples.size(), "none");
  for (auto i : ds.train) split[i] = "train";
  for (auto i : ds.validation) split[i] = "validation";
  for (auto i : ds.test) split[i] = "test";
  const auto& first = ds.data.examples.front();
  out << "sample,split,graph,label,node";
  for (Eigen::Index f = 0; f < first.x.cols(); ++f) out << ",x" << f;
  for (Eigen::Index f = 0; f < first.target.cols(); ++f) out << ",target" << f;
  out << '\n';
  char buf[40];
  for (std::size_t s = 0; s < ds.data.examples.size(); ++s) {
    const auto& ex = ds.data.examples[s];
    for (Eigen::Index i = 0; i < ex.x.rows(); ++i) {
      out << s << ',' << split[s] << ',' << ex.graph << ',' << ex.label << ',' << i;
      for (Eigen::Index f = 0; f < ex.x.cols(); ++f) {
        std::snprintf(buf, sizeof buf, "%.17g", ex.x(i, f));
        out << ',' << buf;
      }
      for (Eigen::Index f = 0; f < ex.target.cols(); ++f) {
        std::snprintf(buf, sizeof buf, "%.17g", ex.target(i, f));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace airgnn
