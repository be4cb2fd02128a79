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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "airgnn/binary_io.hpp"
#include "airgnn/channel.hpp"
#include "airgnn/model.hpp"

namespace airgnn {

namespace {

constexpr int kCheckpointSchema = 1;
constexpr std::uint64_t kRealizationVersion = 1;
constexpr char kRealizationMagic[5] = "AGCR";

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::invalid_argument("bad hex float: " + s);
  return v;
}

}  // namespace

std::string parameters_to_json(const AirGnnParameters& params) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kCheckpointSchema;
  doc["layout"] = "row-major [g][f][k]";
  auto layers = nlohmann::ordered_json::array();
  for (const auto& bank : params.layers) {
    const auto& s = bank.shape();
    nlohmann::ordered_json layer;
    layer["in"] = s.in;
    layer["out"] = s.out;
    layer["order"] = s.order;
    layer["nonlinearity"] = std::string(to_string(s.activation));
    auto coeffs = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < s.in; ++g)
      for (std::size_t f = 0; f < s.out; ++f)
        for (std::size_t k = 0; k <= s.order; ++k) coeffs.push_back(hex_double(bank.alpha(g, f, k)));
    layer["coefficients"] = std::move(coeffs);
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  return doc.dump(1);
}

AirGnnParameters parameters_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.at("schema_version").get<int>() != kCheckpointSchema)
    throw std::invalid_argument("unsupported checkpoint schema version");
  Architecture arch;
  for (const auto& layer : doc.at("layers")) {
    arch.layers.push_back({layer.at("in").get<std::size_t>(), layer.at("out").get<std::size_t>(),
                           layer.at("order").get<std::size_t>(),
                           parse_activation(layer.at("nonlinearity").get<std::string>())});
  }
  AirGnnParameters params = AirGnnParameters::zeros(arch);
  std::vector<double> flat;
  for (const auto& layer : doc.at("layers"))
    for (const auto& c : layer.at("coefficients")) flat.push_back(parse_hex_double(c.get<std::string>()));
  params.assign(flat);
  return params;
}

void save_parameters(const AirGnnParameters& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << parameters_to_json(params) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

AirGnnParameters load_parameters(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parameters_from_json(buf.str());
}

void save_realization(const ChannelRealization& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  binary::write_magic(out, kRealizationMagic, kRealizationVersion);
  binary::write_u64(out, r.nodes);
  binary::write_u64(out, r.nnz);
  binary::write_u64(out, r.layers.size());
  for (const auto& layer : r.layers) {
    binary::write_u64(out, layer.hops.size());
    for (const auto& hop : layer.hops) {
      binary::write_u64(out, hop.gains.size());
      binary::write_u64(out, static_cast<std::uint64_t>(hop.noise.cols()));
      for (const auto& g : hop.gains)
        for (double v : g) binary::write_f64(out, v);
      for (Eigen::Index i = 0; i < hop.noise.size(); ++i) binary::write_f64(out, hop.noise.data()[i]);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ChannelRealization load_realization(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (binary::read_magic(in, kRealizationMagic) != kRealizationVersion)
    throw std::runtime_error("unsupported realization version");
  ChannelRealization r;
  r.nodes = binary::read_u64(in);
  r.nnz = binary::read_u64(in);
  r.layers.resize(binary::read_u64(in));
  for (auto& layer : r.layers) {
    layer.hops.resize(binary::read_u64(in));
    for (auto& hop : layer.hops) {
      hop.gains.resize(binary::read_u64(in));
      const auto cols = static_cast<Eigen::Index>(binary::read_u64(in));
      for (auto& g : hop.gains) {
        g.resize(r.nnz);
        for (double& v : g) v = binary::read_f64(in);
      }
      hop.noise.resize(static_cast<Eigen::Index>(r.nodes), cols);
      for (Eigen::Index i = 0; i < hop.noise.size(); ++i) hop.noise.data()[i] = binary::read_f64(in);
    }
  }
  return r;
}

}  // namespace airgnn
