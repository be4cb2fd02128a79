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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "airgnn/decentralized.hpp"
#include "airgnn/experiment.hpp"

namespace py = pybind11;
using namespace airgnn;

namespace {

using LayerSpec = std::tuple<std::size_t, std::size_t, std::size_t, std::string>;

Architecture to_architecture(const std::vector<LayerSpec>& layers) {
  Architecture arch;
  for (const auto& [in, out, order, act] : layers) arch.layers.push_back({in, out, order, parse_activation(act)});
  arch.validate();
  return arch;
}

std::vector<LayerSpec> from_architecture(const Architecture& arch) {
  std::vector<LayerSpec> out;
  for (const auto& l : arch.layers) out.emplace_back(l.in, l.out, l.order, std::string(to_string(l.activation)));
  return out;
}

py::dict summary_dict(const MetricSummary& s) {
  py::dict d;
  d["metric"] = s.metric;
  d["mean"] = s.mean;
  d["standard_error"] = s.standard_error;
  d["values"] = s.values;
  return d;
}

Config make_config(const std::string& task, const std::map<std::string, std::string>& settings) {
  Config c = Config::defaults(task);
  for (const auto& [k, v] : settings) c.set(k, v);
  return c;
}

// Runs one experiment command and returns its headline numbers.
py::dict run_command(const std::string& command, const std::map<std::string, std::string>& settings,
                     const std::string& task) {
  const Config c = make_config(task, settings);
  py::dict out;
  out["command"] = command;
  if (command == "gen-data") {
    const auto r = cmd_gen_data(c);
    out["dataset_hash"] = r.dataset_hash;
    out["samples"] = r.samples;
  } else if (command == "train") {
    const auto r = cmd_train(c);
    out["best_restart"] = r.result.best_restart;
    out["validation_losses"] = r.result.validation_losses;
    std::vector<double> losses;
    for (const auto& rec : r.result.records) losses.push_back(rec.loss);
    out["losses"] = losses;
  } else if (command == "eval") {
    const auto r = cmd_eval(c);
    out["summary"] = summary_dict(r.summary);
    out["test_loss"] = summary_dict(r.test_loss);
  } else if (command == "gradcheck") {
    const auto r = cmd_gradcheck(c);
    out["passed"] = r.passed;
    out["max_relative_error"] = r.max_relative_error;
    out["median_relative_error"] = r.median_relative_error;
    out["failures"] = r.failures.size();
  } else if (command == "convergence") {
    const auto r = cmd_convergence(c);
    out["horizons"] = r.horizons;
    out["mean_min_grad_norm_sq"] = r.mean_min_grad_norm_sq;
    out["decay_ratio"] = r.decay_ratio;
    out["tail_loss"] = r.tail_loss;
    out["quarter_tail_loss"] = r.quarter_tail_loss;
  } else if (command == "sweep-delta") {
    const auto r = cmd_sweep_delta(c);
    py::list rows;
    for (const auto& row : r.rows) {
      py::dict d = summary_dict(row.summary);
      d["delta"] = row.delta;
      d["mode"] = std::string(to_string(row.mode));
      rows.append(d);
    }
    out["rows"] = rows;
  } else {
    throw py::value_error("unknown command: " + command);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_airgnn, m) {
  m.doc() = "AirGNN: graph neural networks over fading and noisy wireless channels";
  m.attr("__version__") = std::string(version());

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<GraphShiftOperator>(m, "Graph")
      .def_static("from_dense", &GraphShiftOperator::from_dense, py::arg("matrix"))
      .def_property_readonly("size", &GraphShiftOperator::size)
      .def_property_readonly("nnz", &GraphShiftOperator::nnz)
      .def("to_dense", &GraphShiftOperator::to_dense)
      .def("is_symmetric", &GraphShiftOperator::is_symmetric)
      .def("is_connected", &GraphShiftOperator::is_connected)
      .def("spectral_radius", [](const GraphShiftOperator& g) { return spectral_radius(g).value; })
      .def("shift", [](const GraphShiftOperator& g, const Matrix& x) { return ideal_shift(g, x); },
           py::arg("x"));

  m.def("sbm_graph", &generate_sbm, py::arg("n"), py::arg("communities"), py::arg("p_intra"),
        py::arg("p_inter"), py::arg("seed"));
  m.def("geometric_graph", &generate_geometric, py::arg("positions"), py::arg("radius"));
  m.def("normalize_by_spectral_radius", &normalize_by_spectral_radius, py::arg("graph"));

  py::class_<ChannelModel>(m, "ChannelModel")
      .def(py::init([](double fading_scale, double snr_db, const std::string& fading_mode,
                       double reference_power, bool per_filter_channels, bool ideal) {
             ChannelModel c;
             c.fading_scale = fading_scale;
             c.snr_db = snr_db;
             c.fading_mode = parse_fading_mode(fading_mode);
             c.reference_power = reference_power;
             c.per_filter_channels = per_filter_channels;
             c.ideal = ideal;
             c.validate();
             return c;
           }),
           py::arg("fading_scale") = 1.0, py::arg("snr_db") = 40.0, py::arg("fading_mode") = "replace",
           py::arg("reference_power") = 1.0, py::arg("per_filter_channels") = false,
           py::arg("ideal") = false)
      .def_readwrite("fading_scale", &ChannelModel::fading_scale)
      .def_readwrite("snr_db", &ChannelModel::snr_db)
      .def_readwrite("reference_power", &ChannelModel::reference_power)
      .def_readwrite("per_filter_channels", &ChannelModel::per_filter_channels)
      .def_readwrite("ideal", &ChannelModel::ideal)
      .def_property(
          "fading_mode", [](const ChannelModel& c) { return std::string(to_string(c.fading_mode)); },
          [](ChannelModel& c, const std::string& s) { c.fading_mode = parse_fading_mode(s); });
  m.def("noise_variance", &noise_variance, py::arg("model"));

  py::class_<AirGnnParameters>(m, "Parameters")
      .def_property_readonly("architecture",
                             [](const AirGnnParameters& p) { return from_architecture(p.architecture()); })
      .def_property_readonly("size", &AirGnnParameters::size)
      .def("flatten", &AirGnnParameters::flatten)
      .def("assign", [](AirGnnParameters& p, const std::vector<double>& flat) { p.assign(flat); },
           py::arg("flat"))
      .def("alpha", [](const AirGnnParameters& p, std::size_t layer, std::size_t g, std::size_t f,
                       std::size_t k) { return p.layers.at(layer).alpha(g, f, k); })
      .def("to_json", &parameters_to_json)
      .def_static("from_json", &parameters_from_json, py::arg("text"))
      .def("__eq__", [](const AirGnnParameters& a, const AirGnnParameters& b) { return a == b; });

  m.def(
      "init_parameters",
      [](const std::vector<LayerSpec>& layers, std::uint64_t seed, const std::string& scheme, double constant) {
        Rng rng(seed);
        const InitScheme s = scheme == "constant" ? InitScheme::kConstant : InitScheme::kUniformFanIn;
        if (scheme != "constant" && scheme != "uniform_fan_in") throw py::value_error("unknown scheme " + scheme);
        return init_parameters(to_architecture(layers), s, rng, constant);
      },
      py::arg("layers"), py::arg("seed") = 1, py::arg("scheme") = "uniform_fan_in", py::arg("constant") = 0.0,
      "layers: list of (in, out, order, activation) with activation in relu, tanh, identity");

  py::class_<ChannelRealization, std::shared_ptr<ChannelRealization>>(m, "Realization")
      .def("__eq__", [](const ChannelRealization& a, const ChannelRealization& b) { return a == b; });

  m.def(
      "sample_realization",
      [](const GraphShiftOperator& g, const AirGnnParameters& p, const ChannelModel& model, std::uint64_t master,
         std::uint64_t a, std::uint64_t b) {
        return std::make_shared<ChannelRealization>(sample_realization(g, p.architecture(), model, {master, a, b}));
      },
      py::arg("graph"), py::arg("params"), py::arg("model"), py::arg("seed"), py::arg("a") = 0, py::arg("b") = 0);
  m.def(
      "ideal_realization",
      [](const GraphShiftOperator& g, const AirGnnParameters& p) {
        return std::make_shared<ChannelRealization>(ideal_realization(g, p.architecture()));
      },
      py::arg("graph"), py::arg("params"));

  m.def(
      "forward",
      [](const GraphShiftOperator& g, const Matrix& x, const AirGnnParameters& p,
         const std::shared_ptr<ChannelRealization>& r) { return forward_output(g, x, p, *r); },
      py::arg("graph"), py::arg("x"), py::arg("params"), py::arg("realization"));
  m.def(
      "gradient",
      [](const GraphShiftOperator& g, const Matrix& x, const AirGnnParameters& p,
         const std::shared_ptr<ChannelRealization>& r, const Matrix& output_grad) {
        auto fwd = forward(g, x, p, r);
        return backward(g, fwd.tape, p, output_grad).flatten();
      },
      py::arg("graph"), py::arg("x"), py::arg("params"), py::arg("realization"), py::arg("output_grad"),
      "Flat gradient of <output_grad, forward(x)> with respect to every coefficient.");
  m.def(
      "decentralized_forward",
      [](const GraphShiftOperator& g, const Matrix& x, const AirGnnParameters& p,
         const std::shared_ptr<ChannelRealization>& r) {
        DecentralizedOptions opt;
        opt.audit = true;
        const auto res = run_decentralized(g, x, p, *r, opt);
        return std::make_tuple(res.output, res.log.rounds, locality_audit(res.log, g));
      },
      py::arg("graph"), py::arg("x"), py::arg("params"), py::arg("realization"),
      "Per-node execution; returns (output, rounds, locality_audit_passed).");

  m.def("run_command", &run_command, py::arg("command"), py::arg("settings"),
        py::arg("task") = "source_localization",
        "Run gen-data, train, eval, gradcheck, convergence or sweep-delta with config overrides.");
}
