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

#include "airgnn/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace airgnn {
namespace {

struct KeySpec {
  const char* key;
  const char* source_localization;
  const char* flocking;
  const char* doc;
};

// Canonical key order; this is also the order of the resolved config.
const KeySpec kKeys[] = {
    {"task", "source_localization", "flocking", "source_localization | flocking"},
    {"seed", "1", "1", "master seed; AIRGNN_SEED overrides it"},
    {"output_dir", "runs/source_localization", "runs/flocking", "directory for all outputs"},
    // graph
    {"nodes", "100", "50", "graph size (robots for flocking)"},
    {"communities", "10", "10", "SBM communities = classes"},
    {"p_intra", "0.8", "0.8", "SBM intra-community edge probability"},
    {"p_inter", "0.2", "0.2", "SBM inter-community edge probability"},
    {"comm_radius", "1.5", "1.5", "flocking communication radius (m)"},
    // source localization data
    {"samples", "15000", "15000", "diffusion samples"},
    {"train_count", "10000", "10000", "training samples"},
    {"validation_count", "2500", "2500", "validation samples"},
    {"test_count", "2500", "2500", "test samples"},
    {"tau_min", "1", "1", "smallest diffusion time"},
    {"tau_max", "100", "100", "largest diffusion time"},
    {"diffusion_noise_sigma", "0.01", "0.01", "std of the additive diffusion noise"},
    {"normalize_inputs", "true", "true",
     "scale every input column to unit mean square over the train split"},
    // flocking data
    {"trajectories", "450", "450", "expert trajectories"},
    {"train_trajectories", "400", "400", "training trajectories"},
    {"validation_trajectories", "25", "25", "validation trajectories"},
    {"test_trajectories", "25", "25", "test trajectories"},
    {"steps", "100", "100", "control steps per trajectory"},
    {"dt", "0.01", "0.01", "integration step (s)"},
    {"max_acceleration", "10", "10", "per-component acceleration clamp (m/s^2)"},
    {"potential_cutoff", "1", "1", "collision potential cutoff (m)"},
    {"max_initial_speed", "3", "3", "initial velocity components in [-v, v] (m/s)"},
    {"min_distance", "0.1", "0.1", "minimum initial robot spacing (m)"},
    {"target_degree", "6", "6", "mean degree used to size the initial disc"},
    {"normalize_shift", "true", "true",
     "divide each flocking communication graph by its spectral radius (source localization always does)"},
    {"max_attempts", "1000", "1000", "redraw limit per trajectory"},
    // channel
    {"fading_scale", "1", "1", "Rayleigh scale delta"},
    {"snr_db", "40", "40", "receiver SNR in dB"},
    {"fading_mode", "multiply", "multiply", "replace | multiply the nominal edge weight"},
    {"per_filter_channels", "false", "false", "independent gains per input feature"},
    // architecture
    {"layers", "2", "1", "graph filter layers"},
    {"features", "64", "32", "filters per layer"},
    {"filter_order", "5", "5", "K, number of shifts per filter"},
    {"nonlinearity", "relu", "tanh", "relu | tanh | identity"},
    {"readout_order", "0", "0", "K of the final linear layer"},
    // training
    {"loss", "cross_entropy", "mse", "cross_entropy | mse"},
    {"optimizer", "adam", "adam", "adam | sgd"},
    {"schedule", "constant", "constant", "constant | inverse | inverse_sqrt"},
    {"learning_rate", "0.001", "0.0005", "step size"},
    {"beta1", "0.9", "0.9", "ADAM first-moment decay"},
    {"beta2", "0.999", "0.999", "ADAM second-moment decay"},
    {"epsilon", "1e-08", "1e-08", "ADAM epsilon"},
    {"batch_size", "50", "20", "samples per iteration"},
    {"iterations", "3000", "2000", "training iterations T"},
    {"restarts", "1", "1", "independent runs; best validation loss is kept"},
    {"init", "uniform_fan_in", "uniform_fan_in", "uniform_fan_in | constant"},
    {"init_constant", "0", "0", "coefficient value for init = constant"},
    {"train_channel", "air", "air", "air | ideal channels during training"},
    {"record_every", "0", "0", "expected-loss diagnostics cadence (0 = off)"},
    {"expected_loss_draws", "8", "8", "channel draws per expected-loss diagnostic"},
    {"grad_norm_draws", "0", "0", "channel draws per gradient-norm diagnostic (0 = off)"},
    {"validation_draws", "4", "4", "channel draws for the validation loss"},
    {"record_wall_time", "false", "false", "fill wall_ms (makes CSVs non-reproducible)"},
    {"checkpoint_every", "0", "0", "write train_state every this many iterations (0 = end only)"},
    {"resume", "false", "false", "continue from train_state in output_dir"},
    // evaluation
    {"eval_mode", "airgnn", "airgnn", "airgnn | gnn_ideal | gnn_with_channel"},
    {"redraws", "10", "10", "channel re-draws per evaluation"},
    {"delta_list", "0.5,1,2", "0.5,1,2", "fading scales of sweep-delta"},
    // gradient check
    {"gradcheck_instances", "20", "20", "random instances"},
    {"gradcheck_max_nodes", "12", "12", "largest instance graph"},
    {"gradcheck_step", "1e-06", "1e-06", "central difference step"},
    {"gradcheck_tolerance", "1e-05", "1e-05", "max relative error"},
    {"gradcheck_flip", "-1", "-1", "test hook: negate this flat gradient entry (-1 = off)"},
    // convergence
    {"convergence_iterations", "256,1024", "256,1024", "horizons T"},
    {"convergence_seeds", "10", "10", "seeds averaged"},
    {"lipschitz_constant", "0", "0", "C_L surrogate (0 = empirical Hessian estimate at A_0)"},
    {"smoothness_draws", "4", "4", "channel draws averaged by the C_L estimate"},
    {"smoothness_iterations", "20", "20", "power iterations of the C_L estimate"},
    {"gradient_bound", "0", "0", "C_g surrogate (0 = empirical probe)"},
    {"probe_iterations", "100", "100", "draws of the C_g probe"},
    {"optimal_loss_bound", "0", "0", "lower bound L* on the expected loss"},
    {"initial_loss_draws", "16", "16", "channel draws for L(A_0)"},
    {"grad_norm_points", "8", "8", "checkpoints per run at which the gradient norm is estimated"},
    {"convergence_grad_draws", "256", "256", "M, channel draws per gradient-norm estimate"},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& spec : kKeys)
    if (key == spec.key) return &spec;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE)
    throw ConfigError("config key '" + key + "': not a number: '" + text + "'");
  return v;
}

std::uint64_t parse_integer(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  if (text.empty() || text[0] == '-')
    throw ConfigError("config key '" + key + "': not a non-negative integer: '" + text + "'");
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE)
    throw ConfigError("config key '" + key + "': not a non-negative integer: '" + text + "'");
  return v;
}

}  // namespace

Config Config::defaults(std::string_view task) {
  bool flock = false;
  if (task == "flocking")
    flock = true;
  else if (task != "source_localization")
    throw ConfigError("unknown task '" + std::string(task) + "'");
  Config c;
  for (const auto& spec : kKeys) c.values_[spec.key] = flock ? spec.flocking : spec.source_localization;
  return c;
}

Config Config::parse(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string task = "source_localization";
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "task") task = value;
    entries.emplace_back(std::move(key), std::move(value));
  }
  Config c = defaults(task);
  for (const auto& [k, v] : entries) c.set(k, v);
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
  if (key == "task" && value != values_.at("task"))
    throw ConfigError("task cannot be changed after defaults are applied");
  values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& Config::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double Config::real(const std::string& key) const { return parse_real(key, str(key)); }

std::uint64_t Config::integer(const std::string& key) const {
  return parse_integer(key, str(key));
}

bool Config::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(str(key))) out.push_back(parse_real(key, item));
  return out;
}

std::vector<std::size_t> Config::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(str(key)))
    out.push_back(static_cast<std::size_t>(parse_integer(key, item)));
  return out;
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& spec : kKeys) {
    out += spec.key;
    out += " = ";
    out += values_.at(spec.key);
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> Config::documentation() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : kKeys) out.emplace_back(spec.key, spec.doc);
  return out;
}

}  // namespace airgnn
