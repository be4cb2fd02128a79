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

#include "airgnn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace airgnn {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path output_dir(const Config& config) {
  fs::path dir = config.str("output_dir");
  fs::create_directories(dir);
  return dir;
}

// Re-throws library argument errors raised while translating the config as
// configuration errors.
template <typename F>
auto as_config_error(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunManifest start_manifest(const std::string& command, const Config& config) {
  RunManifest m;
  m.command = command;
  m.config_text = config.to_text();
  m.version = std::string(version());
  m.master_seed = config.seed();
  m.started = utc_now();
  return m;
}

void finish_manifest(RunManifest& m, const fs::path& dir, const std::string& run_name) {
  write_text(dir / (run_name + ".resolved.cfg"), m.config_text);
  m.outputs.push_back(run_name + ".resolved.cfg");
  m.finished = utc_now();
  save_manifest(m, dir / files::manifest(run_name));
}

TaskDataset load_task_dataset(const Config& config, const fs::path& dir) {
  const fs::path path = dir / files::kDataset;
  if (!fs::exists(path))
    throw std::runtime_error("missing dataset " + path.string() + " (run gen-data first)");
  TaskDataset ds = load_dataset(path);
  if (ds.task != config.task())
    throw ConfigError("dataset task '" + ds.task + "' does not match config task '" +
                      config.task() + "'");
  return ds;
}

std::size_t output_width(const Config& config, const TaskDataset& ds) {
  if (config.task() == "source_localization") return ds.sources.size();
  if (ds.data.examples.empty()) throw std::runtime_error("empty dataset");
  return static_cast<std::size_t>(ds.data.examples.front().target.cols());
}

std::size_t input_width(const TaskDataset& ds) {
  if (ds.data.examples.empty()) throw std::runtime_error("empty dataset");
  return static_cast<std::size_t>(ds.data.examples.front().x.cols());
}

std::string channel_tag(const Config& config) {
  const std::string& tag = config.str("train_channel");
  if (tag != "air" && tag != "ideal")
    throw ConfigError("train_channel must be air or ideal, got '" + tag + "'");
  return tag;
}

AirGnnParameters load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw std::runtime_error("missing checkpoint " + path.string());
  return load_parameters(path);
}

void check_checkpoint(const Config& config, const TaskDataset& ds, const AirGnnParameters& p) {
  const auto arch = p.architecture();
  if (arch.input_width() != input_width(ds) || arch.output_width() != output_width(config, ds))
    throw ConfigError("checkpoint does not match the " + config.task() + " task");
}

std::string delta_checkpoint(double delta) {
  return "checkpoint_air_delta_" + short_num(delta) + ".json";
}

MetricSummary summarize(std::string metric, std::vector<double> values) {
  MetricSummary s;
  s.metric = std::move(metric);
  s.values = std::move(values);
  double sum = 0.0;
  for (double v : s.values) sum += v;
  const auto r = static_cast<double>(s.values.size());
  s.mean = sum / r;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.standard_error = std::sqrt(ss / (r - 1.0) / r);
  }
  return s;
}

std::string metric_row(std::string_view mode, double delta, const MetricSummary& s) {
  return std::string(mode) + "," + num(delta) + "," + s.metric + "," + num(s.mean) + "," +
         num(s.standard_error) + "," + std::to_string(s.values.size()) + "\n";
}

constexpr const char* kMetricHeader = "mode,delta,metric,mean,stderr,redraws\n";

// Drops the header line of records_to_csv output.
std::string csv_rows(const std::string& csv) {
  const auto nl = csv.find('\n');
  return nl == std::string::npos ? std::string{} : csv.substr(nl + 1);
}

}  // namespace

std::string_view version() { return AIRGNN_VERSION; }

void save_manifest(const RunManifest& m, const fs::path& path) {
  json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["master_seed"] = m.master_seed;
  json streams = json::object();
  for (const auto& [name, seed] : m.substreams) streams[name] = seed;
  j["substreams"] = streams;
  j["dataset_hash"] = m.dataset_hash;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["outputs"] = m.outputs;
  j["config"] = m.config_text;
  write_text(path, j.dump(2) + "\n");
}

RunManifest load_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const auto& [name, seed] : j.at("substreams").items())
      m.substreams[name] = seed.get<std::uint64_t>();
    m.dataset_hash = j.at("dataset_hash").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.config_text = j.at("config").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw ConfigError("malformed manifest " + path.string() + ": " + e.what());
  }
}

void apply_environment(Config& config) {
  if (const char* seed = std::getenv("AIRGNN_SEED"); seed && *seed) {
    config.set("seed", seed);
    config.integer("seed");
  }
}

DiffusionConfig diffusion_config(const Config& config) {
  DiffusionConfig d;
  d.nodes = config.count("nodes");
  d.communities = config.count("communities");
  d.p_intra = config.real("p_intra");
  d.p_inter = config.real("p_inter");
  d.samples = config.count("samples");
  d.train = config.count("train_count");
  d.validation = config.count("validation_count");
  d.test = config.count("test_count");
  d.tau_min = config.count("tau_min");
  d.tau_max = config.count("tau_max");
  d.noise_sigma = config.real("diffusion_noise_sigma");
  return d;
}

FlockingConfig flocking_config(const Config& config) {
  FlockingConfig f;
  f.robots = config.count("nodes");
  f.trajectories = config.count("trajectories");
  f.steps = config.count("steps");
  f.train = config.count("train_trajectories");
  f.validation = config.count("validation_trajectories");
  f.test = config.count("test_trajectories");
  f.dt = config.real("dt");
  f.max_acceleration = config.real("max_acceleration");
  f.potential_cutoff = config.real("potential_cutoff");
  f.comm_radius = config.real("comm_radius");
  f.max_initial_speed = config.real("max_initial_speed");
  f.min_distance = config.real("min_distance");
  f.target_degree = config.real("target_degree");
  f.max_attempts = config.count("max_attempts");
  f.normalize_shift = config.flag("normalize_shift");
  as_config_error([&] { f.validate(); });
  return f;
}

Architecture build_architecture(const Config& config, std::size_t in, std::size_t out) {
  return as_config_error([&] {
    Architecture arch;
    const std::size_t layers = config.count("layers");
    const std::size_t width = config.count("features");
    const std::size_t order = config.count("filter_order");
    const Activation act = parse_activation(config.str("nonlinearity"));
    std::size_t prev = in;
    for (std::size_t l = 0; l < layers; ++l) {
      arch.layers.push_back({prev, width, order, act});
      prev = width;
    }
    arch.layers.push_back({prev, out, config.count("readout_order"), Activation::kIdentity});
    arch.validate();
    return arch;
  });
}

ChannelModel build_channel(const Config& config, double reference_power) {
  return as_config_error([&] {
    ChannelModel m;
    m.fading_scale = config.real("fading_scale");
    m.snr_db = config.real("snr_db");
    m.fading_mode = parse_fading_mode(config.str("fading_mode"));
    m.reference_power = reference_power;
    m.per_filter_channels = config.flag("per_filter_channels");
    m.validate();
    return m;
  });
}

OptimizerConfig build_optimizer(const Config& config) {
  return as_config_error([&] {
    OptimizerConfig o;
    o.kind = parse_optimizer(config.str("optimizer"));
    o.schedule = parse_schedule(config.str("schedule"));
    o.step_size = config.real("learning_rate");
    o.beta1 = config.real("beta1");
    o.beta2 = config.real("beta2");
    o.epsilon = config.real("epsilon");
    o.validate();
    return o;
  });
}

Objective build_objective(const Config& config) {
  return as_config_error([&] {
    Objective o;
    o.loss = parse_loss(config.str("loss"));
    o.readout = o.loss == LossKind::kMse ? Readout::kPerNode : Readout::kMeanOverNodes;
    return o;
  });
}

TrainConfig build_train_config(const Config& config, const TaskDataset& dataset) {
  TrainConfig tc;
  tc.arch = build_architecture(config, input_width(dataset), output_width(config, dataset));
  tc.objective = build_objective(config);
  tc.optimizer = build_optimizer(config);
  tc.channel = channel_tag(config) == "air" ? build_channel(config, dataset.reference_power)
                                            : ChannelModel::ideal_channel();
  tc.iterations = config.count("iterations");
  tc.batch_size = config.count("batch_size");
  tc.seed = config.seed();
  tc.restarts = config.count("restarts");
  const std::string& init = config.str("init");
  if (init == "uniform_fan_in")
    tc.init = InitScheme::kUniformFanIn;
  else if (init == "constant")
    tc.init = InitScheme::kConstant;
  else
    throw ConfigError("init must be uniform_fan_in or constant, got '" + init + "'");
  tc.init_constant = config.real("init_constant");
  tc.record_every = config.count("record_every");
  tc.expected_loss_draws = config.count("expected_loss_draws");
  tc.grad_norm_draws = config.count("grad_norm_draws");
  tc.validation_draws = config.count("validation_draws");
  tc.record_wall_time = config.flag("record_wall_time");
  as_config_error([&] {
    tc.objective.validate(tc.arch);
    tc.validate();
  });
  return tc;
}

TaskDataset generate_dataset(const Config& config) {
  const std::string task = config.task();
  if (task == "source_localization") {
    if (!config.flag("normalize_shift"))
      throw ConfigError("source localization always uses the normalized shift operator");
    const auto d = diffusion_config(config);
    TaskDataset ds = as_config_error([&] { return make_source_localization(d, config.seed()); });
    if (config.flag("normalize_inputs")) scale_input_columns(ds, unit_power_factors(ds));
    return ds;
  }
  const auto f = flocking_config(config);
  TaskDataset ds = to_task_dataset(build_flock_dataset(f, config.seed()));
  if (config.flag("normalize_inputs")) scale_input_columns(ds, unit_power_factors(ds));
  return ds;
}

std::string_view to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kAirGnn: return "airgnn";
    case EvalMode::kGnnIdeal: return "gnn_ideal";
    case EvalMode::kGnnWithChannel: return "gnn_with_channel";
  }
  return "?";
}

EvalMode parse_eval_mode(std::string_view name) {
  if (name == "airgnn") return EvalMode::kAirGnn;
  if (name == "gnn_ideal") return EvalMode::kGnnIdeal;
  if (name == "gnn_with_channel") return EvalMode::kGnnWithChannel;
  throw ConfigError("unknown eval mode '" + std::string(name) + "'");
}

MetricSummary evaluate_condition(const Config& config, const TaskDataset& dataset,
                                 const AirGnnParameters& params, const ChannelModel& test_channel,
                                 std::size_t redraws, std::uint64_t seed) {
  if (redraws == 0) throw ConfigError("redraws must be positive");
  const bool classify = config.task() == "source_localization";
  const FlockingConfig fc = classify ? FlockingConfig{} : flocking_config(config);
  std::vector<SwarmState> initial;
  if (!classify)
    for (std::size_t e = 0; e < dataset.test_positions.size(); ++e)
      initial.push_back({dataset.test_positions[e], dataset.test_velocities[e], 0});
  auto one = [&](std::size_t r) {
    const std::uint64_t s = derive_seed(seed, StreamTag::kEvaluation, {r});
    if (classify) return classify_accuracy(params, dataset.data, dataset.test, test_channel, 1, s);
    return closed_loop_eval(params, test_channel, initial, fc, s, dataset.input_scale).mean;
  };
  std::vector<double> values;
  values.reserve(redraws);
  // Ideal channels are deterministic; every re-draw gives the same value.
  const double first = one(0);
  values.push_back(first);
  for (std::size_t r = 1; r < redraws; ++r) values.push_back(test_channel.ideal ? first : one(r));
  return summarize(classify ? "accuracy" : "velocity_variance", std::move(values));
}

namespace files {
std::string checkpoint(std::string_view tag) { return "checkpoint_" + std::string(tag) + ".json"; }
std::string train_record(std::string_view tag) {
  return "train_record_" + std::string(tag) + ".csv";
}
std::string train_state(std::string_view tag) {
  return "train_state_" + std::string(tag) + ".json";
}
std::string manifest(std::string_view command) { return std::string(command) + ".manifest.json"; }
}  // namespace files

GenDataOutcome cmd_gen_data(const Config& config, bool export_csv) {
  RunManifest m = start_manifest("gen-data", config);
  const fs::path dir = output_dir(config);
  const TaskDataset ds = generate_dataset(config);
  save_dataset(ds, dir / files::kDataset);
  m.outputs.push_back(files::kDataset);
  if (export_csv) {
    export_dataset_csv(ds, dir / files::kDatasetCsv);
    m.outputs.push_back(files::kDatasetCsv);
  }
  m.substreams["graph"] = derive_seed(config.seed(), StreamTag::kGraph, {});
  m.substreams["dataset"] = derive_seed(config.seed(), StreamTag::kDataset, {});
  m.dataset_hash = file_hash(dir / files::kDataset);
  finish_manifest(m, dir, "gen-data");
  GenDataOutcome out;
  out.dataset_hash = m.dataset_hash;
  out.samples = ds.data.examples.size();
  out.manifest = std::move(m);
  return out;
}

TrainOutcome cmd_train(const Config& config) {
  const std::string tag = channel_tag(config);
  RunManifest m = start_manifest("train", config);
  const fs::path dir = output_dir(config);
  const TaskDataset ds = load_task_dataset(config, dir);
  TrainConfig tc = build_train_config(config, ds);
  const std::size_t total = tc.iterations;
  const std::size_t every = config.count("checkpoint_every");
  const bool resume = config.flag("resume");
  if ((resume || every > 0) && tc.restarts != 1)
    throw ConfigError("resume and checkpoint_every require restarts = 1");

  const fs::path state_path = dir / files::train_state(tag);
  const fs::path record_path = dir / files::train_record(tag);
  std::optional<TrainState> state;
  std::string rows;
  std::vector<TrainRecord> records;
  if (resume) {
    if (!fs::exists(state_path)) throw std::runtime_error("missing train state " + state_path.string());
    state = load_train_state(state_path);
    if (fs::exists(record_path)) {
      std::istringstream in(csv_rows(read_text(record_path)));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (std::stoull(line.substr(0, line.find(','))) < state->next_iteration) rows += line + "\n";
      }
    }
  }

  TrainResult result;
  std::size_t start = state ? state->next_iteration : 0;
  if (start >= total && state) {
    result.params = state->params;
    result.final_state = *state;
  }
  while (start < total) {
    tc.iterations = every > 0 ? std::min(every, total - start) : total - start;
    result = train(tc, ds.data, ds.train, ds.validation, {}, state ? &*state : nullptr);
    rows += csv_rows(records_to_csv(result.records));
    records.insert(records.end(), result.records.begin(), result.records.end());
    state = result.final_state;
    if (every > 0) save_train_state(*state, state_path);
    start = state->next_iteration;
  }
  result.records = std::move(records);

  save_parameters(result.params, dir / files::checkpoint(tag));
  m.outputs.push_back(files::checkpoint(tag));
  if (tag == "air") {
    const std::string per_delta = delta_checkpoint(tc.channel.fading_scale);
    save_parameters(result.params, dir / per_delta);
    m.outputs.push_back(per_delta);
  }
  save_train_state(result.final_state, state_path);
  m.outputs.push_back(files::train_state(tag));
  write_text(record_path, "iter,loss,expected_loss,grad_norm_sq,wall_ms\n" + rows);
  m.outputs.push_back(files::train_record(tag));

  for (std::size_t r = 0; r < tc.restarts; ++r)
    m.substreams["restart_" + std::to_string(r)] = restart_seed(tc.seed, r);
  m.dataset_hash = file_hash(dir / files::kDataset);
  finish_manifest(m, dir, "train_" + tag);
  return {std::move(m), std::move(result)};
}

EvalOutcome cmd_eval(const Config& config) {
  const EvalMode mode = parse_eval_mode(config.str("eval_mode"));
  RunManifest m = start_manifest("eval", config);
  const fs::path dir = output_dir(config);
  const TaskDataset ds = load_task_dataset(config, dir);
  const AirGnnParameters params =
      load_checkpoint(dir / files::checkpoint(mode == EvalMode::kAirGnn ? "air" : "ideal"));
  check_checkpoint(config, ds, params);
  const ChannelModel channel = mode == EvalMode::kGnnIdeal
                                   ? ChannelModel::ideal_channel()
                                   : build_channel(config, ds.reference_power);
  const std::uint64_t seed = derive_seed(config.seed(), StreamTag::kEvaluation, {});
  const std::size_t redraws = config.count("redraws");
  const auto summary = evaluate_condition(config, ds, params, channel, redraws, seed);
  // Training objective on the test split under the same channel, one value
  // per re-draw.
  const Objective objective = build_objective(config);
  std::vector<double> losses;
  for (std::size_t r = 0; r < redraws; ++r)
    losses.push_back(estimate_expected_loss(params, ds.data, ds.test, objective, channel, 1,
                                            derive_seed(seed, StreamTag::kEstimate, {r}))
                         .mean);
  const auto test_loss = summarize("test_loss", std::move(losses));
  const std::string name = "eval_" + std::string(to_string(mode));
  const double delta = config.real("fading_scale");
  write_text(dir / (name + ".csv"), std::string(kMetricHeader) +
                                        metric_row(to_string(mode), delta, summary) +
                                        metric_row(to_string(mode), delta, test_loss));
  m.outputs.push_back(name + ".csv");
  m.substreams["evaluation"] = seed;
  m.dataset_hash = file_hash(dir / files::kDataset);
  finish_manifest(m, dir, name);
  return {std::move(m), summary, test_loss};
}

SweepOutcome cmd_sweep_delta(const Config& config) {
  const auto deltas = config.reals("delta_list");
  if (deltas.empty()) throw ConfigError("delta_list is empty");
  RunManifest m = start_manifest("sweep-delta", config);
  const fs::path dir = output_dir(config);
  const TaskDataset ds = load_task_dataset(config, dir);
  const AirGnnParameters ideal = load_checkpoint(dir / files::checkpoint("ideal"));
  check_checkpoint(config, ds, ideal);
  const std::uint64_t seed = derive_seed(config.seed(), StreamTag::kEvaluation, {});
  const std::size_t redraws = config.count("redraws");

  SweepOutcome out;
  std::string csv = kMetricHeader;
  for (double delta : deltas) {
    fs::path air_path = dir / delta_checkpoint(delta);
    if (!fs::exists(air_path)) air_path = dir / files::checkpoint("air");
    const AirGnnParameters air = load_checkpoint(air_path);
    check_checkpoint(config, ds, air);
    Config cell = config;
    cell.set("fading_scale", num(delta));
    const ChannelModel channel = build_channel(cell, ds.reference_power);
    for (EvalMode mode : {EvalMode::kAirGnn, EvalMode::kGnnIdeal, EvalMode::kGnnWithChannel}) {
      const auto& params = mode == EvalMode::kAirGnn ? air : ideal;
      const ChannelModel test = mode == EvalMode::kGnnIdeal ? ChannelModel::ideal_channel() : channel;
      SweepRow row{delta, mode, evaluate_condition(config, ds, params, test, redraws, seed)};
      csv += metric_row(to_string(mode), delta, row.summary);
      out.rows.push_back(std::move(row));
    }
  }
  write_text(dir / "sweep_delta.csv", csv);
  m.outputs.push_back("sweep_delta.csv");
  m.substreams["evaluation"] = seed;
  m.dataset_hash = file_hash(dir / files::kDataset);
  finish_manifest(m, dir, "sweep-delta");
  out.manifest = std::move(m);
  return out;
}

// ---------------------------------------------------------------------------
// Gradient check

namespace {

struct GradcheckCase {
  GraphShiftOperator graph;
  Architecture arch;
  ChannelRealization realization;
  AirGnnParameters params;
  Matrix x;
  Matrix weights;  // objective sum(weights .* output)
};

GradcheckCase make_gradcheck_case(std::uint64_t seed, std::size_t instance, std::size_t max_nodes) {
  Rng rng = Rng::substream(seed, StreamTag::kGradcheck, {instance});
  GradcheckCase c;
  const std::size_t n = 3 + rng.index(max_nodes - 2);
  std::vector<GraphEntry> entries;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (rng.uniform() < 0.3) entries.push_back({i, i, rng.uniform(0.2, 1.0)});
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (rng.uniform() < 0.5) {
        const double w = rng.uniform(0.2, 1.0);
        entries.push_back({i, j, w});
        entries.push_back({j, i, w});
      }
  }
  if (entries.empty()) entries = {{0, 1, 0.5}, {1, 0, 0.5}};
  // Normalized like the task graphs so that K-fold shifts keep signals O(1).
  c.graph = normalize_by_spectral_radius(GraphShiftOperator::from_entries(n, entries));

  const Activation first = instance % 2 == 0 ? Activation::kRelu : Activation::kTanh;
  const Activation second = instance % 2 == 0 ? Activation::kTanh : Activation::kRelu;
  const std::size_t f0 = 1 + rng.index(3), f1 = 1 + rng.index(4), f2 = 1 + rng.index(3);
  const std::size_t k0 = 1 + rng.index(5), k1 = rng.index(6);
  c.arch.layers = {{f0, f1, k0, first}, {f1, f2, k1, second}};

  ChannelModel model;
  model.snr_db = 20.0;
  model.fading_mode = FadingMode::kMultiply;
  model.per_filter_channels = rng.uniform() < 0.5;
  c.realization = sample_realization(c.graph, c.arch, model, {seed, instance, 0});
  c.params = init_parameters(c.arch, InitScheme::kUniformFanIn, rng);
  const std::size_t blocks = 1 + rng.index(2);
  c.x.resize(static_cast<Eigen::Index>(blocks * n), static_cast<Eigen::Index>(f0));
  for (Eigen::Index i = 0; i < c.x.size(); ++i) c.x.data()[i] = rng.normal();
  c.weights.resize(c.x.rows(), static_cast<Eigen::Index>(f2));
  for (Eigen::Index i = 0; i < c.weights.size(); ++i) c.weights.data()[i] = rng.normal();
  return c;
}

double case_objective(const GradcheckCase& c, const AirGnnParameters& p) {
  return (forward_output(c.graph, c.x, p, c.realization).array() * c.weights.array()).sum();
}

// Maps a flat index to (layer, g, f, k).
GradcheckFailure locate(const Architecture& arch, std::size_t index) {
  GradcheckFailure f;
  f.flat_index = index;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    const auto& s = arch.layers[l];
    const std::size_t size = s.in * s.out * (s.order + 1);
    if (index < offset + size) {
      const std::size_t local = index - offset;
      f.layer = l;
      f.k = local % (s.order + 1);
      f.f = (local / (s.order + 1)) % s.out;
      f.g = local / ((s.order + 1) * s.out);
      return f;
    }
    offset += size;
  }
  throw std::out_of_range("flat parameter index out of range");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

GradcheckReport cmd_gradcheck(const Config& config) {
  const std::size_t instances = config.count("gradcheck_instances");
  const std::size_t max_nodes = config.count("gradcheck_max_nodes");
  const double step = config.real("gradcheck_step");
  const double tol = config.real("gradcheck_tolerance");
  const std::string flip_text = config.str("gradcheck_flip");
  const long long flip = std::stoll(flip_text);
  if (max_nodes < 3) throw ConfigError("gradcheck_max_nodes must be at least 3");
  if (!(step > 0.0) || !(tol > 0.0)) throw ConfigError("gradcheck step and tolerance must be positive");

  GradcheckReport report;
  report.manifest = start_manifest("gradcheck", config);
  const fs::path dir = output_dir(config);
  const std::uint64_t seed = config.seed();
  std::vector<double> all_errors;
  std::string csv = "instance,nodes,parameters,max_rel_error,median_rel_error,worst_index\n";
  for (std::size_t i = 0; i < instances; ++i) {
    const GradcheckCase c = make_gradcheck_case(seed, i, max_nodes);
    auto fwd = forward(c.graph, c.x, c.params,
                       std::make_shared<const ChannelRealization>(c.realization));
    std::vector<double> analytic = backward(c.graph, fwd.tape, c.params, c.weights).flatten();
    if (flip >= 0 && static_cast<std::size_t>(flip) < analytic.size())
      analytic[static_cast<std::size_t>(flip)] = -analytic[static_cast<std::size_t>(flip)];

    const std::vector<double> base = c.params.flatten();
    AirGnnParameters probe = c.params;
    std::vector<double> errors(base.size());
    GradcheckInstance inst;
    inst.nodes = c.graph.size();
    inst.parameters = base.size();
    for (std::size_t j = 0; j < base.size(); ++j) {
      std::vector<double> shifted = base;
      shifted[j] = base[j] + step;
      probe.assign(shifted);
      const double plus = case_objective(c, probe);
      shifted[j] = base[j] - step;
      probe.assign(shifted);
      const double minus = case_objective(c, probe);
      const double numeric = (plus - minus) / (2.0 * step);
      errors[j] = std::abs(analytic[j] - numeric) / std::max(1e-8, std::abs(numeric));
      if (errors[j] > inst.max_relative_error) {
        inst.max_relative_error = errors[j];
        inst.worst_index = j;
      }
      if (!(errors[j] <= tol)) {
        GradcheckFailure f = locate(c.arch, j);
        f.instance = i;
        f.analytic = analytic[j];
        f.numeric = numeric;
        f.relative_error = errors[j];
        report.failures.push_back(f);
      }
    }
    inst.median_relative_error = median(errors);
    all_errors.insert(all_errors.end(), errors.begin(), errors.end());
    report.max_relative_error = std::max(report.max_relative_error, inst.max_relative_error);
    csv += std::to_string(i) + "," + std::to_string(inst.nodes) + "," +
           std::to_string(inst.parameters) + "," + num(inst.max_relative_error) + "," +
           num(inst.median_relative_error) + "," + std::to_string(inst.worst_index) + "\n";
    report.instances.push_back(inst);
  }
  report.median_relative_error = median(all_errors);
  report.passed = report.failures.empty();

  std::string fail_csv = "instance,flat_index,layer,g,f,k,analytic,numeric,rel_error\n";
  for (const auto& f : report.failures)
    fail_csv += std::to_string(f.instance) + "," + std::to_string(f.flat_index) + "," +
                std::to_string(f.layer) + "," + std::to_string(f.g) + "," + std::to_string(f.f) +
                "," + std::to_string(f.k) + "," + num(f.analytic) + "," + num(f.numeric) + "," +
                num(f.relative_error) + "\n";
  write_text(dir / "gradcheck.csv", csv);
  write_text(dir / "gradcheck_failures.csv", fail_csv);
  report.manifest.outputs = {"gradcheck.csv", "gradcheck_failures.csv"};
  report.manifest.substreams["gradcheck"] = derive_seed(seed, StreamTag::kGradcheck, {});
  finish_manifest(report.manifest, dir, "gradcheck");
  return report;
}

std::string GradcheckReport::text() const {
  std::ostringstream out;
  out << "gradcheck " << (passed ? "PASS" : "FAIL") << ": " << instances.size()
      << " instances, max rel error " << max_relative_error << ", median " << median_relative_error
      << "\n";
  for (std::size_t i = 0; i < failures.size() && i < 20; ++i) {
    const auto& f = failures[i];
    out << "  instance " << f.instance << " coefficient " << f.flat_index << " (layer " << f.layer
        << ", g " << f.g << ", f " << f.f << ", k " << f.k << "): analytic " << f.analytic
        << " numeric " << f.numeric << " rel error " << f.relative_error << "\n";
  }
  if (failures.size() > 20) out << "  ... " << failures.size() - 20 << " more\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Convergence study

namespace {

double window_mean(const std::vector<TrainRecord>& records, std::size_t end) {
  const std::size_t begin = end > kLossWindow ? end - kLossWindow : 0;
  double sum = 0.0;
  for (std::size_t t = begin; t < end; ++t) sum += records.at(t).loss;
  return sum / static_cast<double>(end - begin);
}

std::vector<std::size_t> grid(std::size_t iterations, std::size_t points) {
  std::vector<std::size_t> g;
  if (points <= 1) return {iterations - 1};
  for (std::size_t j = 0; j < points; ++j) {
    const std::size_t t = j * (iterations - 1) / (points - 1);
    if (g.empty() || g.back() != t) g.push_back(t);
  }
  return g;
}

}  // namespace

ConvergenceReport cmd_convergence(const Config& config) {
  if (config.task() != "source_localization")
    throw ConfigError("convergence runs on the source_localization task");
  auto horizons = config.counts("convergence_iterations");
  if (horizons.empty()) throw ConfigError("convergence_iterations is empty");
  for (auto h : horizons)
    if (h == 0) throw ConfigError("convergence horizons must be positive");
  const std::size_t seeds = config.count("convergence_seeds");
  if (seeds == 0) throw ConfigError("convergence_seeds must be positive");
  const double lipschitz = config.real("lipschitz_constant");
  if (lipschitz < 0.0) throw ConfigError("lipschitz_constant must be positive, or 0 for the estimate");
  const std::size_t smooth_draws = config.count("smoothness_draws");
  const std::size_t smooth_iters = config.count("smoothness_iterations");
  const double bound = config.real("gradient_bound");
  const double lstar = config.real("optimal_loss_bound");
  const std::size_t probes = config.count("probe_iterations");
  const std::size_t l0_draws = config.count("initial_loss_draws");
  const std::size_t points = config.count("grad_norm_points");
  const std::size_t draws = config.count("convergence_grad_draws");

  ConvergenceReport report;
  report.manifest = start_manifest("convergence", config);
  report.horizons = horizons;
  const fs::path dir = output_dir(config);
  const TaskDataset ds = generate_dataset(config);
  save_dataset(ds, dir / files::kDataset);
  report.manifest.dataset_hash = file_hash(dir / files::kDataset);
  const TrainConfig base = build_train_config(config, ds);
  const auto& train_idx = ds.train;

  std::string curves = "seed,T,iter,loss,grad_norm_sq,bias\n";
  std::string summary =
      "seed,T,step_size,gradient_bound,lipschitz,initial_loss,min_grad_norm_sq,argmin_iter,bias_at_min,"
      "tail_loss,quarter_tail_loss\n";
  std::vector<double> sum_min(horizons.size(), 0.0);
  double ratio_sum = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    const std::uint64_t seed = derive_seed(config.seed(), StreamTag::kInit, {s});
    report.manifest.substreams["seed_" + std::to_string(s)] = seed;
    Rng init_rng = Rng::substream(restart_seed(seed, 0), StreamTag::kInit, {});
    const AirGnnParameters a0 = init_parameters(base.arch, base.init, init_rng, base.init_constant);
    const double l0 = estimate_expected_loss(a0, ds.data, train_idx, base.objective, base.channel,
                                             l0_draws, derive_seed(seed, StreamTag::kEstimate, {0}))
                          .mean;
    const double cg = bound > 0.0 ? bound
                                  : probe_gradient_bound(a0, ds.data, train_idx, base.objective,
                                                         base.channel, base.batch_size, probes,
                                                         derive_seed(seed, StreamTag::kProbe, {}));
    const double cl = lipschitz > 0.0 ? lipschitz
                                      : estimate_smoothness(a0, ds.data, train_idx, base.objective,
                                                            base.channel, smooth_draws, smooth_iters, seed);
    std::vector<double> mins;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const std::size_t T = horizons[h];
      TrainConfig tc = base;
      tc.optimizer.kind = OptimizerKind::kSgd;
      tc.optimizer.schedule = StepSchedule::kConstant;
      tc.optimizer.step_size = theoretical_step_size(l0, lstar, cl, cg, T);
      tc.iterations = T;
      tc.seed = seed;
      tc.restarts = 1;
      tc.record_every = 0;
      const auto points_t = grid(T, points);
      std::vector<std::pair<std::size_t, AirGnnParameters>> snapshots;
      const auto result = train(tc, ds.data, train_idx, {}, [&](std::size_t t, const AirGnnParameters& p) {
        if (std::binary_search(points_t.begin(), points_t.end(), t)) snapshots.emplace_back(t, p);
      });
      ConvergenceRun run;
      run.seed_index = s;
      run.seed = seed;
      run.iterations = T;
      run.step_size = tc.optimizer.step_size;
      run.gradient_bound = cg;
      run.lipschitz = cl;
      run.initial_loss = l0;
      run.min_grad_norm_sq = std::numeric_limits<double>::infinity();
      std::vector<std::pair<double, double>> norms(T, {std::nan(""), std::nan("")});
      for (const auto& [t, p] : snapshots) {
        const auto est = estimate_gradient_norm(p, ds.data, train_idx, base.objective, base.channel,
                                                draws, derive_seed(seed, StreamTag::kEstimate, {T, t}));
        norms[t] = {est.norm_sq, est.bias};
        if (est.norm_sq < run.min_grad_norm_sq) {
          run.min_grad_norm_sq = est.norm_sq;
          run.argmin_iteration = t;
          run.bias_at_min = est.bias;
        }
      }
      run.tail_loss = window_mean(result.records, T);
      run.quarter_tail_loss = window_mean(result.records, std::max<std::size_t>(T / 4, 1));
      for (std::size_t t = 0; t < T; ++t)
        curves += std::to_string(s) + "," + std::to_string(T) + "," + std::to_string(t) + "," +
                  num(result.records[t].loss) + "," + num(norms[t].first) + "," +
                  num(norms[t].second) + "\n";
      summary += std::to_string(s) + "," + std::to_string(T) + "," + num(run.step_size) + "," +
                 num(cg) + "," + num(cl) + "," + num(l0) + "," + num(run.min_grad_norm_sq) + "," +
                 std::to_string(run.argmin_iteration) + "," + num(run.bias_at_min) + "," +
                 num(run.tail_loss) + "," + num(run.quarter_tail_loss) + "\n";
      sum_min[h] += run.min_grad_norm_sq;
      mins.push_back(run.min_grad_norm_sq);
      if (h + 1 == horizons.size()) {
        report.tail_loss += run.tail_loss / static_cast<double>(seeds);
        report.quarter_tail_loss += run.quarter_tail_loss / static_cast<double>(seeds);
      }
      report.runs.push_back(run);
    }
    ratio_sum += mins.front() / mins.back();
  }
  for (double v : sum_min) report.mean_min_grad_norm_sq.push_back(v / static_cast<double>(seeds));
  report.decay_ratio = report.mean_min_grad_norm_sq.front() / report.mean_min_grad_norm_sq.back();
  report.mean_of_seed_ratios = ratio_sum / static_cast<double>(seeds);

  write_text(dir / "convergence_curves.csv", curves);
  write_text(dir / "convergence_summary.csv", summary);
  report.manifest.outputs = {files::kDataset, "convergence_curves.csv", "convergence_summary.csv"};
  finish_manifest(report.manifest, dir, "convergence");
  return report;
}

std::string ConvergenceReport::text() const {
  std::ostringstream out;
  for (std::size_t h = 0; h < horizons.size(); ++h)
    out << "T=" << horizons[h] << " mean min ||grad||^2 = " << mean_min_grad_norm_sq[h] << "\n";
  out << "decay ratio " << decay_ratio << " (mean of per-seed ratios " << mean_of_seed_ratios
      << ")\n";
  out << "trailing loss: at T/4 " << quarter_tail_loss << ", at T " << tail_loss << "\n";
  return out.str();
}

}  // namespace airgnn
