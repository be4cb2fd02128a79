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

// Command-line experiment runner.
//
//   airgnn_cli gen-data --config configs/source_localization.cfg --export-csv
//   airgnn_cli train --config configs/source_localization.cfg --restarts 3
//   airgnn_cli eval --config configs/source_localization.cfg --mode gnn_with_channel
//   airgnn_cli train --manifest runs/x/train_air.manifest.json --output-dir runs/y
//
// Exit codes: 0 success, 2 invalid configuration or failed check, 1 runtime
// error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airgnn/config.hpp"
#include "airgnn/experiment.hpp"

namespace {

using airgnn::Config;
using airgnn::ConfigError;

struct Common {
  std::string config_path;
  std::string manifest_path;
  std::string task = "source_localization";
  std::string output_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "key = value config file");
  cmd->add_option("--manifest", c.manifest_path, "re-run from a run manifest");
  cmd->add_option("--task", c.task, "task defaults when no config is given")
      ->check(CLI::IsMember({"source_localization", "flocking"}));
  cmd->add_option("-o,--output-dir", c.output_dir, "override output_dir");
  cmd->add_option("-s,--set", c.overrides, "override a key: --set key=value");
}

Config resolve(const Common& c, const std::string& command) {
  if (!c.config_path.empty() && !c.manifest_path.empty())
    throw ConfigError("--config and --manifest are exclusive");
  Config config = Config::defaults(c.task);
  if (!c.manifest_path.empty()) {
    const auto manifest = airgnn::load_manifest(c.manifest_path);
    if (manifest.command != command)
      throw ConfigError("manifest was written by '" + manifest.command + "', not '" + command + "'");
    config = Config::parse(manifest.config_text);
  } else {
    if (!c.config_path.empty()) config = Config::load(c.config_path);
    airgnn::apply_environment(config);
  }
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!c.output_dir.empty()) config.set("output_dir", c.output_dir);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AirGNN experiment runner"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", std::string(airgnn::version()));
  bool print_keys = false;
  app.add_flag("--list-keys", print_keys, "print every config key with its documentation");

  Common gen, trn, evl, grad, conv, sweep;
  bool export_csv = false;
  std::string restarts, mode, deltas;

  auto* gen_cmd = app.add_subcommand("gen-data", "generate a task dataset");
  add_common(gen_cmd, gen);
  gen_cmd->add_flag("--export-csv", export_csv, "also write dataset.csv");
  auto* train_cmd = app.add_subcommand("train", "train and write the best-validation checkpoint");
  add_common(train_cmd, trn);
  train_cmd->add_option("--restarts", restarts, "independent runs");
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd, evl);
  eval_cmd->add_option("--mode", mode, "airgnn | gnn_ideal | gnn_with_channel");
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(grad_cmd, grad);
  auto* conv_cmd = app.add_subcommand("convergence", "gradient-norm decay study");
  add_common(conv_cmd, conv);
  auto* sweep_cmd = app.add_subcommand("sweep-delta", "metrics over fading scales");
  add_common(sweep_cmd, sweep);
  sweep_cmd->add_option("--deltas", deltas, "comma separated fading scales");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (print_keys) {
    for (const auto& [key, doc] : Config::documentation()) std::printf("%-26s %s\n", key.c_str(), doc.c_str());
  }
  if (app.get_subcommands().empty()) {
    if (print_keys) return 0;
    std::fputs(app.help().c_str(), stderr);
    return 2;
  }

  try {
    if (gen_cmd->parsed()) {
      const auto out = airgnn::cmd_gen_data(resolve(gen, "gen-data"), export_csv);
      std::printf("dataset: %zu samples, hash %s\n", out.samples, out.dataset_hash.c_str());
    } else if (train_cmd->parsed()) {
      Config config = resolve(trn, "train");
      if (!restarts.empty()) config.set("restarts", restarts);
      const auto out = airgnn::cmd_train(config);
      const auto& rec = out.result.records;
      std::printf("trained %zu iterations, best restart %zu, final minibatch loss %.6g\n", rec.size(),
                  out.result.best_restart, rec.empty() ? 0.0 : rec.back().loss);
    } else if (eval_cmd->parsed()) {
      Config config = resolve(evl, "eval");
      if (!mode.empty()) config.set("eval_mode", mode);
      const auto out = airgnn::cmd_eval(config);
      std::printf("%s %s: %.6g +- %.3g over %zu re-draws\n", config.str("eval_mode").c_str(),
                  out.summary.metric.c_str(), out.summary.mean, out.summary.standard_error,
                  out.summary.values.size());
      std::printf("%s test_loss: %.6g +- %.3g\n", config.str("eval_mode").c_str(), out.test_loss.mean,
                  out.test_loss.standard_error);
    } else if (grad_cmd->parsed()) {
      const auto report = airgnn::cmd_gradcheck(resolve(grad, "gradcheck"));
      std::fputs(report.text().c_str(), stdout);
      if (!report.passed) return 2;
    } else if (conv_cmd->parsed()) {
      const auto report = airgnn::cmd_convergence(resolve(conv, "convergence"));
      std::fputs(report.text().c_str(), stdout);
    } else if (sweep_cmd->parsed()) {
      Config config = resolve(sweep, "sweep-delta");
      if (!deltas.empty()) config.set("delta_list", deltas);
      const auto out = airgnn::cmd_sweep_delta(config);
      for (const auto& row : out.rows)
        std::printf("delta %-6g %-17s %s %.6g +- %.3g\n", row.delta,
                    std::string(airgnn::to_string(row.mode)).c_str(), row.summary.metric.c_str(),
                    row.summary.mean, row.summary.standard_error);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
