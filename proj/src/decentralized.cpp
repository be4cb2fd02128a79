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

#include "airgnn/decentralized.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace airgnn {

RoundSchedule RoundSchedule::for_architecture(const Architecture& arch) {
  RoundSchedule s;
  for (std::size_t l = 0; l < arch.layers.size(); ++l)
    for (std::size_t k = 1; k <= arch.layers[l].order; ++k)
      s.rounds.push_back({l, k, arch.layers[l].in});
  return s;
}

namespace {

struct InboxSlot {
  std::uint32_t sender = 0;
  std::vector<double> values;  // gain-scaled payload per feature
};

// Node-local runtime. It sees its own values, its inbox and its copy of the
// coefficients; nothing else.
class NodeRuntime {
 public:
  NodeRuntime(std::uint32_t id, std::shared_ptr<const AirGnnParameters> params, RunLog* audit)
      : id_(id), params_(std::move(params)), audit_(audit) {}

  std::uint32_t id() const { return id_; }

  void set_input(std::vector<double> values) { current_ = std::move(values); }

  void begin_layer() {
    stack_.clear();
    stack_.push_back(current_);
  }

  const std::vector<double>& payload() const { return stack_.back(); }

  void deliver(InboxSlot slot) { inbox_.push_back(std::move(slot)); }

  // Closes round `round`: x^(k)_i = sum over senders (and the node's own
  // diagonal term) in sender order, plus receiver noise.
  void finish_round(std::size_t round, std::optional<double> self_weight,
                    std::span<const double> self_gains, std::span<const double> noise) {
    if (self_weight) {
      InboxSlot own{id_, stack_.back()};
      for (std::size_t f = 0; f < own.values.size(); ++f)
        own.values[f] *= self_gains.empty() ? *self_weight : self_gains[f];
      inbox_.push_back(std::move(own));
    }
    std::sort(inbox_.begin(), inbox_.end(),
              [](const InboxSlot& a, const InboxSlot& b) { return a.sender < b.sender; });
    std::vector<double> next(stack_.back().size(), 0.0);
    for (const auto& slot : inbox_) {
      record(round, slot.sender);
      for (std::size_t f = 0; f < next.size(); ++f) next[f] += slot.values[f];
    }
    for (std::size_t f = 0; f < next.size(); ++f) next[f] += noise[f];
    inbox_.clear();
    stack_.push_back(std::move(next));
  }

  void finish_layer(std::size_t layer, std::size_t round) {
    const auto& bank = params_->layers[layer];
    const auto& shape = bank.shape();
    Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(shape.out));
    for (std::size_t k = 0; k <= shape.order; ++k) {
      record(round, id_);
      const Eigen::Map<const Eigen::RowVectorXd> xk(stack_[k].data(),
                                                    static_cast<Eigen::Index>(stack_[k].size()));
      z.noalias() += xk * bank.taps(k);
    }
    current_.resize(shape.out);
    for (std::size_t f = 0; f < shape.out; ++f)
      current_[f] = activate(shape.activation, z(static_cast<Eigen::Index>(f)));
  }

  const std::vector<double>& output() const { return current_; }

  void record(std::size_t round, std::uint32_t origin) {
    if (audit_) audit_->reads.push_back({round, id_, origin});
  }

 private:
  std::uint32_t id_;
  std::shared_ptr<const AirGnnParameters> params_;
  RunLog* audit_;
  std::vector<double> current_;
  std::vector<std::vector<double>> stack_;
  std::vector<InboxSlot> inbox_;
};

}  // namespace

DecentralizedResult run_decentralized(const GraphShiftOperator& graph, const GraphSignal& x,
                                      const AirGnnParameters& params,
                                      const ChannelRealization& realization,
                                      const DecentralizedOptions& options) {
  const Architecture arch = params.architecture();
  arch.validate();
  realization.check_shape(graph, arch);
  const auto n = graph.size();
  if (x.rows() != static_cast<Eigen::Index>(n) ||
      x.cols() != static_cast<Eigen::Index>(arch.input_width()))
    throw std::invalid_argument("decentralized input shape mismatch");
  const auto schedule = RoundSchedule::for_architecture(arch);
  if (schedule.rounds.size() != realization.hop_count())
    throw std::invalid_argument("schedule/realization mismatch");

  DecentralizedResult result;
  RunLog* audit = options.audit ? &result.log : nullptr;
  auto shared = std::make_shared<const AirGnnParameters>(params);
  std::vector<NodeRuntime> nodes;
  nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes.emplace_back(static_cast<std::uint32_t>(i), shared, audit);
    nodes[i].set_input(std::vector<double>(x.row(static_cast<Eigen::Index>(i)).begin(),
                                           x.row(static_cast<Eigen::Index>(i)).end()));
  }
  if (options.inject_nonlocal_read) {
    const auto [reader, origin] = *options.inject_nonlocal_read;
    nodes.at(reader).record(0, origin);
  }

  // Medium: outgoing links of each sender and the diagonal entry of each node.
  const auto entries = graph.entries();
  std::vector<std::vector<std::size_t>> outgoing(n);
  std::vector<std::optional<std::size_t>> diagonal(n);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    if (entries[e].row == entries[e].col) {
      diagonal[entries[e].row] = e;
    } else {
      outgoing[entries[e].col].push_back(e);
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::optional<Rng> shuffler;
  if (options.shuffle_seed) shuffler.emplace(*options.shuffle_seed);
  const auto next_order = [&]() {
    if (shuffler) std::shuffle(order.begin(), order.end(), shuffler->engine());
    return order;
  };

  std::size_t round = 0;
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    for (auto i : next_order()) nodes[i].begin_layer();
    for (const auto& hop : realization.layers[l].hops) {
      const bool grouped = hop.gains.size() > 1;
      for (auto j : next_order()) {
        const auto& payload = nodes[j].payload();
        for (std::size_t e : outgoing[j]) {
          const auto dst = entries[e].row;
          InboxSlot slot{static_cast<std::uint32_t>(j), payload};
          for (std::size_t f = 0; f < payload.size(); ++f) {
            const double gain = hop.gains[grouped ? f : 0][e];
            slot.values[f] = gain * payload[f];
            if (options.log_transmissions)
              result.log.transmissions.push_back({round, static_cast<std::uint32_t>(j), dst, f,
                                                  payload[f], gain,
                                                  hop.noise(dst, static_cast<Eigen::Index>(f))});
          }
          nodes[dst].deliver(std::move(slot));
        }
      }
      for (auto i : next_order()) {
        std::optional<double> self;
        std::vector<double> self_gains;
        if (diagonal[i]) {
          self = hop.gains[0][*diagonal[i]];
          if (grouped)
            for (const auto& g : hop.gains) self_gains.push_back(g[*diagonal[i]]);
        }
        const auto noise_row = hop.noise.row(static_cast<Eigen::Index>(i));
        const std::vector<double> noise(noise_row.begin(), noise_row.end());
        nodes[i].finish_round(round, self, self_gains, noise);
      }
      ++round;
    }
    for (auto i : next_order()) nodes[i].finish_layer(l, round);
  }
  result.log.rounds = round;

  result.output.resize(static_cast<Eigen::Index>(n),
                       static_cast<Eigen::Index>(arch.output_width()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < arch.output_width(); ++f)
      result.output(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = nodes[i].output()[f];
  return result;
}

std::size_t count_transmissions(const RoundSchedule& schedule, const GraphShiftOperator& graph) {
  std::size_t total = 0;
  for (const auto& r : schedule.rounds) total += r.features * graph.edge_count();
  return total;
}

bool locality_audit(const RunLog& log, const GraphShiftOperator& graph) {
  return std::all_of(log.reads.begin(), log.reads.end(), [&](const ReadEvent& r) {
    return r.reader == r.origin || graph.has_edge(r.reader, r.origin);
  });
}

void write_transmit_log(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "round,src,dst,feature,value_sent,gain,noise_applied\n";
  char buf[160];
  for (const auto& t : log.transmissions) {
    std::snprintf(buf, sizeof buf, "%zu,%u,%u,%zu,%.17g,%.17g,%.17g\n", t.round, t.src, t.dst,
                  t.feature, t.value_sent, t.gain, t.noise_applied);
    out << buf;
  }
}

}  // namespace airgnn
