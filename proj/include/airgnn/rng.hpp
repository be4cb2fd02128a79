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

#include <cstdint>
#include <initializer_list>
#include <random>

namespace airgnn {

// Domain tags separating independent random streams derived from one master
// seed. Values are part of the reproducibility contract; never renumber.
enum class StreamTag : std::uint64_t {
  kGraph = 1,
  kChannel = 2,
  kBatch = 3,
  kInit = 4,
  kDataset = 5,
  kEstimate = 6,
  kEvaluation = 7,
  kRollout = 8,
  kGradcheck = 9,
  kProbe = 10,
};

std::uint64_t splitmix64(std::uint64_t x);

// Mixes a master seed, a tag and a key path into a substream seed.
std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                          std::initializer_list<std::uint64_t> keys);

// Thin wrapper over a 64-bit Mersenne twister. Every consumer receives its
// own instance; there is no global generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t master, StreamTag tag,
                       std::initializer_list<std::uint64_t> keys) {
    return Rng(derive_seed(master, tag, keys));
  }

  // Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  // Rayleigh(scale) by inverse CDF.
  double rayleigh(double scale);
  std::uint64_t index(std::uint64_t bound);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace airgnn
