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
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace airgnn {

// Raised for malformed or unknown configuration; the CLI maps it to exit
// code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Flat key = value experiment configuration with `#` comments. Every key has
// a documented default that depends on the task; unknown keys are errors.
class Config {
 public:
  // Defaults for "source_localization" or "flocking".
  static Config defaults(std::string_view task);
  // Parses text on top of the defaults of the task named in it (or
  // source_localization when absent).
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  const std::string& str(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(integer(key)); }
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;

  std::string task() const { return str("task"); }
  std::uint64_t seed() const { return integer("seed"); }

  // Fully resolved configuration in canonical key order.
  std::string to_text() const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // Key names with their one-line documentation, in canonical order.
  static std::vector<std::pair<std::string, std::string>> documentation();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace airgnn
