// Copyright 2026 The qrlfolio Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration in a flat `key = value` text format.
//
//   # comment
//   data = prices.csv
//   model = quantum_ddpg
//   env.lookback = 30
//
// Keys are dotted section names; every key has a default. Unknown keys,
// repeated keys and malformed values are ConfigErrors naming the source line.
// Relative paths resolve against the directory of the config file.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrlfolio/training.hpp"

namespace qrlfolio {

enum class RunModel { QuantumDdpg, QuantumDqn, ClassicalDdpg, ClassicalDqn, EqualWeights, Mvo };

[[nodiscard]] std::string to_string(RunModel m);
[[nodiscard]] RunModel parse_run_model(const std::string& tag);
[[nodiscard]] bool is_agent(RunModel m);

struct FoldSpec {
  std::size_t count = 7;
  double val_fraction = 0.2;
};

struct RunConfig {
  std::filesystem::path data;
  RunModel model = RunModel::QuantumDdpg;
  std::uint64_t seed = 0;
  std::uint64_t shots = 0;  // 0 = exact readout at test time
  std::size_t threads = 1;

  market::EnvConfig env;
  agents::QuantumSpec quantum;
  agents::ClassicalSpec classical;
  std::size_t classical_params = 0;  // nonzero: one hidden layer sized to this count
  agents::AgentConfig agent;
  agents::OptimizerSpec optimizer;
  agents::TrainConfig train;
  FoldSpec folds;
  eval::MvoOptions mvo;

  /// Checks value ranges and, when check_files is set, that `data` exists.
  void validate(bool check_files = true) const;

  /// Agent description for an actor with the given input and output sizes.
  [[nodiscard]] agents::AgentSpec agent_spec(std::size_t state_dim, std::size_t assets) const;
};

/// Parses config text. `base` resolves a relative data path.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::string& source = "<config>",
                                     const std::filesystem::path& base = {});
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Sets one key as if it appeared in a config file.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                      const std::filesystem::path& base = {});

/// Every key with its canonical value, in documentation order.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

/// Canonical text; parse_config(to_text(c)) reproduces c exactly.
[[nodiscard]] std::string to_text(const RunConfig& cfg);

/// Shortest decimal form that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

}  // namespace qrlfolio
