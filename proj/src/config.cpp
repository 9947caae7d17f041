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

#include "qrlfolio/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace qrlfolio {

namespace {

constexpr std::array<std::pair<RunModel, const char*>, 6> kModels{{
    {RunModel::QuantumDdpg, "quantum_ddpg"},
    {RunModel::QuantumDqn, "quantum_dqn"},
    {RunModel::ClassicalDdpg, "classical_ddpg"},
    {RunModel::ClassicalDqn, "classical_dqn"},
    {RunModel::EqualWeights, "equal_weights"},
    {RunModel::Mvo, "mvo"},
}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

std::vector<std::size_t> to_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  if (v == "none") return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto w = to_size(key, trim(item));
    if (w == 0) throw ConfigError(key + ": layer widths must be positive");
    out.push_back(w);
  }
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated width list or 'none'");
  return out;
}

std::string join_widths(const std::vector<std::size_t>& w) {
  if (w.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(w[i]);
  }
  return out;
}

template <typename F>
auto tagged(const std::string& key, const std::string& v, F parse) {
  try {
    return parse(v);
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&,
                                  const std::filesystem::path&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  const char* key;
  Setter set;
  Getter get;
};

#define QF_DOUBLE(k, member)                                                                 \
  Field {                                                                                    \
    k, [](RunConfig& c, const std::string& key, const std::string& v,                        \
          const std::filesystem::path&) { c.member = to_double(key, v); },                   \
        [](const RunConfig& c) { return format_double(c.member); }                           \
  }
#define QF_SIZE(k, member)                                                                   \
  Field {                                                                                    \
    k, [](RunConfig& c, const std::string& key, const std::string& v,                        \
          const std::filesystem::path&) { c.member = to_size(key, v); },                     \
        [](const RunConfig& c) { return std::to_string(c.member); }                          \
  }
#define QF_U64(k, member)                                                                    \
  Field {                                                                                    \
    k, [](RunConfig& c, const std::string& key, const std::string& v,                        \
          const std::filesystem::path&) { c.member = to_u64(key, v); },                      \
        [](const RunConfig& c) { return std::to_string(c.member); }                          \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      Field{"data",
            [](RunConfig& c, const std::string&, const std::string& v, const std::filesystem::path& base) {
              std::filesystem::path p(v);
              c.data = (p.is_relative() && !base.empty()) ? base / p : p;
            },
            [](const RunConfig& c) { return c.data.string(); }},
      Field{"model",
            [](RunConfig& c, const std::string& key, const std::string& v, const std::filesystem::path&) {
              c.model = tagged(key, v, parse_run_model);
            },
            [](const RunConfig& c) { return to_string(c.model); }},
      QF_U64("seed", seed),
      QF_U64("shots", shots),
      QF_SIZE("threads", threads),

      QF_SIZE("env.lookback", env.lookback),
      QF_SIZE("env.forecast", env.forecast),
      QF_SIZE("env.rebalance_period", env.rebalance_period),
      QF_DOUBLE("env.cost_rate", env.cost_rate),
      Field{"env.cost_convention",
            [](RunConfig& c, const std::string& key, const std::string& v, const std::filesystem::path&) {
              c.env.cost_convention = tagged(key, v, market::parse_cost_convention);
            },
            [](const RunConfig& c) { return market::to_string(c.env.cost_convention); }},
      QF_DOUBLE("env.risk_preference", env.risk_preference),
      QF_DOUBLE("env.risk_free_annual", env.risk_free_annual),
      QF_DOUBLE("env.trading_days", env.trading_days),
      QF_SIZE("env.forecast_history", env.forecast_history),

      QF_SIZE("quantum.qubits", quantum.qubits),
      QF_SIZE("quantum.layers", quantum.layers),
      Field{"quantum.pattern",
            [](RunConfig& c, const std::string& key, const std::string& v, const std::filesystem::path&) {
              c.quantum.pattern = tagged(key, v, vqc::parse_pattern);
            },
            [](const RunConfig& c) { return vqc::to_string(c.quantum.pattern); }},
      QF_DOUBLE("quantum.init_scale", quantum.init_scale),

      Field{"classical.hidden",
            [](RunConfig& c, const std::string& key, const std::string& v, const std::filesystem::path&) {
              c.classical.hidden = to_widths(key, v);
            },
            [](const RunConfig& c) { return join_widths(c.classical.hidden); }},
      QF_SIZE("classical.params", classical_params),

      QF_DOUBLE("agent.gamma", agent.gamma),
      QF_DOUBLE("agent.tau", agent.tau),
      QF_DOUBLE("agent.sigma_start", agent.sigma_start),
      QF_DOUBLE("agent.sigma_end", agent.sigma_end),
      QF_SIZE("agent.dqn_samples", agent.dqn_samples),
      QF_SIZE("agent.batch_size", agent.batch_size),
      QF_DOUBLE("agent.reward_scale", agent.reward_scale),

      Field{"optimizer.kind",
            [](RunConfig& c, const std::string& key, const std::string& v, const std::filesystem::path&) {
              c.optimizer.kind = tagged(key, v, agents::parse_optimizer);
            },
            [](const RunConfig& c) { return agents::to_string(c.optimizer.kind); }},
      QF_DOUBLE("optimizer.actor_lr", optimizer.actor_lr),
      QF_DOUBLE("optimizer.critic_lr", optimizer.critic_lr),
      QF_DOUBLE("optimizer.l2", optimizer.l2),

      QF_SIZE("train.epochs", train.epochs),
      QF_SIZE("train.patience", train.patience),
      QF_SIZE("train.episode_offsets", train.episode_offsets),
      QF_SIZE("train.updates_per_step", train.updates_per_step),

      QF_SIZE("folds.count", folds.count),
      QF_DOUBLE("folds.val_fraction", folds.val_fraction),

      QF_DOUBLE("mvo.grid_step", mvo.grid_step),
      QF_DOUBLE("mvo.lower", mvo.lower),
      QF_DOUBLE("mvo.upper", mvo.upper),
  };
  return table;
}

#undef QF_DOUBLE
#undef QF_SIZE
#undef QF_U64

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

std::string to_string(RunModel m) {
  for (const auto& [k, tag] : kModels) {
    if (k == m) return tag;
  }
  throw ArgumentError("unknown model kind");
}

RunModel parse_run_model(const std::string& tag) {
  for (const auto& [k, name] : kModels) {
    if (tag == name) return k;
  }
  throw ConfigError("unknown model '" + tag +
                    "' (expected quantum_ddpg, quantum_dqn, classical_ddpg, classical_dqn, "
                    "equal_weights or mvo)");
}

bool is_agent(RunModel m) { return m != RunModel::EqualWeights && m != RunModel::Mvo; }

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw ArgumentError("cannot format number");
  return std::string(buf.data(), p);
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                      const std::filesystem::path& base) {
  find_field(key).set(cfg, key, value, base);
}

RunConfig parse_config(const std::string& text, const std::string& source,
                       const std::filesystem::path& base) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      set_config_value(cfg, key, value, base);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

void RunConfig::validate(bool check_files) const {
  if (data.empty()) throw ConfigError("data: a price file is required");
  if (check_files && !std::filesystem::is_regular_file(data)) {
    throw ConfigError("data: file not found: " + data.string());
  }
  if (threads < 1) throw ConfigError("threads must be positive");
  if (folds.count < 1) throw ConfigError("folds.count must be positive");
  if (!(folds.val_fraction > 0.0 && folds.val_fraction < 1.0)) {
    throw ConfigError("folds.val_fraction must lie in (0, 1)");
  }
  if (!(mvo.grid_step > 0.0) || !(mvo.lower < mvo.upper)) {
    throw ConfigError("mvo: grid_step must be positive and lower < upper");
  }
  if (quantum.layers < 1) throw ConfigError("quantum.layers must be positive");
  if (!(quantum.init_scale >= 0.0)) throw ConfigError("quantum.init_scale must be non-negative");
  if (!(optimizer.actor_lr > 0.0) || !(optimizer.critic_lr > 0.0)) {
    throw ConfigError("optimizer learning rates must be positive");
  }
  if (!(optimizer.l2 >= 0.0)) throw ConfigError("optimizer.l2 must be non-negative");
  try {
    env.validate();
    agent.validate();
    train.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

agents::AgentSpec RunConfig::agent_spec(std::size_t state_dim, std::size_t assets) const {
  agents::AgentSpec s;
  switch (model) {
    case RunModel::QuantumDdpg:
    case RunModel::QuantumDqn:
      s.kind = agents::ModelKind::Quantum;
      break;
    case RunModel::ClassicalDdpg:
    case RunModel::ClassicalDqn:
      s.kind = agents::ModelKind::Classical;
      break;
    default:
      throw ConfigError("model '" + to_string(model) + "' is a baseline, not an agent");
  }
  s.algorithm = (model == RunModel::QuantumDqn || model == RunModel::ClassicalDqn)
                    ? agents::Algorithm::Dqn
                    : agents::Algorithm::Ddpg;
  s.quantum = quantum;
  s.classical = classical;
  if (classical_params > 0) {
    s.classical.hidden = {agents::hidden_width_for(classical_params, state_dim, assets)};
  }
  return s;
}

}  // namespace qrlfolio
