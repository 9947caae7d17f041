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

#include "qrlfolio/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qrlfolio {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormat = "qrlfolio-checkpoint";

Json model_json(const agents::Model& m) {
  Json j;
  j["kind"] = agents::to_string(m.kind);
  j["input_dim"] = m.input_dim;
  j["output_dim"] = m.output_dim;
  if (m.kind == agents::ModelKind::Quantum) {
    std::string axes;
    for (auto a : m.ansatz.axes) axes += vqc::to_char(a);
    Json pairs = Json::array();
    for (const auto& [c, t] : m.ansatz.entanglers) pairs.push_back({c, t});
    j["ansatz"] = {{"qubits", m.ansatz.num_qubits},
                   {"layers", m.ansatz.num_layers},
                   {"pattern", vqc::to_string(m.ansatz.pattern)},
                   {"axes", axes},
                   {"entanglers", pairs}};
    j["readout"] = m.readout;
  } else {
    j["widths"] = m.mlp.widths;
  }
  j["params"] = m.params;
  return j;
}

agents::Model model_from(const Json& j) {
  agents::Model m;
  m.kind = agents::parse_model_kind(j.at("kind").get<std::string>());
  m.input_dim = j.at("input_dim").get<std::size_t>();
  m.output_dim = j.at("output_dim").get<std::size_t>();
  if (m.kind == agents::ModelKind::Quantum) {
    const auto& a = j.at("ansatz");
    m.ansatz.num_qubits = a.at("qubits").get<std::size_t>();
    m.ansatz.num_layers = a.at("layers").get<std::size_t>();
    m.ansatz.pattern = vqc::parse_pattern(a.at("pattern").get<std::string>());
    for (char c : a.at("axes").get<std::string>()) m.ansatz.axes.push_back(vqc::parse_axis(c));
    for (const auto& p : a.at("entanglers")) {
      m.ansatz.entanglers.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
    }
    m.readout = j.at("readout").get<vqc::ObservableSet>();
  } else {
    m.mlp.widths = j.at("widths").get<std::vector<std::size_t>>();
  }
  m.params = j.at("params").get<std::vector<double>>();
  agents::validate(m);
  return m;
}

Json optimizer_json(const agents::OptimizerState& o) {
  return {{"kind", agents::to_string(o.kind)}, {"learning_rate", o.learning_rate}, {"l2", o.l2},
          {"step", o.step},                    {"m", o.m},                          {"v", o.v}};
}

agents::OptimizerState optimizer_from(const Json& j) {
  agents::OptimizerState o;
  o.kind = agents::parse_optimizer(j.at("kind").get<std::string>());
  o.learning_rate = j.at("learning_rate").get<double>();
  o.l2 = j.at("l2").get<double>();
  o.step = j.at("step").get<std::uint64_t>();
  o.m = j.at("m").get<std::vector<double>>();
  o.v = j.at("v").get<std::vector<double>>();
  return o;
}

Json spec_json(const agents::AgentSpec& s) {
  Json hidden = s.classical.hidden;
  return {{"kind", agents::to_string(s.kind)},
          {"algorithm", agents::to_string(s.algorithm)},
          {"quantum",
           {{"qubits", s.quantum.qubits},
            {"layers", s.quantum.layers},
            {"pattern", vqc::to_string(s.quantum.pattern)},
            {"init_scale", s.quantum.init_scale}}},
          {"classical_hidden", hidden}};
}

agents::AgentSpec spec_from(const Json& j) {
  agents::AgentSpec s;
  s.kind = agents::parse_model_kind(j.at("kind").get<std::string>());
  s.algorithm = agents::parse_algorithm(j.at("algorithm").get<std::string>());
  const auto& q = j.at("quantum");
  s.quantum.qubits = q.at("qubits").get<std::size_t>();
  s.quantum.layers = q.at("layers").get<std::size_t>();
  s.quantum.pattern = vqc::parse_pattern(q.at("pattern").get<std::string>());
  s.quantum.init_scale = q.at("init_scale").get<double>();
  s.classical.hidden = j.at("classical_hidden").get<std::vector<std::size_t>>();
  return s;
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  Json root;
  root["format"] = kFormat;
  root["version"] = ckpt.version;
  Json cfg = Json::object();
  for (const auto& [k, v] : config_entries(ckpt.config)) cfg[k] = v;
  root["config"] = cfg;
  Json folds = Json::array();
  for (const auto& f : ckpt.folds) {
    Json fj;
    fj["fold"] = f.fold;
    fj["best_epoch"] = f.best_epoch;
    fj["epochs_run"] = f.epochs_run;
    fj["early_stopped"] = f.early_stopped;
    fj["rng"] = {{"key", f.rng.key()}, {"counter", f.rng.counter()}};
    fj["spec"] = spec_json(f.agent.spec);
    fj["actor"] = model_json(f.agent.actor);
    fj["critic"] = model_json(f.agent.critic);
    fj["target_actor"] = model_json(f.agent.target_actor);
    fj["target_critic"] = model_json(f.agent.target_critic);
    fj["actor_optimizer"] = optimizer_json(f.agent.actor_opt);
    fj["critic_optimizer"] = optimizer_json(f.agent.critic_opt);
    folds.push_back(std::move(fj));
  }
  root["folds"] = std::move(folds);
  return root.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text, const std::string& source) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw CheckpointError(source + ": malformed checkpoint at byte offset " + std::to_string(e.byte) + ": " +
                          e.what());
  }
  try {
    if (!root.is_object() || root.value("format", std::string()) != kFormat) {
      throw CheckpointError(source + ": not a qrlfolio checkpoint");
    }
    const int version = root.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw UnsupportedVersionError(source + ": checkpoint version " + std::to_string(version) +
                                    " is not supported (this build reads version " +
                                    std::to_string(kCheckpointVersion) + ")");
    }
    Checkpoint ckpt;
    ckpt.version = version;
    for (const auto& [k, v] : root.at("config").items()) {
      set_config_value(ckpt.config, k, v.get<std::string>());
    }
    for (const auto& fj : root.at("folds")) {
      FoldCheckpoint f;
      f.fold = fj.at("fold").get<std::size_t>();
      f.best_epoch = fj.at("best_epoch").get<std::size_t>();
      f.epochs_run = fj.at("epochs_run").get<std::size_t>();
      f.early_stopped = fj.at("early_stopped").get<bool>();
      f.rng = CounterRng(fj.at("rng").at("key").get<std::uint64_t>(),
                         fj.at("rng").at("counter").get<std::uint64_t>());
      f.agent.spec = spec_from(fj.at("spec"));
      f.agent.actor = model_from(fj.at("actor"));
      f.agent.critic = model_from(fj.at("critic"));
      f.agent.target_actor = model_from(fj.at("target_actor"));
      f.agent.target_critic = model_from(fj.at("target_critic"));
      f.agent.actor_opt = optimizer_from(fj.at("actor_optimizer"));
      f.agent.critic_opt = optimizer_from(fj.at("critic_optimizer"));
      ckpt.folds.push_back(std::move(f));
    }
    return ckpt;
  } catch (const CheckpointError&) {
    throw;
  } catch (const Json::exception& e) {
    throw CheckpointError(source + ": invalid checkpoint contents: " + e.what());
  } catch (const Error& e) {
    throw CheckpointError(source + ": invalid checkpoint contents: " + e.what());
  }
}

void checkpoint_save(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string text = checkpoint_to_string(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << text;
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint checkpoint_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str(), path.string());
}

}  // namespace qrlfolio
