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

// Actor and critic models, replay memory and the DDPG / sampled-max DQN update
// rules.
//
// A model is either a variational circuit fed by the amplitude-encoding
// pipeline or a tanh MLP. Actors read N outputs that pass through
// weights_from_readout; critics read one scalar (<Z_0> for circuits). The
// critic's input is concat(state, action) for both kinds.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qrlfolio/rng.hpp"
#include "qrlfolio/vqc.hpp"

namespace qrlfolio::agents {

inline constexpr double kReadoutGuard = 0.05;
inline constexpr double kActionStep = 1e-4;

/// z / sum(z), or equal weights when |sum(z)| < 0.05. The last entry is
/// 1 minus the others, so the weights sum to one up to a single rounding.
[[nodiscard]] std::vector<double> weights_from_readout(std::span<const double> z);

// Layer widths from input to output; parameters are laid out per layer as the
// row-major (out x in) weight matrix followed by the bias vector.
struct MlpShape {
  std::vector<std::size_t> widths;

  [[nodiscard]] std::size_t parameter_count() const;
  [[nodiscard]] std::size_t inputs() const { return widths.front(); }
  [[nodiscard]] std::size_t outputs() const { return widths.back(); }
};

[[nodiscard]] std::vector<double> mlp_evaluate(const MlpShape& shape, std::span<const double> params,
                                               std::span<const double> input);

struct MlpGradient {
  std::vector<double> params;
  std::vector<double> input;
};

/// Reverse pass for the scalar upstream . output.
[[nodiscard]] MlpGradient mlp_gradient(const MlpShape& shape, std::span<const double> params,
                                       std::span<const double> input,
                                       std::span<const double> upstream);

/// Hidden width h making a one-hidden-layer in -> h -> out network have as
/// close to `target` parameters as possible.
[[nodiscard]] std::size_t hidden_width_for(std::size_t target, std::size_t inputs,
                                           std::size_t outputs);

enum class ModelKind { Quantum, Classical };

[[nodiscard]] std::string to_string(ModelKind kind);
[[nodiscard]] ModelKind parse_model_kind(const std::string& tag);

struct Model {
  ModelKind kind = ModelKind::Quantum;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  vqc::Ansatz ansatz;
  vqc::ObservableSet readout;
  MlpShape mlp;
  std::vector<double> params;

  [[nodiscard]] std::size_t parameter_count() const { return params.size(); }
};

struct QuantumSpec {
  std::size_t qubits = 0;  // 0 = the smallest register holding the input
  std::size_t layers = 5;
  vqc::EntanglerPattern pattern = vqc::EntanglerPattern::AssetTemporal;
  double init_scale = 0.1;
};

struct ClassicalSpec {
  std::vector<std::size_t> hidden{24};
};

[[nodiscard]] Model make_quantum(std::size_t input_dim, std::size_t output_dim,
                                 const QuantumSpec& spec, CounterRng rng);
[[nodiscard]] Model make_classical(std::size_t input_dim, std::size_t output_dim,
                                   const ClassicalSpec& spec, CounterRng rng);

void validate(const Model& model);

struct ReadoutMode {
  std::uint64_t shots = 0;  // 0 = exact expectations
  std::uint64_t seed = 0;
};

/// Raw model outputs for an input vector.
[[nodiscard]] std::vector<double> forward(const Model& model, std::span<const double> input,
                                          const ReadoutMode& mode = {});

/// Gradient of upstream . forward(input) with respect to the parameters.
[[nodiscard]] std::vector<double> parameter_gradient(const Model& model, std::span<const double> input,
                                                     std::span<const double> upstream);

[[nodiscard]] std::vector<double> critic_input(std::span<const double> state,
                                               std::span<const double> action);
[[nodiscard]] double critic_value(const Model& critic, std::span<const double> state,
                                  std::span<const double> action);

/// dQ/da: central differences with step 1e-4 for circuits, backprop for MLPs.
[[nodiscard]] std::vector<double> action_gradient(const Model& critic, std::span<const double> state,
                                                  std::span<const double> action);

/// mu(s) without noise.
[[nodiscard]] std::vector<double> policy(const Model& actor, std::span<const double> state,
                                         const ReadoutMode& mode = {});

/// mu(s) plus N(0, sigma^2) per component, renormalized through
/// weights_from_readout. sigma = 0 consumes no randomness.
[[nodiscard]] std::vector<double> act(const Model& actor, std::span<const double> state, double sigma,
                                      CounterRng& rng);

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
};

class ReplayBuffer {
 public:
  void push(Transition t);
  /// n uniform draws with replacement. Throws StateError when empty.
  [[nodiscard]] std::vector<Transition> sample(std::size_t n, CounterRng& rng) const;

  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] bool empty() const { return items_.empty(); }
  [[nodiscard]] const Transition& operator[](std::size_t i) const { return items_[i]; }
  [[nodiscard]] const std::vector<Transition>& items() const { return items_; }

 private:
  std::vector<Transition> items_;
};

enum class Algorithm { Ddpg, Dqn };

[[nodiscard]] std::string to_string(Algorithm a);
[[nodiscard]] Algorithm parse_algorithm(const std::string& tag);

struct AgentConfig {
  double gamma = 0.05;
  double tau = 0.005;
  double sigma_start = 0.05;
  double sigma_end = 0.005;
  std::size_t dqn_samples = 10;
  std::size_t batch_size = 16;
  // Multiplies environment rewards before they enter the buffer. Daily log
  // returns are O(1e-3), far below the [-1, 1] range of a <Z> critic.
  double reward_scale = 1.0;

  void validate() const;
};

/// ddpg: r + gamma Q'(s', mu'(s')). dqn: r + gamma max_k Q'(s', a'_k) over
/// M - 1 uniform draws on the readout cube [-1, 1]^N (through
/// weights_from_readout) plus mu'(s'). Candidate k of transition j depends
/// only on (rng, j, k), so growing M only adds candidates.
[[nodiscard]] std::vector<double> compute_target(Algorithm algorithm,
                                                 const std::vector<Transition>& batch,
                                                 const Model& target_actor,
                                                 const Model& target_critic,
                                                 const AgentConfig& cfg, const CounterRng& rng);

enum class OptimizerKind { Adam, Sgd };

[[nodiscard]] std::string to_string(OptimizerKind k);
[[nodiscard]] OptimizerKind parse_optimizer(const std::string& tag);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double l2 = 0.0;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

[[nodiscard]] OptimizerState make_optimizer(OptimizerKind kind, double learning_rate, double l2,
                                            std::size_t dim);

/// One descent step on `params` along `grads`. Adam uses beta1 = 0.9,
/// beta2 = 0.999, eps = 1e-8 with bias correction.
void optimizer_step(OptimizerState& opt, std::vector<double>& params, std::span<const double> grads);

struct UpdateStats {
  double value = 0.0;              // loss (critic) or objective (actor), pre-step
  std::vector<double> gradient;    // gradient that was handed to the optimizer
};

/// Minimizes (1/n) sum (Q(s_j, a_j) - y_j)^2 + l2 |theta|^2 by one step.
UpdateStats critic_update(Model& critic, const std::vector<Transition>& batch,
                          std::span<const double> targets, OptimizerState& opt);

/// Ascends J = (1/n) sum Q(s_j, mu(s_j)) - l2 |theta|^2 by one step.
UpdateStats actor_update(Model& actor, const Model& critic,
                         const std::vector<std::vector<double>>& states, OptimizerState& opt);

/// target <- tau online + (1 - tau) target.
void soft_update(std::span<const double> online, std::vector<double>& target, double tau);

// Deterministic finite MDP with tabulated rewards.
struct FiniteMdp {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<std::size_t> next;  // states x actions
  std::vector<double> reward;     // states x actions
};

struct QLearningOptions {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
  std::size_t episodes = 1000;
  std::size_t horizon = 10;
  std::uint64_t seed = 0;
};

/// Epsilon-greedy Q-learning; each episode starts from a uniformly drawn
/// state. `initial` (states x actions) defaults to zeros.
[[nodiscard]] std::vector<double> tabular_q_learning(const FiniteMdp& mdp, const QLearningOptions& o,
                                                     std::vector<double> initial = {});

}  // namespace qrlfolio::agents
