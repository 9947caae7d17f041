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

#include "qrlfolio/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qrlfolio/encoding.hpp"
#include "qrlfolio/error.hpp"

namespace qrlfolio::agents {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ArgumentError(std::string(what) + ": expected " + std::to_string(want) + " values, got " +
                        std::to_string(got));
  }
}

void axpy(double a, std::span<const double> x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

std::vector<double> weights_from_readout(std::span<const double> z) {
  if (z.empty()) throw ArgumentError("readout is empty");
  double sum = 0.0;
  for (double v : z) sum += v;
  std::vector<double> w(z.size());
  if (!(std::abs(sum) >= kReadoutGuard)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(z.size()));
    return w;
  }
  // The last weight takes the rounding residual so the sum is 1 to the ulp.
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    w[i] = z[i] / sum;
    rest -= w[i];
  }
  w.back() = rest;
  return w;
}

// ---------------------------------------------------------------------------
// MLP

std::size_t MlpShape::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) n += widths[l + 1] * (widths[l] + 1);
  return n;
}

namespace {

void check_mlp(const MlpShape& shape, std::span<const double> params, std::span<const double> input) {
  if (shape.widths.size() < 2) throw ArgumentError("mlp needs an input and an output width");
  for (std::size_t w : shape.widths) {
    if (w == 0) throw ArgumentError("mlp layer width must be positive");
  }
  require_size(params.size(), shape.parameter_count(), "mlp parameters");
  require_size(input.size(), shape.inputs(), "mlp input");
}

// Per-layer activations; acts[0] is the input, acts.back() the output.
std::vector<std::vector<double>> mlp_forward(const MlpShape& shape, std::span<const double> params,
                                             std::span<const double> input) {
  std::vector<std::vector<double>> acts;
  acts.emplace_back(input.begin(), input.end());
  std::size_t off = 0;
  const std::size_t layers = shape.widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = shape.widths[l];
    const std::size_t out = shape.widths[l + 1];
    const double* w = params.data() + off;
    const double* b = w + out * in;
    std::vector<double> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * acts[l][i];
      next[o] = l + 1 < layers ? std::tanh(s) : s;
    }
    acts.push_back(std::move(next));
    off += out * (in + 1);
  }
  return acts;
}

}  // namespace

std::vector<double> mlp_evaluate(const MlpShape& shape, std::span<const double> params,
                                 std::span<const double> input) {
  check_mlp(shape, params, input);
  return std::move(mlp_forward(shape, params, input).back());
}

MlpGradient mlp_gradient(const MlpShape& shape, std::span<const double> params,
                         std::span<const double> input, std::span<const double> upstream) {
  check_mlp(shape, params, input);
  require_size(upstream.size(), shape.outputs(), "mlp upstream");
  const auto acts = mlp_forward(shape, params, input);
  const std::size_t layers = shape.widths.size() - 1;

  MlpGradient g;
  g.params.assign(params.size(), 0.0);
  std::vector<std::size_t> offsets(layers);
  for (std::size_t l = 0, off = 0; l < layers; ++l) {
    offsets[l] = off;
    off += shape.widths[l + 1] * (shape.widths[l] + 1);
  }
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = shape.widths[l];
    const std::size_t out = shape.widths[l + 1];
    if (l + 1 < layers) {
      for (std::size_t o = 0; o < out; ++o) delta[o] *= 1.0 - acts[l + 1][o] * acts[l + 1][o];
    }
    const double* w = params.data() + offsets[l];
    double* gw = g.params.data() + offsets[l];
    double* gb = gw + out * in;
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      gb[o] += delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        gw[o * in + i] += delta[o] * acts[l][i];
        prev[i] += w[o * in + i] * delta[o];
      }
    }
    delta = std::move(prev);
  }
  g.input = std::move(delta);
  return g;
}

std::size_t hidden_width_for(std::size_t target, std::size_t inputs, std::size_t outputs) {
  const double per_unit = static_cast<double>(inputs + outputs + 1);
  const double h = (static_cast<double>(target) - static_cast<double>(outputs)) / per_unit;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(h)));
}

// ---------------------------------------------------------------------------
// Models

std::string to_string(ModelKind kind) { return kind == ModelKind::Quantum ? "quantum" : "classical"; }

ModelKind parse_model_kind(const std::string& tag) {
  if (tag == "quantum") return ModelKind::Quantum;
  if (tag == "classical") return ModelKind::Classical;
  throw ArgumentError("unknown model kind '" + tag + "'");
}

Model make_quantum(std::size_t input_dim, std::size_t output_dim, const QuantumSpec& spec,
                   CounterRng rng) {
  if (input_dim == 0 || output_dim == 0) throw ArgumentError("model dimensions must be positive");
  const std::size_t need = std::max(enc::qubits_required(input_dim), output_dim);
  const std::size_t qubits = spec.qubits == 0 ? need : spec.qubits;
  if (qubits < need) {
    throw CapacityError(std::to_string(qubits) + " qubits cannot hold " + std::to_string(input_dim) +
                        " inputs with " + std::to_string(output_dim) + " readouts (need " +
                        std::to_string(need) + ")");
  }
  Model m;
  m.kind = ModelKind::Quantum;
  m.input_dim = input_dim;
  m.output_dim = output_dim;
  m.ansatz = vqc::build_ansatz(qubits, spec.layers, spec.pattern);
  for (std::size_t q = 0; q < output_dim; ++q) m.readout.push_back(q);
  m.params.resize(m.ansatz.parameter_count());
  for (auto& p : m.params) p = rng.normal(0.0, spec.init_scale);
  return m;
}

Model make_classical(std::size_t input_dim, std::size_t output_dim, const ClassicalSpec& spec,
                     CounterRng rng) {
  if (input_dim == 0 || output_dim == 0) throw ArgumentError("model dimensions must be positive");
  Model m;
  m.kind = ModelKind::Classical;
  m.input_dim = input_dim;
  m.output_dim = output_dim;
  m.mlp.widths.push_back(input_dim);
  for (std::size_t h : spec.hidden) m.mlp.widths.push_back(h);
  m.mlp.widths.push_back(output_dim);
  m.params.assign(m.mlp.parameter_count(), 0.0);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < m.mlp.widths.size(); ++l) {
    const std::size_t in = m.mlp.widths[l];
    const std::size_t out = m.mlp.widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t k = 0; k < out * in; ++k) m.params[off + k] = rng.uniform(-bound, bound);
    off += out * (in + 1);
  }
  return m;
}

void validate(const Model& m) {
  if (m.kind == ModelKind::Quantum) {
    vqc::validate(m.ansatz);
    require_size(m.params.size(), m.ansatz.parameter_count(), "circuit parameters");
    if (m.readout.size() != m.output_dim) throw ArgumentError("readout count differs from output size");
    if (enc::qubits_required(m.input_dim) > m.ansatz.num_qubits) {
      throw CapacityError("circuit register too small for its input");
    }
  } else {
    if (m.mlp.widths.size() < 2 || m.mlp.inputs() != m.input_dim || m.mlp.outputs() != m.output_dim) {
      throw ArgumentError("mlp shape differs from model dimensions");
    }
    require_size(m.params.size(), m.mlp.parameter_count(), "mlp parameters");
  }
}

std::vector<double> forward(const Model& model, std::span<const double> input, const ReadoutMode& mode) {
  require_size(input.size(), model.input_dim, "model input");
  if (model.kind == ModelKind::Classical) return mlp_evaluate(model.mlp, model.params, input);
  const auto amp = enc::encode_amplitudes(input, model.ansatz.num_qubits);
  if (mode.shots > 0) {
    return vqc::evaluate_sampled(model.ansatz, model.params, amp, model.readout, mode.shots, mode.seed);
  }
  return vqc::evaluate(model.ansatz, model.params, amp, model.readout);
}

std::vector<double> parameter_gradient(const Model& model, std::span<const double> input,
                                       std::span<const double> upstream) {
  require_size(input.size(), model.input_dim, "model input");
  require_size(upstream.size(), model.output_dim, "upstream");
  if (model.kind == ModelKind::Classical) {
    return mlp_gradient(model.mlp, model.params, input, upstream).params;
  }
  const auto amp = enc::encode_amplitudes(input, model.ansatz.num_qubits);
  return vqc::gradient_parameter_shift(model.ansatz, model.params, amp, model.readout, upstream);
}

std::vector<double> critic_input(std::span<const double> state, std::span<const double> action) {
  std::vector<double> x(state.begin(), state.end());
  x.insert(x.end(), action.begin(), action.end());
  return x;
}

double critic_value(const Model& critic, std::span<const double> state, std::span<const double> action) {
  return forward(critic, critic_input(state, action))[0];
}

std::vector<double> action_gradient(const Model& critic, std::span<const double> state,
                                    std::span<const double> action) {
  auto x = critic_input(state, action);
  const std::size_t base = state.size();
  if (critic.kind == ModelKind::Classical) {
    const std::vector<double> one{1.0};
    const auto g = mlp_gradient(critic.mlp, critic.params, x, one);
    return {g.input.begin() + static_cast<std::ptrdiff_t>(base), g.input.end()};
  }
  std::vector<double> grad(action.size());
  for (std::size_t k = 0; k < action.size(); ++k) {
    const double a = x[base + k];
    x[base + k] = a + kActionStep;
    const double up = forward(critic, x)[0];
    x[base + k] = a - kActionStep;
    const double down = forward(critic, x)[0];
    x[base + k] = a;
    grad[k] = (up - down) / (2.0 * kActionStep);
  }
  return grad;
}

std::vector<double> policy(const Model& actor, std::span<const double> state, const ReadoutMode& mode) {
  return weights_from_readout(forward(actor, state, mode));
}

std::vector<double> act(const Model& actor, std::span<const double> state, double sigma, CounterRng& rng) {
  if (sigma < 0.0) throw ArgumentError("exploration noise must be non-negative");
  auto w = policy(actor, state);
  if (sigma == 0.0) return w;
  for (auto& v : w) v += rng.normal(0.0, sigma);
  return weights_from_readout(w);
}

// ---------------------------------------------------------------------------
// Replay and targets

void ReplayBuffer::push(Transition t) { items_.push_back(std::move(t)); }

std::vector<Transition> ReplayBuffer::sample(std::size_t n, CounterRng& rng) const {
  if (items_.empty()) throw StateError("cannot sample from an empty replay buffer");
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(items_[rng.below(items_.size())]);
  return out;
}

std::string to_string(Algorithm a) { return a == Algorithm::Ddpg ? "ddpg" : "dqn"; }

Algorithm parse_algorithm(const std::string& tag) {
  if (tag == "ddpg") return Algorithm::Ddpg;
  if (tag == "dqn") return Algorithm::Dqn;
  throw ArgumentError("unknown algorithm '" + tag + "'");
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("agent.gamma must lie in (0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("agent.tau must lie in (0, 1]");
  if (!(sigma_start >= 0.0 && sigma_end >= 0.0)) throw ConfigError("exploration noise must be >= 0");
  if (dqn_samples < 1) throw ConfigError("agent.dqn_samples must be positive");
  if (batch_size < 1) throw ConfigError("agent.batch_size must be positive");
  if (!(reward_scale > 0.0) || !std::isfinite(reward_scale)) {
    throw ConfigError("agent.reward_scale must be positive");
  }
}

std::vector<double> compute_target(Algorithm algorithm, const std::vector<Transition>& batch,
                                   const Model& target_actor, const Model& target_critic,
                                   const AgentConfig& cfg, const CounterRng& rng) {
  if (batch.empty()) throw ArgumentError("target batch is empty");
  std::vector<double> y(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& tr = batch[j];
    const auto proposal = policy(target_actor, tr.next_state);
    double best = critic_value(target_critic, tr.next_state, proposal);
    if (algorithm == Algorithm::Dqn) {
      std::vector<double> z(proposal.size());
      for (std::size_t k = 0; k + 1 < cfg.dqn_samples; ++k) {
        CounterRng draw = rng.split({j, k});
        for (auto& v : z) v = draw.uniform(-1.0, 1.0);
        best = std::max(best, critic_value(target_critic, tr.next_state, weights_from_readout(z)));
      }
    }
    y[j] = tr.reward + cfg.gamma * best;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Optimization

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(const std::string& tag) {
  if (tag == "adam" || tag == "Adam") return OptimizerKind::Adam;
  if (tag == "sgd" || tag == "SGD") return OptimizerKind::Sgd;
  throw ArgumentError("unknown optimizer '" + tag + "'");
}

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate, double l2, std::size_t dim) {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(l2 >= 0.0)) throw ArgumentError("L2 coefficient must be non-negative");
  OptimizerState s;
  s.kind = kind;
  s.learning_rate = learning_rate;
  s.l2 = l2;
  if (kind == OptimizerKind::Adam) {
    s.m.assign(dim, 0.0);
    s.v.assign(dim, 0.0);
  }
  return s;
}

void optimizer_step(OptimizerState& opt, std::vector<double>& params, std::span<const double> grads) {
  require_size(grads.size(), params.size(), "gradient");
  if (opt.kind == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= opt.learning_rate * grads[i];
    ++opt.step;
    return;
  }
  require_size(opt.m.size(), params.size(), "adam moments");
  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  constexpr double eps = 1e-8;
  ++opt.step;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(opt.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    opt.m[i] = b1 * opt.m[i] + (1.0 - b1) * grads[i];
    opt.v[i] = b2 * opt.v[i] + (1.0 - b2) * grads[i] * grads[i];
    const double mhat = opt.m[i] / c1;
    const double vhat = opt.v[i] / c2;
    params[i] -= opt.learning_rate * mhat / (std::sqrt(vhat) + eps);
  }
}

UpdateStats critic_update(Model& critic, const std::vector<Transition>& batch,
                          std::span<const double> targets, OptimizerState& opt) {
  require_size(targets.size(), batch.size(), "critic targets");
  if (batch.empty()) throw ArgumentError("critic batch is empty");
  const auto n = static_cast<double>(batch.size());
  UpdateStats st;
  st.gradient.assign(critic.params.size(), 0.0);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto x = critic_input(batch[j].state, batch[j].action);
    const double err = forward(critic, x)[0] - targets[j];
    st.value += err * err / n;
    const std::vector<double> up{2.0 * err / n};
    axpy(1.0, parameter_gradient(critic, x, up), st.gradient);
  }
  double sq = 0.0;
  for (double p : critic.params) sq += p * p;
  st.value += opt.l2 * sq;
  axpy(2.0 * opt.l2, critic.params, st.gradient);
  optimizer_step(opt, critic.params, st.gradient);
  return st;
}

UpdateStats actor_update(Model& actor, const Model& critic, const std::vector<std::vector<double>>& states,
                         OptimizerState& opt) {
  if (states.empty()) throw ArgumentError("actor batch is empty");
  const auto n = static_cast<double>(states.size());
  UpdateStats st;
  std::vector<double> ascent(actor.params.size(), 0.0);
  for (const auto& s : states) {
    const auto z = forward(actor, s);
    double sum = 0.0;
    for (double v : z) sum += v;
    const auto a = weights_from_readout(z);
    st.value += critic_value(critic, s, a) / n;
    if (!(std::abs(sum) >= kReadoutGuard)) continue;  // equal-weight branch is flat in theta
    const auto ga = action_gradient(critic, s, a);
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += ga[k] * a[k];
    std::vector<double> gz(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) gz[k] = (ga[k] - dot) / sum;
    axpy(1.0 / n, parameter_gradient(actor, s, gz), ascent);
  }
  double sq = 0.0;
  for (double p : actor.params) sq += p * p;
  st.value -= opt.l2 * sq;
  st.gradient.resize(actor.params.size());
  for (std::size_t i = 0; i < ascent.size(); ++i) st.gradient[i] = -ascent[i] + 2.0 * opt.l2 * actor.params[i];
  optimizer_step(opt, actor.params, st.gradient);
  return st;
}

void soft_update(std::span<const double> online, std::vector<double>& target, double tau) {
  require_size(online.size(), target.size(), "soft update");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("tau must lie in [0, 1]");
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = tau * online[i] + (1.0 - tau) * target[i];
}

// ---------------------------------------------------------------------------
// Tabular oracle

std::vector<double> tabular_q_learning(const FiniteMdp& mdp, const QLearningOptions& o,
                                       std::vector<double> initial) {
  const std::size_t cells = mdp.states * mdp.actions;
  if (cells == 0 || mdp.next.size() != cells || mdp.reward.size() != cells) {
    throw ArgumentError("malformed MDP tables");
  }
  for (std::size_t s : mdp.next) {
    if (s >= mdp.states) throw ArgumentError("MDP transition leaves the state space");
  }
  std::vector<double> q = initial.empty() ? std::vector<double>(cells, 0.0) : std::move(initial);
  require_size(q.size(), cells, "initial Q table");

  auto greedy = [&](std::size_t s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < mdp.actions; ++a) {
      if (q[s * mdp.actions + a] > q[s * mdp.actions + best]) best = a;
    }
    return best;
  };
  CounterRng rng(o.seed);
  for (std::size_t ep = 0; ep < o.episodes; ++ep) {
    std::size_t s = rng.below(mdp.states);
    for (std::size_t step = 0; step < o.horizon; ++step) {
      const std::size_t a = o.epsilon > 0.0 && rng.uniform() < o.epsilon ? rng.below(mdp.actions) : greedy(s);
      const std::size_t cell = s * mdp.actions + a;
      const std::size_t s2 = mdp.next[cell];
      const double target = mdp.reward[cell] + o.gamma * q[s2 * mdp.actions + greedy(s2)];
      q[cell] += o.alpha * (target - q[cell]);
      s = s2;
    }
  }
  return q;
}

}  // namespace qrlfolio::agents
