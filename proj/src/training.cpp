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

#include "qrlfolio/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace qrlfolio::agents {

namespace {

enum Stream : std::uint64_t { kInit = 1, kExplore = 2, kBatch = 3, kTarget = 4 };

constexpr std::size_t kInitCandidates = 32;

double readout_margin(const Model& actor, const std::vector<std::vector<double>>& states) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& s : states) {
    double sum = 0.0;
    for (double v : forward(actor, s)) sum += v;
    margin = std::min(margin, std::abs(sum));
  }
  return margin;
}

Model build(const AgentSpec& spec, std::size_t in, std::size_t out, const CounterRng& rng) {
  return spec.kind == ModelKind::Quantum ? make_quantum(in, out, spec.quantum, rng)
                                         : make_classical(in, out, spec.classical, rng);
}

std::string dump_batch(const std::vector<Transition>& batch, const std::vector<double>& targets) {
  std::ostringstream out;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    nlohmann::json rec;
    rec["state"] = batch[j].state;
    rec["action"] = batch[j].action;
    rec["reward"] = batch[j].reward;
    rec["next_state"] = batch[j].next_state;
    rec["target"] = targets[j];
    out << rec.dump() << '\n';
  }
  return out.str();
}

}  // namespace

Agent make_agent(const AgentSpec& spec, const OptimizerSpec& opt, std::size_t state_dim, std::size_t assets,
                 const CounterRng& rng, const std::vector<std::vector<double>>& states) {
  const CounterRng init = rng.split(kInit);
  Agent a;
  a.spec = spec;
  a.actor = build(spec, state_dim, assets, init.split({0, 0}));
  if (spec.kind == ModelKind::Quantum && !states.empty()) {
    double best = readout_margin(a.actor, states);
    for (std::size_t k = 1; k < kInitCandidates && best < 4.0 * kReadoutGuard; ++k) {
      auto cand = build(spec, state_dim, assets, init.split({0, k}));
      const double m = readout_margin(cand, states);
      if (m > best) {
        best = m;
        a.actor = std::move(cand);
      }
    }
  } else if (spec.kind == ModelKind::Classical) {
    std::fill(a.actor.params.end() - static_cast<std::ptrdiff_t>(assets), a.actor.params.end(), 1.0);
  }
  a.critic = build(spec, state_dim + assets, 1, init.split({1, 0}));
  a.target_actor = a.actor;
  a.target_critic = a.critic;
  a.actor_opt = make_optimizer(opt.kind, opt.actor_lr, opt.l2, a.actor.parameter_count());
  a.critic_opt = make_optimizer(opt.kind, opt.critic_lr, opt.l2, a.critic.parameter_count());
  return a;
}

eval::Policy agent_policy(const Agent& agent, const ReadoutMode& mode) {
  if (mode.shots == 0) {
    return [actor = agent.actor](const market::MarketState& s) { return policy(actor, s.values); };
  }
  return [actor = agent.actor, mode](const market::MarketState& s) {
    ReadoutMode m = mode;
    m.seed = CounterRng(mode.seed).split(s.index).key();
    return policy(actor, s.values, m);
  };
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be positive");
  if (patience < 1) throw ConfigError("train.patience must be positive");
  if (episode_offsets < 1) throw ConfigError("train.episode_offsets must be positive");
  if (updates_per_step < 1) throw ConfigError("train.updates_per_step must be positive");
}

std::vector<std::vector<double>> reference_states(const market::MarketDataset& data, eval::Range range,
                                                  std::size_t limit) {
  std::vector<std::vector<double>> out;
  market::Environment env(data, range.begin, range.end);
  for (std::size_t t = env.first_index(); env.can_step(t) && out.size() < limit;
       t += data.config().rebalance_period) {
    out.push_back(data.state(t).values);
  }
  return out;
}

TrainResult train_fold(const market::MarketDataset& data, const eval::FoldSplit& fold, Agent agent,
                       const AgentConfig& cfg, const TrainConfig& train, const CounterRng& rng,
                       const MetricsSink& sink) {
  cfg.validate();
  train.validate();
  validate(agent.actor);
  validate(agent.critic);

  const std::size_t period = data.config().rebalance_period;
  const std::size_t stride = std::max<std::size_t>(1, period / train.episode_offsets);
  const std::size_t first = std::max(fold.train.begin, data.config().lookback);
  CounterRng explore = rng.split(kExplore);
  CounterRng batches = rng.split(kBatch);
  const CounterRng targets = rng.split(kTarget);

  TrainResult result;
  result.agent = agent;
  double best_val = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::uint64_t update_id = 0;

  for (std::size_t epoch = 1; epoch <= train.epochs; ++epoch) {
    const double frac = train.epochs > 1 ? double(epoch - 1) / double(train.epochs - 1) : 0.0;
    const double sigma = cfg.sigma_start + frac * (cfg.sigma_end - cfg.sigma_start);
    double loss_sum = 0.0;
    double reward_sum = 0.0;
    std::size_t updates = 0;
    std::size_t steps = 0;

    for (std::size_t k = 0; k < train.episode_offsets; ++k) {
      market::Environment env(data, first + k * stride, fold.train.end);
      auto state = env.reset();
      while (!env.done()) {
        const auto action = act(agent.actor, state.values, sigma, explore);
        auto step = env.step(action);
        reward_sum += step.reward;
        ++steps;
        result.buffer.push({state.values, step.applied_weights, cfg.reward_scale * step.reward,
                            step.next_state.values});
        state = std::move(step.next_state);

        for (std::size_t u = 0; u < train.updates_per_step; ++u) {
          const auto batch = result.buffer.sample(cfg.batch_size, batches);
          const auto y = compute_target(agent.spec.algorithm, batch, agent.target_actor,
                                        agent.target_critic, cfg, targets.split(update_id++));
          const auto c = critic_update(agent.critic, batch, y, agent.critic_opt);
          if (!std::isfinite(c.value)) {
            throw TrainingDiverged("critic loss became non-finite in fold " + std::to_string(fold.index) +
                                       ", epoch " + std::to_string(epoch),
                                   dump_batch(batch, y));
          }
          loss_sum += c.value;
          ++updates;
          std::vector<std::vector<double>> states;
          states.reserve(batch.size());
          for (const auto& t : batch) states.push_back(t.state);
          (void)actor_update(agent.actor, agent.critic, states, agent.actor_opt);
          soft_update(agent.critic.params, agent.target_critic.params, cfg.tau);
          soft_update(agent.actor.params, agent.target_actor.params, cfg.tau);
        }
      }
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.sigma = sigma;
    m.transitions = steps;
    m.mean_loss = updates ? loss_sum / double(updates) : std::numeric_limits<double>::quiet_NaN();
    m.mean_reward = steps ? reward_sum / double(steps) : std::numeric_limits<double>::quiet_NaN();
    m.validation_sharpe = eval::run_backtest(agent_policy(agent), data, fold.validation).sharpe;
    result.history.push_back(m);
    result.epochs_run = epoch;
    if (sink) sink(m);

    if (std::isfinite(m.validation_sharpe)) {
      if (m.validation_sharpe > best_val) {
        best_val = m.validation_sharpe;
        result.agent = agent;
        result.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= train.patience) {
        result.early_stopped = true;
        break;
      }
    } else {
      result.agent = agent;
      result.best_epoch = epoch;
    }
  }
  result.rng = explore;
  return result;
}

}  // namespace qrlfolio::agents
