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

// Off-policy actor-critic training over one fold.
//
// An epoch is one pass of episodes over the fold's training span. With
// episode_offsets = k the epoch runs k episodes whose first decisions are
// staggered by rebalance_period / k rows from the earliest admissible
// decision row, so short spans still yield several
// distinct transitions per epoch. After every environment step the agent
// draws a minibatch from the (unbounded) replay buffer, fits the critic to
// the DDPG or sampled-max DQN target, ascends the critic through the actor
// and soft-updates both target networks. Exploration noise decays linearly
// from sigma_start in the first epoch to sigma_end in the last.
//
// Validation Sharpe of the noiseless policy is computed after each epoch.
// The best-scoring snapshot is kept and training stops after `patience`
// epochs without improvement. Validation spans too short for a Sharpe
// (fewer than two rebalance periods) report NaN; early stopping is then
// inactive and the last epoch's parameters are kept.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qrlfolio/agents.hpp"
#include "qrlfolio/error.hpp"
#include "qrlfolio/evaluation.hpp"
#include "qrlfolio/market.hpp"

namespace qrlfolio::agents {

struct AgentSpec {
  ModelKind kind = ModelKind::Quantum;
  Algorithm algorithm = Algorithm::Ddpg;
  QuantumSpec quantum;
  ClassicalSpec classical;
};

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::Adam;
  double actor_lr = 1e-2;
  double critic_lr = 1e-2;
  double l2 = 1e-6;
};

struct Agent {
  AgentSpec spec;
  Model actor;
  Model critic;
  Model target_actor;
  Model target_critic;
  OptimizerState actor_opt;
  OptimizerState critic_opt;
};

/// Builds actor, critic and their targets. The quantum actor draws up to 32
/// initial parameter vectors and keeps the one whose readout sum stays
/// furthest from the equal-weight guard on `reference_states`; a classical
/// actor starts with unit output biases for the same reason.
[[nodiscard]] Agent make_agent(const AgentSpec& spec, const OptimizerSpec& opt, std::size_t state_dim,
                               std::size_t assets, const CounterRng& rng,
                               const std::vector<std::vector<double>>& reference_states = {});

[[nodiscard]] eval::Policy agent_policy(const Agent& agent, const ReadoutMode& mode = {});

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t patience = 10;
  std::size_t episode_offsets = 1;
  std::size_t updates_per_step = 1;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double mean_reward = 0.0;
  double validation_sharpe = 0.0;  // NaN when the span is too short
  double sigma = 0.0;
  std::size_t transitions = 0;
};

struct TrainResult {
  Agent agent;  // best-validation (or last) snapshot
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
  ReplayBuffer buffer;
  CounterRng rng;  // generator state after training
};

// The critic loss became non-finite. `dump` holds the offending minibatch,
// one JSON object per line.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, std::string dump)
      : NumericError(what), dump_(std::move(dump)) {}
  [[nodiscard]] const std::string& dump() const { return dump_; }

 private:
  std::string dump_;
};

using MetricsSink = std::function<void(const EpochMetrics&)>;

/// Trains on fold.train and validates on fold.validation.
[[nodiscard]] TrainResult train_fold(const market::MarketDataset& data, const eval::FoldSplit& fold,
                                     Agent agent, const AgentConfig& cfg, const TrainConfig& train,
                                     const CounterRng& rng, const MetricsSink& sink = {});

/// States visited by the noiseless environment over a range, for initial
/// readout checks.
[[nodiscard]] std::vector<std::vector<double>> reference_states(const market::MarketDataset& data,
                                                                eval::Range range,
                                                                std::size_t limit = 8);

}  // namespace qrlfolio::agents
