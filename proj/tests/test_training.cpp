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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixtures.hpp"
#include "qrlfolio/training.hpp"

using namespace qrlfolio;
using namespace qrlfolio::agents;

namespace {

market::EnvConfig small_env() {
  market::EnvConfig c;
  c.lookback = 5;
  c.forecast = 2;
  c.rebalance_period = 10;
  return c;
}

eval::FoldSplit small_fold() { return eval::expanding_folds(200, 9, 0.3)[4]; }

AgentSpec spec_for(ModelKind kind) {
  AgentSpec s;
  s.kind = kind;
  s.quantum.layers = 2;
  s.classical.hidden = {6};
  return s;
}

TrainResult run(const market::MarketDataset& data, const eval::FoldSplit& fold, ModelKind kind,
                const TrainConfig& tc, std::uint64_t seed = 5, AgentConfig ac = {}) {
  const std::size_t n = data.prices().assets();
  const std::size_t dim = n * (data.config().lookback + data.config().forecast);
  const CounterRng rng(seed);
  auto agent = make_agent(spec_for(kind), {}, dim, n, rng, reference_states(data, fold.train));
  return train_fold(data, fold, agent, ac, tc, rng);
}

market::PriceTable constant_prices(std::size_t rows) {
  auto t = fixtures::drift_market(rows, 2, 0.0, 0.0, 0.0);
  return t;
}

}  // namespace

TEST_CASE("fold layout used by these tests") {
  const auto f = small_fold();
  CHECK(f.train == eval::Range{0, 70});
  CHECK(f.validation == eval::Range{70, 100});
  CHECK(f.test == eval::Range{100, 120});
}

TEST_CASE("training is deterministic for a fixed seed") {
  const market::MarketDataset data(fixtures::drift_market(200, 2, 0.002, -0.002), small_env());
  TrainConfig tc;
  tc.epochs = 3;
  for (auto kind : {ModelKind::Quantum, ModelKind::Classical}) {
    CAPTURE(to_string(kind));
    const auto a = run(data, small_fold(), kind, tc);
    const auto b = run(data, small_fold(), kind, tc);
    CHECK(a.agent.actor.params == b.agent.actor.params);
    CHECK(a.agent.critic.params == b.agent.critic.params);
    CHECK(a.agent.target_actor.params == b.agent.target_actor.params);
    CHECK(a.agent.critic_opt.m == b.agent.critic_opt.m);
    CHECK(a.rng == b.rng);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
      CHECK(a.history[e].mean_loss == b.history[e].mean_loss);
      CHECK(a.history[e].mean_reward == b.history[e].mean_reward);
    }
    const auto c = run(data, small_fold(), kind, tc, 6);
    CHECK(c.agent.actor.params != a.agent.actor.params);
  }
}

TEST_CASE("one epoch yields one metrics record and fills the buffer") {
  const market::MarketDataset data(fixtures::drift_market(200, 2, 0.002, -0.002), small_env());
  TrainConfig tc;
  tc.epochs = 1;
  tc.episode_offsets = 2;
  std::vector<EpochMetrics> seen;
  const std::size_t n = 2;
  const std::size_t dim = n * 7;
  const CounterRng rng(1);
  auto agent = make_agent(spec_for(ModelKind::Classical), {}, dim, n, rng);
  const auto r = train_fold(data, small_fold(), agent, {}, tc, rng,
                            [&](const EpochMetrics& m) { seen.push_back(m); });
  REQUIRE(seen.size() == 1);
  CHECK(r.history.size() == 1);
  CHECK(r.epochs_run == 1);
  CHECK(r.best_epoch == 1);
  // Two episodes over train rows [0, 70): decisions at 5..55 and 10..50.
  CHECK(seen[0].transitions == 6 + 5);
  CHECK(r.buffer.size() == 11);
  CHECK(std::isfinite(seen[0].mean_loss));
  CHECK(std::isfinite(seen[0].validation_sharpe));
  CHECK(seen[0].sigma == doctest::Approx(AgentConfig{}.sigma_start));
}

TEST_CASE("exploration noise decays linearly across epochs") {
  const market::MarketDataset data(fixtures::drift_market(200, 2, 0.001, -0.001), small_env());
  TrainConfig tc;
  tc.epochs = 5;
  tc.patience = 100;
  AgentConfig ac;
  ac.sigma_start = 0.4;
  ac.sigma_end = 0.0;
  const auto r = run(data, small_fold(), ModelKind::Classical, tc, 2, ac);
  REQUIRE(r.history.size() == 5);
  for (std::size_t e = 0; e < 5; ++e) CHECK(r.history[e].sigma == doctest::Approx(0.4 - 0.1 * double(e)));
}

TEST_CASE("a flat validation score stops after patience epochs") {
  const market::MarketDataset data(constant_prices(200), small_env());
  for (std::size_t patience : {1u, 3u}) {
    TrainConfig tc;
    tc.epochs = 50;
    tc.patience = patience;
    const auto r = run(data, small_fold(), ModelKind::Classical, tc);
    CHECK(r.early_stopped);
    CHECK(r.epochs_run == patience + 1);
    CHECK(r.best_epoch == 1);
    CHECK(r.history.size() == patience + 1);
  }
}

TEST_CASE("the kept snapshot is the best validation epoch") {
  const market::MarketDataset data(fixtures::drift_market(200, 2, 0.003, -0.003), small_env());
  TrainConfig tc;
  tc.epochs = 8;
  tc.patience = 3;
  const auto r = run(data, small_fold(), ModelKind::Quantum, tc);
  double best = -1e300;
  std::size_t arg = 0;
  for (const auto& m : r.history) {
    if (m.validation_sharpe > best) {
      best = m.validation_sharpe;
      arg = m.epoch;
    }
  }
  CHECK(r.best_epoch == arg);
  const auto replay = eval::run_backtest(agent_policy(r.agent), data, small_fold().validation);
  CHECK(replay.sharpe == best);
}

TEST_CASE("a validation span without a Sharpe keeps the last epoch") {
  const market::MarketDataset data(fixtures::drift_market(200, 2, 0.002, -0.002), small_env());
  auto fold = small_fold();
  fold.validation = {70, 85};  // one rebalance period only
  TrainConfig tc;
  tc.epochs = 4;
  tc.patience = 1;
  const auto r = run(data, fold, ModelKind::Classical, tc);
  CHECK_FALSE(r.early_stopped);
  CHECK(r.epochs_run == 4);
  CHECK(r.best_epoch == 4);
  for (const auto& m : r.history) CHECK(std::isnan(m.validation_sharpe));
}

TEST_CASE("a non-finite critic loss raises with the minibatch dump") {
  const market::MarketDataset data(fixtures::drift_market(200, 2, 0.002, -0.002), small_env());
  TrainConfig tc;
  tc.epochs = 2;
  AgentConfig ac;
  ac.reward_scale = 1e308;
  ac.batch_size = 4;
  bool thrown = false;
  try {
    (void)run(data, small_fold(), ModelKind::Classical, tc, 5, ac);
  } catch (const TrainingDiverged& e) {
    thrown = true;
    CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    std::istringstream lines(e.dump());
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
      const auto rec = nlohmann::json::parse(line);
      CHECK(rec.contains("state"));
      CHECK(rec.contains("action"));
      CHECK(rec.contains("reward"));
      CHECK(rec.contains("next_state"));
      CHECK(rec.contains("target"));
      ++count;
    }
    CHECK(count == 4);
  }
  CHECK(thrown);
  CHECK_THROWS_AS((void)run(data, small_fold(), ModelKind::Classical, tc, 5, ac), NumericError);
}

TEST_CASE("bad training settings are rejected") {
  const market::MarketDataset data(fixtures::drift_market(200, 2, 0.0, 0.0), small_env());
  TrainConfig tc;
  tc.epochs = 0;
  CHECK_THROWS_AS((void)run(data, small_fold(), ModelKind::Classical, tc), ConfigError);
  tc.epochs = 1;
  tc.patience = 0;
  CHECK_THROWS_AS((void)run(data, small_fold(), ModelKind::Classical, tc), ConfigError);
  tc.patience = 1;
  AgentConfig ac;
  ac.tau = 0.0;
  CHECK_THROWS_AS((void)run(data, small_fold(), ModelKind::Classical, tc, 1, ac), ConfigError);
}

TEST_CASE("the quantum actor starts away from the readout guard") {
  const market::MarketDataset data(fixtures::drift_market(200, 2, 0.002, -0.002), small_env());
  const auto states = reference_states(data, small_fold().train);
  REQUIRE(states.size() == 6);
  AgentSpec s = spec_for(ModelKind::Quantum);
  const auto a = make_agent(s, {}, 14, 2, CounterRng(3), states);
  for (const auto& st : states) {
    double sum = 0.0;
    for (double z : forward(a.actor, st)) sum += z;
    CHECK(std::abs(sum) >= kReadoutGuard);
  }
  CHECK(a.target_actor.params == a.actor.params);
  CHECK(a.target_critic.params == a.critic.params);
  CHECK(a.critic.input_dim == 16);
  CHECK(a.critic.output_dim == 1);
}
