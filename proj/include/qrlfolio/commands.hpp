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

// The ingest / train / backtest / tune / report commands.
//
// Folds (train) and trials (tune) run on `threads` workers. Each worker owns
// its models and generator streams, which derive from (seed, fold) or
// (seed, trial) only, and every output file is written after the workers
// join, in fold or trial order. Results therefore do not depend on the thread
// count.
//
// Files written under the output directory:
//   checkpoint.json      train: selected agent per fold
//   metrics.jsonl        train: one record per fold and epoch
//   diverged_batch.jsonl train: minibatch dump when a loss turns non-finite
//   results.csv          backtest: per-fold rows, then one summary row per series
//   equity.csv           backtest: fold,model,readout,x,y equity curve points
//   trials.jsonl         tune: one record per trial
//   best.conf            tune: the input config with the best trial applied

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qrlfolio/checkpoint.hpp"
#include "qrlfolio/config.hpp"

namespace qrlfolio {

/// Reads any accepted price file and writes its canonical form.
void cmd_ingest(const std::filesystem::path& raw, const std::filesystem::path& out);

/// Dataset and folds described by a validated config.
[[nodiscard]] market::MarketDataset load_dataset(const RunConfig& cfg);
[[nodiscard]] std::vector<eval::FoldSplit> make_folds(const RunConfig& cfg, std::size_t rows);

/// Builds and trains the agent for one fold. Deterministic in (cfg, fold).
[[nodiscard]] agents::TrainResult train_agent(const market::MarketDataset& data,
                                              const eval::FoldSplit& fold, const RunConfig& cfg,
                                              const agents::MetricsSink& sink = {});

struct TrainOutput {
  Checkpoint checkpoint;
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;
};

/// Trains every fold and writes checkpoint.json and metrics.jsonl.
/// TrainingDiverged is rethrown after diverged_batch.jsonl is written.
TrainOutput cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct BacktestRow {
  std::size_t fold = 0;
  std::string model;
  std::string readout;  // "exact" or "shots=<n>"
  double sharpe = 0.0;
  double mean_return = 0.0;
  double turnover = 0.0;
  std::size_t periods = 0;
  bool degenerate = false;
};

struct BacktestSummary {
  std::string model;
  std::string readout;
  eval::FoldSummary sharpe;
  bool any_degenerate = false;
};

struct BacktestOutput {
  std::vector<BacktestRow> rows;
  std::vector<BacktestSummary> summaries;
  std::vector<std::vector<double>> equity;  // parallel to rows
  std::vector<std::vector<std::size_t>> equity_x;
};

/// Backtests every fold's test block. Agent models need a checkpoint; with
/// cfg.shots > 0 a quantum agent is run with both exact and sampled readout.
BacktestOutput cmd_backtest(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                            const std::filesystem::path& out_dir);

struct TrialRecord {
  std::size_t index = 0;
  double actor_lr = 0.0;
  double critic_lr = 0.0;
  double l2 = 0.0;
  double risk_preference = 0.0;
  double gamma = 0.0;
  agents::OptimizerKind optimizer = agents::OptimizerKind::Adam;
  std::vector<double> fold_sharpes;  // best validation Sharpe per fold
  double mean_sharpe = 0.0;          // over finite folds; NaN if none
};

/// Draws trial `index`: learning rates log-uniform on [1e-4, 1e-1], l2
/// log-uniform on [1e-6, 1e-1], risk preference uniform on [-1, -1e-2], gamma
/// log-uniform on [1e-3, 1e-1], optimizer Adam or SGD with equal odds.
[[nodiscard]] TrialRecord sample_trial(std::uint64_t seed, std::size_t index);
void apply_trial(RunConfig& cfg, const TrialRecord& trial);

struct TuneOutput {
  std::vector<TrialRecord> trials;
  std::size_t best = 0;  // position in trials
  RunConfig best_config;
};

/// Random search scored by mean best-validation Sharpe. Writes trials.jsonl
/// and best.conf. A trial whose training diverges scores NaN.
TuneOutput cmd_tune(const RunConfig& cfg, std::size_t n_trials, const std::filesystem::path& out_dir);

/// Reads results files and writes a plain-text table of the summary rows.
void cmd_report(const std::vector<std::filesystem::path>& results, std::ostream& out);

}  // namespace qrlfolio
