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

#include "qrlfolio/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace qrlfolio {

namespace {

using Json = nlohmann::ordered_json;

enum Stream : std::uint64_t { kFolds = 11, kShots = 12, kTrials = 13 };

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, n) on up to `threads` workers. The exception of
// the lowest failing index is rethrown after all workers finish.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F body) {
  std::vector<std::exception_ptr> errors(n);
  const auto run = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::size_t state_dim(const market::MarketDataset& data) {
  const auto& c = data.config();
  return data.prices().assets() * (c.lookback + c.forecast);
}

double best_validation(const agents::TrainResult& r) {
  double best = kNaN;
  for (const auto& m : r.history) {
    if (std::isfinite(m.validation_sharpe) && !(m.validation_sharpe <= best)) best = m.validation_sharpe;
  }
  return best;
}

double mean_finite(const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  }
  return n ? sum / double(n) : kNaN;
}

std::string csv_number(double v) { return format_double(v); }

eval::Policy baseline_for(const RunConfig& cfg, const market::MarketDataset& data, const eval::FoldSplit& f) {
  const std::size_t n = data.prices().assets();
  if (cfg.model == RunModel::EqualWeights) return eval::equal_weight_policy(n).policy();
  eval::MvoOptions opt = cfg.mvo;
  opt.risk_free = cfg.env.risk_free_per_period();
  const auto returns = eval::period_return_matrix(data, {f.train.begin, f.validation.end});
  return eval::mvo_bruteforce(returns, n, opt).policy();
}

}  // namespace

void cmd_ingest(const std::filesystem::path& raw, const std::filesystem::path& out) {
  const auto table = market::load_prices(raw);
  std::ostringstream text;
  market::write_prices(text, table);
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("cannot write " + out.string());
  file << text.str();
  spdlog::info("ingested {} rows x {} assets into {}", table.rows(), table.assets(), out.string());
}

market::MarketDataset load_dataset(const RunConfig& cfg) {
  return market::MarketDataset(market::load_prices(cfg.data), cfg.env);
}

std::vector<eval::FoldSplit> make_folds(const RunConfig& cfg, std::size_t rows) {
  try {
    return eval::expanding_folds(rows, cfg.folds.count, cfg.folds.val_fraction,
                                 cfg.env.lookback + std::max(cfg.env.rebalance_period, cfg.env.forecast) + 1);
  } catch (const ArgumentError& e) {
    throw DataError(cfg.data.string() + ": " + e.what());
  }
}

agents::TrainResult train_agent(const market::MarketDataset& data, const eval::FoldSplit& fold,
                                const RunConfig& cfg, const agents::MetricsSink& sink) {
  const std::size_t in = state_dim(data);
  const std::size_t n = data.prices().assets();
  const CounterRng rng = CounterRng(cfg.seed).split({kFolds, fold.index});
  auto agent = agents::make_agent(cfg.agent_spec(in, n), cfg.optimizer, in, n, rng,
                                  agents::reference_states(data, fold.train));
  return agents::train_fold(data, fold, std::move(agent), cfg.agent, cfg.train, rng, sink);
}

TrainOutput cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  if (!is_agent(cfg.model)) {
    throw ConfigError("model '" + to_string(cfg.model) + "' has nothing to train; run backtest instead");
  }
  const auto data = load_dataset(cfg);
  const auto folds = make_folds(cfg, data.prices().rows());
  const auto spec = cfg.agent_spec(state_dim(data), data.prices().assets());
  (void)agents::make_agent(spec, cfg.optimizer, state_dim(data), data.prices().assets(), CounterRng(cfg.seed));
  ensure_dir(out_dir);

  std::vector<agents::TrainResult> results(folds.size());
  try {
    parallel_for(folds.size(), cfg.threads, [&](std::size_t i) {
      results[i] = train_agent(data, folds[i], cfg, [&, i](const agents::EpochMetrics& m) {
        spdlog::debug("fold {} epoch {}: loss {} reward {} validation sharpe {}", folds[i].index, m.epoch,
                      m.mean_loss, m.mean_reward, m.validation_sharpe);
      });
    });
  } catch (const agents::TrainingDiverged& e) {
    const auto path = out_dir / "diverged_batch.jsonl";
    open_out(path) << e.dump();
    spdlog::error("{}; minibatch written to {}", e.what(), path.string());
    throw;
  }

  TrainOutput out;
  out.checkpoint.config = cfg;
  out.metrics_path = out_dir / "metrics.jsonl";
  auto metrics = open_out(out.metrics_path);
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const auto& r = results[i];
    for (const auto& m : r.history) {
      Json rec;
      rec["fold"] = folds[i].index;
      rec["epoch"] = m.epoch;
      rec["mean_loss"] = number(m.mean_loss);
      rec["mean_reward"] = number(m.mean_reward);
      rec["validation_sharpe"] = number(m.validation_sharpe);
      rec["sigma"] = m.sigma;
      rec["transitions"] = m.transitions;
      metrics << rec.dump() << '\n';
    }
    if (r.early_stopped) {
      spdlog::info("fold {}: early stop at epoch {}, keeping epoch {}", folds[i].index, r.epochs_run,
                   r.best_epoch);
    } else {
      spdlog::info("fold {}: ran {} epochs, keeping epoch {}", folds[i].index, r.epochs_run, r.best_epoch);
    }
    FoldCheckpoint f;
    f.fold = folds[i].index;
    f.best_epoch = r.best_epoch;
    f.epochs_run = r.epochs_run;
    f.early_stopped = r.early_stopped;
    f.rng = r.rng;
    f.agent = r.agent;
    out.checkpoint.folds.push_back(std::move(f));
  }
  out.checkpoint_path = out_dir / "checkpoint.json";
  checkpoint_save(out.checkpoint_path, out.checkpoint);
  return out;
}

BacktestOutput cmd_backtest(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
                            const std::filesystem::path& out_dir) {
  cfg.validate();
  std::optional<Checkpoint> ckpt;
  if (is_agent(cfg.model)) {
    if (!checkpoint) {
      throw ConfigError("model '" + to_string(cfg.model) + "' needs a checkpoint (--checkpoint)");
    }
    ckpt = checkpoint_load(*checkpoint);
  }
  const auto data = load_dataset(cfg);
  const auto folds = make_folds(cfg, data.prices().rows());
  if (ckpt) {
    if (ckpt->folds.size() != folds.size()) {
      throw ConfigError("checkpoint has " + std::to_string(ckpt->folds.size()) + " folds, config has " +
                        std::to_string(folds.size()));
    }
    for (std::size_t i = 0; i < folds.size(); ++i) {
      if (ckpt->folds[i].fold != folds[i].index ||
          ckpt->folds[i].agent.actor.input_dim != state_dim(data) ||
          ckpt->folds[i].agent.actor.output_dim != data.prices().assets()) {
        throw ConfigError("checkpoint fold " + std::to_string(ckpt->folds[i].fold) +
                          " does not match the configured data and environment");
      }
    }
  }
  ensure_dir(out_dir);

  struct Series {
    std::string readout;
    std::uint64_t shots;
  };
  std::vector<Series> series{{"exact", 0}};
  if (cfg.shots > 0) {
    if (ckpt && ckpt->folds.front().agent.actor.kind == agents::ModelKind::Quantum) {
      series.push_back({"shots=" + std::to_string(cfg.shots), cfg.shots});
    } else {
      spdlog::warn("shots = {} ignored: model '{}' has no circuit readout", cfg.shots, to_string(cfg.model));
    }
  }

  const std::string model = to_string(cfg.model);
  std::vector<std::vector<eval::BacktestResult>> results(series.size(),
                                                         std::vector<eval::BacktestResult>(folds.size()));
  parallel_for(folds.size() * series.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t s = job / folds.size();
    const std::size_t i = job % folds.size();
    eval::Policy policy;
    if (ckpt) {
      agents::ReadoutMode mode;
      mode.shots = series[s].shots;
      mode.seed = CounterRng(cfg.seed).split({kShots, folds[i].index}).key();
      policy = agents::agent_policy(ckpt->folds[i].agent, mode);
    } else {
      policy = baseline_for(cfg, data, folds[i]);
    }
    results[s][i] = eval::run_backtest(policy, data, folds[i].test);
  });

  BacktestOutput out;
  for (std::size_t s = 0; s < series.size(); ++s) {
    BacktestSummary sum;
    sum.model = model;
    sum.readout = series[s].readout;
    for (std::size_t i = 0; i < folds.size(); ++i) {
      const auto& r = results[s][i];
      BacktestRow row;
      row.fold = folds[i].index;
      row.model = model;
      row.readout = series[s].readout;
      row.sharpe = r.sharpe;
      row.mean_return = r.returns.empty() ? kNaN : mean_finite(r.returns);
      row.turnover = r.turnover;
      row.periods = r.returns.size();
      row.degenerate = r.degenerate;
      sum.any_degenerate = sum.any_degenerate || r.degenerate;
      out.rows.push_back(row);
      out.equity.push_back(r.equity);
      std::vector<std::size_t> x{r.indices.empty() ? folds[i].test.begin : r.indices.front()};
      for (std::size_t k = 0; k < r.indices.size(); ++k) x.push_back(r.indices[k] + cfg.env.rebalance_period);
      out.equity_x.push_back(std::move(x));
    }
    sum.sharpe = eval::aggregate_folds(results[s]);
    out.summaries.push_back(std::move(sum));
  }

  auto csv = open_out(out_dir / "results.csv");
  csv << "record,fold,model,readout,sharpe,sharpe_std,mean_return,turnover,periods,degenerate\n";
  for (const auto& r : out.rows) {
    csv << "fold," << r.fold << ',' << r.model << ',' << r.readout << ',' << csv_number(r.sharpe) << ",,"
        << csv_number(r.mean_return) << ',' << csv_number(r.turnover) << ',' << r.periods << ','
        << (r.degenerate ? 1 : 0) << '\n';
  }
  for (const auto& s : out.summaries) {
    csv << "summary,," << s.model << ',' << s.readout << ',' << csv_number(s.sharpe.mean) << ','
        << (s.sharpe.stddev ? csv_number(*s.sharpe.stddev) : std::string()) << ",,,"
        << s.sharpe.values.size() << ',' << (s.any_degenerate ? 1 : 0) << '\n';
  }
  auto eq = open_out(out_dir / "equity.csv");
  eq << "fold,model,readout,x,y\n";
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    const auto& r = out.rows[k];
    for (std::size_t p = 0; p < out.equity[k].size() && p < out.equity_x[k].size(); ++p) {
      eq << r.fold << ',' << r.model << ',' << r.readout << ',' << out.equity_x[k][p] << ','
         << csv_number(out.equity[k][p]) << '\n';
    }
  }
  for (const auto& s : out.summaries) {
    spdlog::info("{} [{}]: mean test sharpe {} over {} folds", s.model, s.readout, s.sharpe.mean,
                 s.sharpe.values.size());
  }
  return out;
}

TrialRecord sample_trial(std::uint64_t seed, std::size_t index) {
  CounterRng rng = CounterRng(seed).split({kTrials, index});
  const auto log_uniform = [&rng](double lo, double hi) {
    return std::exp(rng.uniform(std::log(lo), std::log(hi)));
  };
  TrialRecord t;
  t.index = index;
  t.actor_lr = log_uniform(1e-4, 1e-1);
  t.critic_lr = log_uniform(1e-4, 1e-1);
  t.l2 = log_uniform(1e-6, 1e-1);
  t.risk_preference = rng.uniform(-1.0, -1e-2);
  t.gamma = log_uniform(1e-3, 1e-1);
  t.optimizer = rng.below(2) == 0 ? agents::OptimizerKind::Adam : agents::OptimizerKind::Sgd;
  return t;
}

void apply_trial(RunConfig& cfg, const TrialRecord& t) {
  cfg.optimizer.actor_lr = t.actor_lr;
  cfg.optimizer.critic_lr = t.critic_lr;
  cfg.optimizer.l2 = t.l2;
  cfg.env.risk_preference = t.risk_preference;
  cfg.agent.gamma = t.gamma;
  cfg.optimizer.kind = t.optimizer;
}

TuneOutput cmd_tune(const RunConfig& cfg, std::size_t n_trials, const std::filesystem::path& out_dir) {
  cfg.validate();
  if (!is_agent(cfg.model)) throw ConfigError("tune needs an agent model");
  if (n_trials < 1) throw ConfigError("tune needs at least one trial");
  const auto prices = market::load_prices(cfg.data);
  {
    const market::MarketDataset probe(prices, cfg.env);
    (void)make_folds(cfg, prices.rows());
    const auto spec = cfg.agent_spec(state_dim(probe), prices.assets());
    (void)agents::make_agent(spec, cfg.optimizer, state_dim(probe), prices.assets(), CounterRng(cfg.seed));
  }
  ensure_dir(out_dir);

  TuneOutput out;
  out.trials.resize(n_trials);
  parallel_for(n_trials, cfg.threads, [&](std::size_t i) {
    TrialRecord t = sample_trial(cfg.seed, i);
    RunConfig trial_cfg = cfg;
    apply_trial(trial_cfg, t);
    const market::MarketDataset data(prices, trial_cfg.env);
    for (const auto& fold : make_folds(trial_cfg, prices.rows())) {
      try {
        t.fold_sharpes.push_back(best_validation(train_agent(data, fold, trial_cfg)));
      } catch (const agents::TrainingDiverged& e) {
        spdlog::warn("trial {}: {}", i, e.what());
        t.fold_sharpes.push_back(kNaN);
      }
    }
    t.mean_sharpe = mean_finite(t.fold_sharpes);
    out.trials[i] = std::move(t);
  });

  out.best = 0;
  for (std::size_t i = 1; i < n_trials; ++i) {
    const double s = out.trials[i].mean_sharpe;
    const double b = out.trials[out.best].mean_sharpe;
    if (std::isfinite(s) && (!std::isfinite(b) || s > b)) out.best = i;
  }
  out.best_config = cfg;
  apply_trial(out.best_config, out.trials[out.best]);

  auto log = open_out(out_dir / "trials.jsonl");
  for (const auto& t : out.trials) {
    Json rec;
    rec["trial"] = t.index;
    rec["actor_lr"] = t.actor_lr;
    rec["critic_lr"] = t.critic_lr;
    rec["l2"] = t.l2;
    rec["risk_preference"] = t.risk_preference;
    rec["gamma"] = t.gamma;
    rec["optimizer"] = agents::to_string(t.optimizer);
    Json folds = Json::array();
    for (double s : t.fold_sharpes) folds.push_back(number(s));
    rec["validation_sharpe"] = folds;
    rec["mean_validation_sharpe"] = number(t.mean_sharpe);
    log << rec.dump() << '\n';
  }
  auto best = open_out(out_dir / "best.conf");
  best << "# best of " << n_trials << " trials (trial " << out.trials[out.best].index
       << ", mean validation sharpe " << format_double(out.trials[out.best].mean_sharpe) << ")\n"
       << to_text(out.best_config);
  spdlog::info("best trial {} with mean validation sharpe {}", out.trials[out.best].index,
               out.trials[out.best].mean_sharpe);
  return out;
}

void cmd_report(const std::vector<std::filesystem::path>& results, std::ostream& out) {
  if (results.empty()) throw ConfigError("report needs at least one results file");
  struct Line {
    std::string model, readout, mean, stddev, folds, degenerate;
  };
  std::vector<Line> lines;
  for (const auto& path : results) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open results file " + path.string());
    std::string row;
    std::size_t lineno = 0;
    while (std::getline(in, row)) {
      ++lineno;
      if (lineno == 1 || row.rfind("summary,", 0) != 0) continue;
      std::vector<std::string> cells;
      std::stringstream ss(row);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      while (cells.size() < 10) cells.emplace_back();
      if (cells.size() != 10) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 10 columns");
      }
      lines.push_back({cells[2], cells[3], cells[4], cells[5].empty() ? "-" : cells[5], cells[8],
                       cells[9] == "1" ? "yes" : "no"});
    }
  }
  out << std::left << std::setw(16) << "model" << std::setw(14) << "readout" << std::setw(24) << "mean sharpe"
      << std::setw(24) << "std" << std::setw(7) << "folds"
      << "degenerate\n";
  for (const auto& l : lines) {
    out << std::left << std::setw(16) << l.model << std::setw(14) << l.readout << std::setw(24) << l.mean
        << std::setw(24) << l.stddev << std::setw(7) << l.folds << l.degenerate << '\n';
  }
}

}  // namespace qrlfolio
