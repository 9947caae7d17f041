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

// qrlfolio command-line entry point.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data or
// checkpoint error, 3 numeric failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qrlfolio/commands.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("qrlfolio");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("QRLFOLIO_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("QRLFOLIO_LOG={} is not a level (trace, debug, info, warn, error, critical, off)", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Quantum and classical reinforcement-learning portfolio allocation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> shots;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "Run configuration file");
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--threads", threads, "Worker threads for folds and trials")->check(CLI::PositiveNumber);
  app.add_option("--shots", shots, "Sampled readout shots at test time (0 = exact)");
  app.add_option("--out", out_dir, "Output directory");

  auto* ingest = app.add_subcommand("ingest", "Validate a price file and write its canonical form");
  std::string raw_path, canonical_path;
  ingest->add_option("raw", raw_path, "Input price file")->required();
  ingest->add_option("output", canonical_path, "Canonical output file")->required();

  auto* train = app.add_subcommand("train", "Train an agent on every fold");
  auto* backtest = app.add_subcommand("backtest", "Run the test blocks of every fold");
  std::string checkpoint_path;
  backtest->add_option("--checkpoint", checkpoint_path, "Checkpoint written by train");
  auto* tune = app.add_subcommand("tune", "Random hyperparameter search");
  std::size_t trials = 20;
  tune->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  auto* report = app.add_subcommand("report", "Summarize results files");
  std::vector<std::string> result_files;
  report->add_option("results", result_files, "results.csv files (default: <out>/results.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (ingest->parsed()) {
      qrlfolio::cmd_ingest(raw_path, canonical_path);
      return kOk;
    }
    if (report->parsed()) {
      std::vector<std::filesystem::path> files(result_files.begin(), result_files.end());
      if (files.empty()) files.push_back(std::filesystem::path(out_dir) / "results.csv");
      qrlfolio::cmd_report(files, std::cout);
      return kOk;
    }

    qrlfolio::RunConfig cfg;
    if (!config_path.empty()) {
      cfg = qrlfolio::load_config(config_path);
    } else if (backtest->parsed() && !checkpoint_path.empty()) {
      cfg = qrlfolio::checkpoint_load(checkpoint_path).config;
    } else {
      throw qrlfolio::ConfigError("--config is required");
    }
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (shots) cfg.shots = *shots;

    if (train->parsed()) {
      const auto out = qrlfolio::cmd_train(cfg, out_dir);
      std::cout << out.checkpoint_path.string() << '\n';
    } else if (backtest->parsed()) {
      std::optional<std::filesystem::path> ckpt;
      if (!checkpoint_path.empty()) ckpt = checkpoint_path;
      (void)qrlfolio::cmd_backtest(cfg, ckpt, out_dir);
      qrlfolio::cmd_report({std::filesystem::path(out_dir) / "results.csv"}, std::cout);
    } else if (tune->parsed()) {
      const auto out = qrlfolio::cmd_tune(cfg, trials, out_dir);
      std::cout << (std::filesystem::path(out_dir) / "best.conf").string() << '\n';
    }
    return kOk;
  } catch (const qrlfolio::NumericError& e) {
    spdlog::error("{}", e.what());
    return kNumeric;
  } catch (const qrlfolio::DataError& e) {
    spdlog::error("{}", e.what());
    return kData;
  } catch (const qrlfolio::CheckpointError& e) {
    spdlog::error("{}", e.what());
    return kData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
}
