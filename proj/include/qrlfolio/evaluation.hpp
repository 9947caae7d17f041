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

// Walk-forward evaluation: fold geometry, Sharpe ratio, static baselines and
// the backtest loop shared by baselines and trained agents.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrlfolio/market.hpp"

namespace qrlfolio::eval {

inline constexpr double kSharpeEpsilon = 1e-7;

struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  [[nodiscard]] std::size_t size() const { return end - begin; }
  bool operator==(const Range&) const = default;
};

struct FoldSplit {
  std::size_t index = 0;  // 1-based
  Range train;
  Range validation;
  Range test;
};

/// Splits [0, rows) into n_folds + 1 blocks of floor(rows / (n_folds + 1))
/// rows. Fold k trains on blocks 1..k, holding out the last val_fraction of
/// that span for validation, and tests on block k + 1. Blocks shorter than
/// min_block rows are an ArgumentError.
[[nodiscard]] std::vector<FoldSplit> expanding_folds(std::size_t rows, std::size_t n_folds = 7,
                                                     double val_fraction = 0.2,
                                                     std::size_t min_block = 0);

/// (mean - r_f) / (sample std + eps). Needs at least two returns.
[[nodiscard]] double sharpe(std::span<const double> returns, double risk_free,
                            double eps = kSharpeEpsilon);

using Policy = std::function<std::vector<double>(const market::MarketState&)>;

enum class BaselineKind { EqualWeights, Mvo };

struct BaselinePolicy {
  BaselineKind kind = BaselineKind::EqualWeights;
  std::vector<double> weights;

  [[nodiscard]] Policy policy() const;
};

[[nodiscard]] BaselinePolicy equal_weight_policy(std::size_t assets);

struct MvoOptions {
  double grid_step = 0.25;
  double lower = -1.0;
  double upper = 2.0;
  double risk_free = 0.0;
  // Above this many assets the grid is searched by pairwise coordinate moves
  // from equal weights instead of exhaustively.
  std::size_t exhaustive_max_assets = 4;
};

/// Static weights maximizing the in-sample Sharpe of `returns` (rows x N,
/// row-major) over the admissible grid: bounds, sum 1, total short <= 1.
/// Ties go to the point closest (L1) to equal weights, then lexicographic.
[[nodiscard]] BaselinePolicy mvo_bruteforce(std::span<const double> returns, std::size_t assets,
                                            const MvoOptions& options);

/// Non-overlapping simple returns over `range` taken every rebalance period
/// from max(range.begin, L), as the environment would realize them.
[[nodiscard]] std::vector<double> period_return_matrix(const market::MarketDataset& data,
                                                       Range range);

struct BacktestResult {
  std::vector<std::size_t> indices;           // decision rows
  std::vector<std::vector<double>> weights;   // applied weights per period
  std::vector<double> returns;                // net period returns
  std::vector<double> equity;                 // 1 followed by cumulative growth
  double sharpe = 0.0;                        // NaN with fewer than 2 periods
  double turnover = 0.0;                      // sum of |w_t - w_{t-1}|
  bool degenerate = false;                    // zero return volatility
};

[[nodiscard]] BacktestResult run_backtest(const Policy& policy, const market::MarketDataset& data,
                                          Range range);

struct FoldSummary {
  std::vector<double> values;
  double mean = 0.0;
  std::optional<double> stddev;  // absent for a single fold
};

[[nodiscard]] FoldSummary aggregate_folds(std::span<const double> fold_sharpes);
[[nodiscard]] FoldSummary aggregate_folds(const std::vector<BacktestResult>& results);

}  // namespace qrlfolio::eval
