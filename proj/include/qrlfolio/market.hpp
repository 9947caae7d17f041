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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "qrlfolio/forecast.hpp"

namespace qrlfolio::market {

// T x N closing prices, rows sorted by strictly increasing ISO date.
struct PriceTable {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  std::vector<double> prices;  // row-major

  [[nodiscard]] std::size_t rows() const { return dates.size(); }
  [[nodiscard]] std::size_t assets() const { return tickers.size(); }
  [[nodiscard]] double at(std::size_t t, std::size_t i) const { return prices[t * assets() + i]; }
  [[nodiscard]] std::vector<double> column(std::size_t i, std::size_t first, std::size_t last) const;
};

/// Parses `date,T1,...,Tn` text. Throws DataError naming the offending
/// line, date and ticker.
[[nodiscard]] PriceTable parse_prices(std::istream& in, const std::string& source = "<input>");
[[nodiscard]] PriceTable load_prices(const std::filesystem::path& path);

/// Canonical form: same header, sorted rows, shortest round-trip decimals.
void write_prices(std::ostream& out, const PriceTable& table);

// (T-1) x N log returns; row t is ln(p_{t+1} / p_t).
struct ReturnSeries {
  std::size_t rows = 0;
  std::size_t assets = 0;
  std::vector<double> values;

  [[nodiscard]] double at(std::size_t t, std::size_t i) const { return values[t * assets + i]; }
};

[[nodiscard]] ReturnSeries log_returns(const PriceTable& prices);

enum class CostConvention { Literal, Subtractive };

struct EnvConfig {
  std::size_t lookback = 30;
  std::size_t forecast = 7;
  std::size_t rebalance_period = 30;
  double cost_rate = 0.0015;
  double risk_preference = -0.01;
  double risk_free_annual = 0.0418;
  double trading_days = 252.0;
  CostConvention cost_convention = CostConvention::Literal;
  // Rows of history handed to the forecaster (0 = everything up to t).
  std::size_t forecast_history = 252;

  /// r_f * period / trading_days.
  [[nodiscard]] double risk_free_per_period() const {
    return risk_free_annual * static_cast<double>(rebalance_period) / trading_days;
  }
  void validate() const;
};

[[nodiscard]] std::string to_string(CostConvention c);
[[nodiscard]] CostConvention parse_cost_convention(const std::string& tag);

struct MarketState {
  // Asset-major: N blocks of L window prices, then N blocks of F forecasts,
  // all divided by the asset's price at t - L.
  std::vector<double> values;
  std::size_t index = 0;
  std::size_t forecast_fitted_through = 0;
};

/// Fits one AR model per asset on rows [t - history + 1, t]. Falls back to
/// last-value forecasts when fewer than 30 rows are available.
[[nodiscard]] ForecastModel fit_forecaster(const PriceTable& prices, std::size_t t,
                                           std::size_t history);

[[nodiscard]] MarketState build_state(const PriceTable& prices, std::size_t t,
                                      const EnvConfig& cfg, const ForecastModel& model);
[[nodiscard]] MarketState build_state(const PriceTable& prices, std::size_t t,
                                      const EnvConfig& cfg);

/// w'mu - eta w'Sigma w over a rows x N window of log returns (row-major),
/// with Sigma the rows-1 sample covariance.
[[nodiscard]] double reward(std::span<const double> weights, std::span<const double> window,
                            std::size_t rows, double eta);

/// Literal: sum_i r_i (w_i - c |w_i - w_prev_i|).
/// Subtractive: sum_i r_i w_i - c sum_i |w_i - w_prev_i|.
[[nodiscard]] double net_period_return(std::span<const double> w, std::span<const double> w_prev,
                                       std::span<const double> asset_returns, double cost_rate,
                                       CostConvention convention = CostConvention::Literal);

/// Enforces sum_i max(0, -w_i) <= 1: over-short weights are rescaled to
/// 2 long / 1 short. Returns true when clipping happened.
bool clip_short_exposure(std::vector<double>& w);

// Price data plus a per-index forecast cache shared by every environment and
// policy that reads it. The cache is guarded; everything else is immutable.
class MarketDataset {
 public:
  MarketDataset(PriceTable prices, EnvConfig cfg);

  [[nodiscard]] const PriceTable& prices() const { return prices_; }
  [[nodiscard]] const ReturnSeries& returns() const { return returns_; }
  [[nodiscard]] const EnvConfig& config() const { return cfg_; }

  /// State at index t, forecasts fitted through t only.
  [[nodiscard]] MarketState state(std::size_t t) const;
  /// Returns window rows t-L .. t+F-1, row-major.
  [[nodiscard]] std::vector<double> reward_window(std::size_t t) const;
  /// Simple returns p_{t+period}/p_t - 1 per asset.
  [[nodiscard]] std::vector<double> period_returns(std::size_t t) const;

 private:
  PriceTable prices_;
  ReturnSeries returns_;
  EnvConfig cfg_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::shared_ptr<const ForecastModel>> models_;
};

struct StepResult {
  MarketState next_state;
  double reward = 0.0;
  double net_return = 0.0;
  double turnover = 0.0;
  std::vector<double> applied_weights;
  bool done = false;
};

// One episode over rows [start, end). Decisions are taken at
// max(start, L), then every rebalance_period rows, while a full holding
// period (and the reward's forecast horizon) still fits before `end`.
class Environment {
 public:
  Environment(const MarketDataset& data, std::size_t start, std::size_t end);

  MarketState reset();
  StepResult step(std::span<const double> action);

  [[nodiscard]] bool done() const { return done_; }
  [[nodiscard]] std::size_t index() const { return index_; }
  [[nodiscard]] std::size_t clip_count() const { return clips_; }
  [[nodiscard]] std::size_t first_index() const;
  [[nodiscard]] bool can_step(std::size_t t) const;

 private:
  const MarketDataset* data_;
  std::size_t start_;
  std::size_t end_;
  std::size_t index_ = 0;
  bool done_ = true;
  std::size_t clips_ = 0;
  std::vector<double> prev_weights_;
};

}  // namespace qrlfolio::market
