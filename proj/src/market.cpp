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

#include "qrlfolio/market.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qrlfolio/error.hpp"

namespace qrlfolio::market {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool valid_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int y = std::stoi(s.substr(0, 4));
  const int m = std::stoi(s.substr(5, 2));
  const int d = std::stoi(s.substr(8, 2));
  if (m < 1 || m > 12 || d < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const int limit = kDays[m - 1] + ((m == 2 && leap) ? 1 : 0);
  return d <= limit;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> PriceTable::column(std::size_t i, std::size_t first, std::size_t last) const {
  std::vector<double> out;
  out.reserve(last - first);
  for (std::size_t t = first; t < last; ++t) out.push_back(at(t, i));
  return out;
}

PriceTable parse_prices(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_commas(trim(line));
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": empty price file");
  if (header.size() < 2) throw DataError(source + ": header needs a date column and at least one ticker");
  if (header[0] != "date") throw DataError(source + ": first header column must be 'date'");

  PriceTable table;
  table.tickers.assign(header.begin() + 1, header.end());
  for (std::size_t i = 0; i < table.tickers.size(); ++i) {
    if (table.tickers[i].empty()) throw DataError(source + ": empty ticker name in header");
    for (std::size_t j = 0; j < i; ++j) {
      if (table.tickers[j] == table.tickers[i]) {
        throw DataError(source + ": duplicate ticker " + table.tickers[i]);
      }
    }
  }
  const std::size_t n = table.tickers.size();

  struct Row {
    std::string date;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    auto cells = split_commas(t);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() > n + 1) throw DataError(where + ": too many columns");
    if (!valid_iso_date(cells[0])) throw DataError(where + ": invalid date '" + cells[0] + "'");
    cells.resize(n + 1);
    Row row{cells[0], std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& cell = cells[i + 1];
      if (cell.empty()) {
        throw DataError(where + ": missing price for " + table.tickers[i] + " on " + row.date);
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError(where + ": unparseable price '" + cell + "' for " + table.tickers[i] +
                        " on " + row.date);
      }
      if (v <= 0.0) {
        throw DataError(where + ": non-positive price for " + table.tickers[i] + " on " + row.date);
      }
      row.values[i] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(source + ": no price rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].date == rows[r - 1].date) {
      throw DataError(source + ": dates not strictly increasing (duplicate " + rows[r].date + ")");
    }
  }
  table.dates.reserve(rows.size());
  table.prices.reserve(rows.size() * n);
  for (auto& r : rows) {
    table.dates.push_back(std::move(r.date));
    table.prices.insert(table.prices.end(), r.values.begin(), r.values.end());
  }
  return table;
}

PriceTable load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file " + path.string());
  return parse_prices(in, path.string());
}

void write_prices(std::ostream& out, const PriceTable& table) {
  out << "date";
  for (const auto& t : table.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << table.dates[r];
    for (std::size_t i = 0; i < table.assets(); ++i) out << ',' << format_double(table.at(r, i));
    out << '\n';
  }
}

ReturnSeries log_returns(const PriceTable& prices) {
  if (prices.rows() < 2) throw DataError("log_returns needs at least two price rows");
  for (std::size_t t = 0; t < prices.rows(); ++t) {
    for (std::size_t i = 0; i < prices.assets(); ++i) {
      if (!(prices.at(t, i) > 0.0)) {
        throw DataError("non-positive price for " + prices.tickers[i] + " at row " + std::to_string(t));
      }
    }
  }
  ReturnSeries r;
  r.rows = prices.rows() - 1;
  r.assets = prices.assets();
  r.values.resize(r.rows * r.assets);
  for (std::size_t t = 0; t < r.rows; ++t) {
    for (std::size_t i = 0; i < r.assets; ++i) {
      r.values[t * r.assets + i] = std::log(prices.at(t + 1, i) / prices.at(t, i));
    }
  }
  return r;
}

std::string to_string(CostConvention c) {
  return c == CostConvention::Literal ? "literal" : "subtractive";
}

CostConvention parse_cost_convention(const std::string& tag) {
  if (tag == "literal") return CostConvention::Literal;
  if (tag == "subtractive") return CostConvention::Subtractive;
  throw ConfigError("unknown cost convention '" + tag + "'");
}

void EnvConfig::validate() const {
  if (lookback < 1 || forecast < 1 || rebalance_period < 1) {
    throw ConfigError("lookback, forecast and rebalance period must all be >= 1");
  }
  if (!(cost_rate >= 0.0)) throw ConfigError("cost rate must be >= 0");
  if (!(trading_days > 0.0)) throw ConfigError("trading days must be positive");
  if (!std::isfinite(risk_preference) || !std::isfinite(risk_free_annual)) {
    throw ConfigError("risk preference and risk-free rate must be finite");
  }
}

ForecastModel fit_forecaster(const PriceTable& prices, std::size_t t, std::size_t history) {
  if (t >= prices.rows()) throw ArgumentError("forecast index past the end of the price table");
  const std::size_t available = t + 1;
  const std::size_t used = history == 0 ? available : std::min(history, available);
  const std::size_t first = t + 1 - used;
  ForecastModel model;
  model.fitted_through = t;
  for (std::size_t i = 0; i < prices.assets(); ++i) {
    if (used < kMinForecastHistory) {
      model.assets.push_back(ArModel::naive(prices.at(t, i)));
    } else {
      const auto series = prices.column(i, first, t + 1);
      model.assets.push_back(fit_ar_auto(series));
    }
  }
  return model;
}

MarketState build_state(const PriceTable& prices, std::size_t t, const EnvConfig& cfg,
                        const ForecastModel& model) {
  const std::size_t L = cfg.lookback;
  const std::size_t F = cfg.forecast;
  const std::size_t n = prices.assets();
  if (t < L) {
    throw ArgumentError("state index " + std::to_string(t) + " is before the lookback window " +
                        std::to_string(L));
  }
  if (t >= prices.rows()) throw ArgumentError("state index past the end of the price table");
  if (model.fitted_through > t) {
    throw StateError("forecaster fitted through row " + std::to_string(model.fitted_through) +
                     " used for a state at row " + std::to_string(t));
  }
  if (model.assets.size() != n) throw ArgumentError("forecast model asset count mismatch");
  MarketState s;
  s.index = t;
  s.forecast_fitted_through = model.fitted_through;
  s.values.resize(n * (L + F));
  const auto fc = forecast(model, F);
  for (std::size_t i = 0; i < n; ++i) {
    const double base = prices.at(t - L, i);
    for (std::size_t k = 0; k < L; ++k) s.values[i * L + k] = prices.at(t - L + k, i) / base;
    for (std::size_t k = 0; k < F; ++k) s.values[n * L + i * F + k] = fc[i * F + k] / base;
  }
  return s;
}

MarketState build_state(const PriceTable& prices, std::size_t t, const EnvConfig& cfg) {
  return build_state(prices, t, cfg, fit_forecaster(prices, t, cfg.forecast_history));
}

double reward(std::span<const double> weights, std::span<const double> window, std::size_t rows,
              double eta) {
  const std::size_t n = weights.size();
  if (rows < 2) throw ArgumentError("reward window needs at least two rows");
  if (window.size() != rows * n) throw ArgumentError("reward window shape does not match weights");
  std::vector<double> mu(n, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < n; ++i) mu[i] += window[r * n + i];
  for (auto& m : mu) m /= static_cast<double>(rows);
  // Portfolio variance w'Sigma w equals the sample variance of w'r_t.
  double mean_ret = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_ret += weights[i] * mu[i];
  double var = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double pr = 0.0;
    for (std::size_t i = 0; i < n; ++i) pr += weights[i] * (window[r * n + i] - mu[i]);
    var += pr * pr;
  }
  var /= static_cast<double>(rows - 1);
  return mean_ret - eta * var;
}

double net_period_return(std::span<const double> w, std::span<const double> w_prev,
                         std::span<const double> asset_returns, double cost_rate,
                         CostConvention convention) {
  if (w.size() != w_prev.size() || w.size() != asset_returns.size()) {
    throw ArgumentError("net_period_return: dimension mismatch");
  }
  double total = 0.0;
  if (convention == CostConvention::Literal) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      total += asset_returns[i] * (w[i] - cost_rate * std::abs(w[i] - w_prev[i]));
    }
  } else {
    double turnover = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      total += asset_returns[i] * w[i];
      turnover += std::abs(w[i] - w_prev[i]);
    }
    total -= cost_rate * turnover;
  }
  return total;
}

bool clip_short_exposure(std::vector<double>& w) {
  double shorts = 0.0;
  double longs = 0.0;
  for (double v : w) (v < 0 ? shorts : longs) += std::abs(v);
  if (shorts <= 1.0 + 1e-9) return false;
  for (auto& v : w) v = v < 0 ? v / shorts : 2.0 * v / longs;
  return true;
}

MarketDataset::MarketDataset(PriceTable prices, EnvConfig cfg)
    : prices_(std::move(prices)), returns_(log_returns(prices_)), cfg_(cfg) {
  cfg_.validate();
}

MarketState MarketDataset::state(std::size_t t) const {
  std::shared_ptr<const ForecastModel> model;
  {
    std::lock_guard lock(mutex_);
    auto it = models_.find(t);
    if (it != models_.end()) model = it->second;
  }
  if (!model) {
    model = std::make_shared<const ForecastModel>(fit_forecaster(prices_, t, cfg_.forecast_history));
    std::lock_guard lock(mutex_);
    models_.emplace(t, model);
  }
  return build_state(prices_, t, cfg_, *model);
}

std::vector<double> MarketDataset::reward_window(std::size_t t) const {
  const std::size_t L = cfg_.lookback;
  const std::size_t F = cfg_.forecast;
  if (t < L || t + F > returns_.rows) throw ArgumentError("reward window out of range at row " + std::to_string(t));
  const std::size_t n = returns_.assets;
  return {returns_.values.begin() + static_cast<std::ptrdiff_t>((t - L) * n),
          returns_.values.begin() + static_cast<std::ptrdiff_t>((t + F) * n)};
}

std::vector<double> MarketDataset::period_returns(std::size_t t) const {
  const std::size_t end = t + cfg_.rebalance_period;
  if (end >= prices_.rows()) throw ArgumentError("holding period runs past the price table");
  std::vector<double> r(prices_.assets());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = prices_.at(end, i) / prices_.at(t, i) - 1.0;
  return r;
}

Environment::Environment(const MarketDataset& data, std::size_t start, std::size_t end)
    : data_(&data), start_(start), end_(std::min(end, data.prices().rows())) {}

std::size_t Environment::first_index() const { return std::max(start_, data_->config().lookback); }

bool Environment::can_step(std::size_t t) const {
  const auto& cfg = data_->config();
  return t + std::max(cfg.rebalance_period, cfg.forecast) < end_;
}

MarketState Environment::reset() {
  index_ = first_index();
  done_ = !can_step(index_);
  clips_ = 0;
  prev_weights_.assign(data_->prices().assets(), 0.0);
  return data_->state(index_);
}

StepResult Environment::step(std::span<const double> action) {
  if (done_) throw StateError("step called on a finished episode");
  const std::size_t n = data_->prices().assets();
  if (action.size() != n) throw ArgumentError("action has " + std::to_string(action.size()) +
                                              " weights for " + std::to_string(n) + " assets");
  double sum = 0.0;
  for (double v : action) {
    if (!std::isfinite(v)) throw ArgumentError("action has a non-finite weight");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ArgumentError("action weights sum to " + std::to_string(sum) + ", expected 1");
  }
  std::vector<double> w(action.begin(), action.end());
  if (clip_short_exposure(w)) ++clips_;

  const auto& cfg = data_->config();
  StepResult out;
  const auto window = data_->reward_window(index_);
  out.reward = reward(w, window, cfg.lookback + cfg.forecast, cfg.risk_preference);
  const auto r = data_->period_returns(index_);
  out.net_return = net_period_return(w, prev_weights_, r, cfg.cost_rate, cfg.cost_convention);
  for (std::size_t i = 0; i < n; ++i) out.turnover += std::abs(w[i] - prev_weights_[i]);
  out.applied_weights = w;
  prev_weights_ = std::move(w);

  index_ += cfg.rebalance_period;
  out.next_state = data_->state(index_);
  done_ = !can_step(index_);
  out.done = done_;
  return out;
}

}  // namespace qrlfolio::market
