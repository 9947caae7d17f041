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

#include "qrlfolio/forecast.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "qrlfolio/error.hpp"

namespace qrlfolio::market {

namespace {

// Rows reserved for lags so every (p, d) candidate shares the same targets.
constexpr std::size_t kLagReserve = kMaxArOrder + 1;

std::vector<double> tail_of(std::span<const double> y) {
  const std::size_t keep = std::min(y.size(), kLagReserve);
  return {y.end() - static_cast<std::ptrdiff_t>(keep), y.end()};
}

struct Fit {
  ArModel model;
  double rss = 0.0;
  std::size_t rows = 0;
};

Fit fit_on_common_sample(std::span<const double> y, std::size_t p, std::size_t d) {
  const std::size_t m = y.size();
  const std::size_t rows = m - kLagReserve;
  // Working series x: levels or first differences, indexed like y.
  auto x = [&](std::size_t t) { return d == 0 ? y[t] : y[t] - y[t - 1]; };

  Eigen::MatrixXd design(rows, p + 1);
  Eigen::VectorXd target(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = kLagReserve + r;
    target(r) = x(t);
    design(r, 0) = 1.0;
    for (std::size_t i = 1; i <= p; ++i) design(r, i) = x(t - i);
  }
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
  const Eigen::VectorXd resid = target - design * beta;

  Fit fit;
  fit.rows = rows;
  fit.rss = resid.squaredNorm();
  fit.model.order = p;
  fit.model.differencing = d;
  fit.model.intercept = beta(0);
  fit.model.coefficients.assign(beta.data() + 1, beta.data() + 1 + p);
  fit.model.tail = tail_of(y);
  return fit;
}

void check_series(std::span<const double> series) {
  if (series.size() < kMinForecastHistory) {
    throw ArgumentError("forecaster needs at least " + std::to_string(kMinForecastHistory) +
                        " observations, got " + std::to_string(series.size()));
  }
  for (double v : series) {
    if (!std::isfinite(v)) throw ArgumentError("forecaster input has a non-finite value");
  }
}

}  // namespace

ArModel ArModel::naive(double last) {
  ArModel m;
  m.order = 0;
  m.differencing = 0;
  m.tail = {last};
  return m;
}

ArModel fit_ar(std::span<const double> series, std::size_t order, std::size_t differencing) {
  check_series(series);
  if (order < 1 || order > kMaxArOrder || differencing > 1) {
    throw ArgumentError("AR order must be in [1, 5] and differencing in {0, 1}");
  }
  Fit fit = fit_on_common_sample(series, order, differencing);
  const auto n = static_cast<double>(fit.rows);
  fit.model.aic = n * std::log(std::max(fit.rss / n, 1e-300)) + 2.0 * static_cast<double>(order + 1);
  return fit.model;
}

ArModel fit_ar_auto(std::span<const double> series) {
  check_series(series);
  double lo = series[0];
  double hi = series[0];
  double mean_sq = 0.0;
  for (double v : series) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean_sq += v * v;
  }
  mean_sq /= static_cast<double>(series.size());
  const double floor = std::max(1e-20 * mean_sq, 1e-300);
  const auto n = static_cast<double>(series.size() - kLagReserve);

  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
    ArModel m;
    m.order = 1;
    m.differencing = 0;
    m.coefficients = {0.0};
    m.intercept = series.back();
    m.tail = tail_of(series);
    m.aic = n * std::log(floor) + 4.0;
    return m;
  }

  ArModel best;
  bool have = false;
  for (std::size_t d : {std::size_t{1}, std::size_t{0}}) {
    for (std::size_t p = 1; p <= kMaxArOrder; ++p) {
      Fit fit = fit_on_common_sample(series, p, d);
      fit.model.aic = n * std::log(std::max(fit.rss / n, floor)) + 2.0 * static_cast<double>(p + 1);
      if (!have || fit.model.aic < best.aic) {
        best = std::move(fit.model);
        have = true;
      }
    }
  }
  return best;
}

std::vector<double> forecast(const ArModel& model, std::size_t horizon) {
  std::vector<double> out;
  out.reserve(horizon);
  if (horizon == 0) return out;
  if (model.tail.empty()) throw ArgumentError("forecast: model has no history");
  if (model.order == 0) {
    out.assign(horizon, model.tail.back());
    return out;
  }
  // Working history in the model's own domain (levels or differences).
  std::vector<double> hist;
  if (model.differencing == 0) {
    hist = model.tail;
  } else {
    for (std::size_t i = 1; i < model.tail.size(); ++i) hist.push_back(model.tail[i] - model.tail[i - 1]);
  }
  if (hist.size() < model.order) throw ArgumentError("forecast: history shorter than AR order");
  double level = model.tail.back();
  for (std::size_t h = 0; h < horizon; ++h) {
    double next = model.intercept;
    for (std::size_t i = 0; i < model.order; ++i) {
      next += model.coefficients[i] * hist[hist.size() - 1 - i];
    }
    hist.push_back(next);
    if (model.differencing == 0) {
      out.push_back(next);
    } else {
      level += next;
      out.push_back(level);
    }
  }
  return out;
}

std::vector<double> forecast(const ForecastModel& model, std::size_t horizon) {
  std::vector<double> out;
  out.reserve(model.assets.size() * horizon);
  for (const auto& m : model.assets) {
    const auto f = forecast(m, horizon);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

}  // namespace qrlfolio::market
