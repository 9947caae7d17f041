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

// Per-asset autoregressive price forecaster with AIC order selection.
//
// For each asset the series y (or its first difference when d = 1) is fit by
// least squares to
//   x_t = c + phi_1 x_{t-1} + ... + phi_p x_{t-p}
// for every (p, d) in {1..5} x {0, 1}. All ten candidates are scored on the
// same target rows (the first six observations are reserved as lags), so the
// one-step level residuals, and therefore the AIC values
//   n log(RSS / n) + 2 (p + 1),
// are directly comparable. RSS/n is floored at 1e-20 times the mean squared
// level so exact fits tie; ties go to the differenced model, which is what
// makes an exact linear trend select d = 1. A constant series is handled as
// the degenerate d = 0 model with phi = 0 and c equal to the constant.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace qrlfolio::market {

inline constexpr std::size_t kMinForecastHistory = 30;
inline constexpr std::size_t kMaxArOrder = 5;

struct ArModel {
  std::size_t order = 0;         // p; 0 marks the naive last-value model
  std::size_t differencing = 0;  // d
  std::vector<double> coefficients;
  double intercept = 0.0;
  double aic = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> tail;  // most recent levels, oldest first

  /// Random-walk model: every forecast equals `last`.
  static ArModel naive(double last);
};

/// Least-squares AR fit with (p, d) chosen by AIC. Needs at least 30 points.
[[nodiscard]] ArModel fit_ar_auto(std::span<const double> series);

/// Fit of a fixed order, exposed for diagnostics and tests.
[[nodiscard]] ArModel fit_ar(std::span<const double> series, std::size_t order,
                             std::size_t differencing);

/// Iterated one-step-ahead predictions, integrated back to levels when d = 1.
[[nodiscard]] std::vector<double> forecast(const ArModel& model, std::size_t horizon);

struct ForecastModel {
  std::vector<ArModel> assets;
  // Last price row the models saw. States at index t may only use models
  // with fitted_through <= t.
  std::size_t fitted_through = 0;
};

/// Asset-major N x horizon price forecasts.
[[nodiscard]] std::vector<double> forecast(const ForecastModel& model, std::size_t horizon);

}  // namespace qrlfolio::market
