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

// Synthetic market data shared by the test binaries.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "qrlfolio/market.hpp"
#include "qrlfolio/rng.hpp"

namespace fixtures {

inline std::string date_for(std::size_t i) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{year{2020} / January / 1} + days{static_cast<int>(i)}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

// Geometric random walk per asset; daily log drift interpolates from
// `drift_first` (asset 0) to `drift_last` (asset N-1).
inline qrlfolio::market::PriceTable drift_market(std::size_t rows, std::size_t assets,
                                                 double drift_first, double drift_last,
                                                 double vol = 0.01, std::uint64_t seed = 99) {
  qrlfolio::market::PriceTable t;
  for (std::size_t i = 0; i < assets; ++i) t.tickers.push_back("S" + std::to_string(i));
  qrlfolio::CounterRng rng(seed);
  std::vector<double> level(assets, 100.0);
  for (std::size_t r = 0; r < rows; ++r) {
    t.dates.push_back(date_for(r));
    for (std::size_t i = 0; i < assets; ++i) {
      if (r > 0) {
        const double frac = assets > 1 ? double(i) / double(assets - 1) : 0.0;
        const double mu = drift_first + frac * (drift_last - drift_first);
        level[i] *= std::exp(mu + vol * rng.normal());
      }
      t.prices.push_back(level[i]);
    }
  }
  return t;
}

}  // namespace fixtures
