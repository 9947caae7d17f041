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

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include "fixtures.hpp"
#include "qrlfolio/error.hpp"
#include "qrlfolio/market.hpp"
#include "qrlfolio/rng.hpp"

using namespace qrlfolio;
using namespace qrlfolio::market;

namespace {

PriceTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_prices(in, "fixture.csv");
}

PriceTable single_asset(const std::vector<double>& p) {
  PriceTable t;
  t.tickers = {"A"};
  for (std::size_t i = 0; i < p.size(); ++i) t.dates.push_back(fixtures::date_for(i));
  t.prices = p;
  return t;
}

}  // namespace

TEST_CASE("parse_prices") {
  SUBCASE("shape") {
    const auto t = parse("date,AAA,BBB\n2024-01-02,10,20\n2024-01-03,11,21\n2024-01-04,12,22\n");
    CHECK(t.rows() == 3);
    CHECK(t.assets() == 2);
    CHECK(t.at(2, 1) == 22.0);
  }
  SUBCASE("blank cell names date and ticker") {
    try {
      (void)parse("date,AAA,BBB\n2024-01-02,10,20\n2024-01-03,,21\n");
      FAIL("expected a data error");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("AAA") != std::string::npos);
      CHECK(msg.find("2024-01-03") != std::string::npos);
      CHECK(msg.find("fixture.csv:3") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse("date,AAA,BBB\n2024-01-02,10\n"), DataError);
  }
  SUBCASE("shuffled rows are sorted") {
    const auto t = parse("date,A\n2024-01-04,3\n2024-01-02,1\n2024-01-03,2\n");
    CHECK(t.dates == std::vector<std::string>{"2024-01-02", "2024-01-03", "2024-01-04"});
    CHECK(t.prices == std::vector<double>{1, 2, 3});
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS((void)parse(""), DataError);
    CHECK_THROWS_AS((void)parse("date,A\n"), DataError);
    CHECK_THROWS_AS((void)parse("date,A\n2024-01-02,1\n2024-01-02,2\n"), DataError);
    CHECK_THROWS_AS((void)parse("date,A\n2024-02-30,1\n"), DataError);
    CHECK_THROWS_AS((void)parse("date,A\n2024-01-02,abc\n"), DataError);
    CHECK_THROWS_AS((void)parse("date,A\n2024-01-02,-1\n"), DataError);
    CHECK_THROWS_AS((void)parse("when,A\n2024-01-02,1\n"), DataError);
  }
  SUBCASE("canonical output re-parses to identical bytes") {
    const auto t = parse("date,A,B\n2024-01-03, 2.50 ,0.1\n2024-01-02,1e2,3.333333333333333\n");
    std::ostringstream once;
    write_prices(once, t);
    CHECK(once.str() == "date,A,B\n2024-01-02,100,3.333333333333333\n2024-01-03,2.5,0.1\n");
    std::ostringstream twice;
    write_prices(twice, parse(once.str()));
    CHECK(twice.str() == once.str());
  }
}

TEST_CASE("log_returns") {
  const auto r = log_returns(single_asset({100, 110}));
  REQUIRE(r.rows == 1);
  CHECK(r.at(0, 0) == doctest::Approx(0.0953102).epsilon(1e-7));
  for (double v : log_returns(single_asset({5, 5, 5, 5})).values) CHECK(v == 0.0);
  CHECK_THROWS_AS((void)log_returns(single_asset({100, 0})), DataError);
  CHECK_THROWS_AS((void)log_returns(single_asset({100})), DataError);
}

TEST_CASE("AR forecaster") {
  SUBCASE("constant series") {
    const std::vector<double> y(60, 42.0);
    const auto m = fit_ar_auto(y);
    CHECK(m.differencing == 0);
    for (double v : forecast(m, 7)) CHECK(v == doctest::Approx(42.0).epsilon(1e-12));
  }
  SUBCASE("linear trend selects differencing and continues it") {
    std::vector<double> y;
    for (int t = 0; t < 80; ++t) y.push_back(50.0 + 0.75 * t);
    const auto m = fit_ar_auto(y);
    CHECK(m.differencing == 1);
    const auto f = forecast(m, 7);
    for (std::size_t h = 0; h < f.size(); ++h) {
      CHECK(std::abs(f[h] - (50.0 + 0.75 * static_cast<double>(80 + h))) <= 1e-6);
    }
  }
  SUBCASE("AR(1) coefficient is recovered") {
    CounterRng rng(1234);
    std::vector<double> y{100.0};
    for (int t = 1; t < 500; ++t) y.push_back(100.0 + 0.8 * (y.back() - 100.0) + rng.normal());
    const auto m = fit_ar_auto(y);
    CHECK(m.differencing == 0);
    CHECK(std::abs(m.coefficients[0] - 0.8) <= 0.1);
  }
  SUBCASE("AIC picks the minimum over the grid") {
    CounterRng rng(77);
    std::vector<double> y{10.0, 10.5};
    for (int t = 2; t < 200; ++t) {
      y.push_back(10.0 + 0.5 * (y[t - 1] - 10.0) - 0.3 * (y[t - 2] - 10.0) + 0.2 * rng.normal());
    }
    const auto best = fit_ar_auto(y);
    for (std::size_t d = 0; d <= 1; ++d)
      for (std::size_t p = 1; p <= 5; ++p) CHECK(best.aic <= fit_ar(y, p, d).aic + 1e-9);
  }
  SUBCASE("boundaries") {
    const std::vector<double> y(60, 1.0);
    CHECK(forecast(fit_ar_auto(y), 0).empty());
    CHECK_THROWS_AS((void)fit_ar_auto(std::vector<double>(29, 1.0)), ArgumentError);
    CHECK(forecast(ArModel::naive(3.0), 3) == std::vector<double>{3, 3, 3});
  }
}

TEST_CASE("build_state") {
  EnvConfig cfg;
  cfg.lookback = 2;
  cfg.forecast = 1;
  SUBCASE("ratio-normalized window plus forecast") {
    const auto table = single_asset({100, 110, 121});
    const auto s = build_state(table, 2, cfg);
    REQUIRE(s.values.size() == 3);
    CHECK(s.values[0] == 1.0);
    CHECK(s.values[1] == doctest::Approx(1.1));
    // Three rows is below the AR minimum, so the last observed price is
    // carried forward: 121 / 100.
    CHECK(s.values[2] == doctest::Approx(1.21));
  }
  SUBCASE("constant prices give all ones") {
    cfg.lookback = 30;
    cfg.forecast = 7;
    PriceTable t;
    t.tickers = {"A", "B"};
    for (std::size_t i = 0; i < 80; ++i) {
      t.dates.push_back(fixtures::date_for(i));
      t.prices.push_back(7.0);
      t.prices.push_back(3.0);
    }
    const auto s = build_state(t, 60, cfg);
    CHECK(s.values.size() == 2 * 37);
    for (double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("boundary index") {
    const auto table = single_asset({100, 110, 121});
    CHECK_NOTHROW((void)build_state(table, 2, cfg));
    CHECK_THROWS_AS((void)build_state(table, 1, cfg), ArgumentError);
  }
  SUBCASE("a model fitted past the state index is refused") {
    const auto table = fixtures::drift_market(120, 1, 0.001, -0.001);
    cfg.lookback = 30;
    const auto late = fit_forecaster(table, 90, 0);
    CHECK_THROWS_AS((void)build_state(table, 80, cfg, late), StateError);
  }
  SUBCASE("length is N (L + F) and layout is asset-major") {
    cfg.lookback = 30;
    cfg.forecast = 7;
    const auto table = fixtures::drift_market(200, 5, 0.001, -0.001);
    for (std::size_t t : {30, 77, 150}) {
      const auto s = build_state(table, t, cfg);
      CHECK(s.values.size() == table.assets() * 37);
      CHECK(s.forecast_fitted_through <= t);
      for (std::size_t i = 0; i < table.assets(); ++i) {
        CHECK(s.values[i * 30] == 1.0);
        CHECK(s.values[i * 30 + 29] == doctest::Approx(table.at(t - 1, i) / table.at(t - 30, i)));
      }
    }
  }
}

TEST_CASE("reward") {
  SUBCASE("zero variance") {
    const std::vector<double> window(10, 0.01);
    CHECK(reward(std::vector<double>{1.0}, window, 10, 3.0) == doctest::Approx(0.01));
  }
  SUBCASE("matches an independent mean/covariance evaluation") {
    CounterRng rng(5);
    const std::size_t rows = 37;
    std::vector<double> window(rows * 2);
    for (auto& v : window) v = 0.01 * rng.normal();
    Eigen::MatrixXd m(rows, 2);
    for (std::size_t r = 0; r < rows; ++r) {
      m(r, 0) = window[r * 2];
      m(r, 1) = window[r * 2 + 1];
    }
    const Eigen::RowVector2d mu = m.colwise().mean();
    const Eigen::MatrixXd centered = m.rowwise() - mu;
    const Eigen::Matrix2d cov = centered.transpose() * centered / double(rows - 1);
    const Eigen::Vector2d w(0.5, 0.5);
    for (double eta : {0.0, 0.7, -0.4}) {
      const double want = mu.dot(w) - eta * w.dot(cov * w);
      CHECK(std::abs(reward(std::vector<double>{0.5, 0.5}, window, rows, eta) - want) <= 1e-12);
    }
  }
  SUBCASE("eta = 0 is the mean return") {
    const std::vector<double> window{0.01, 0.03, -0.02, 0.05};
    CHECK(reward(std::vector<double>{0.25, 0.75}, window, 2, 0.0) ==
          doctest::Approx(0.25 * -0.005 + 0.75 * 0.04));
  }
  SUBCASE("permutation invariant") {
    CounterRng rng(6);
    std::vector<double> window(10 * 3);
    for (auto& v : window) v = 0.02 * rng.normal();
    std::vector<double> permuted(window.size());
    for (std::size_t r = 0; r < 10; ++r) {
      permuted[r * 3 + 0] = window[r * 3 + 2];
      permuted[r * 3 + 1] = window[r * 3 + 0];
      permuted[r * 3 + 2] = window[r * 3 + 1];
    }
    const std::vector<double> w{0.2, -0.3, 1.1};
    const std::vector<double> wp{1.1, 0.2, -0.3};
    CHECK(reward(w, window, 10, 0.8) == doctest::Approx(reward(wp, permuted, 10, 0.8)).epsilon(1e-13));
  }
  CHECK_THROWS_AS((void)reward(std::vector<double>{1.0}, std::vector<double>{0.1}, 1, 0.0), ArgumentError);
}

TEST_CASE("net_period_return") {
  const std::vector<double> w{0.6, 0.4};
  const std::vector<double> prev{0.5, 0.5};
  const std::vector<double> r{0.02, -0.01};
  CHECK(std::abs(net_period_return(w, prev, r, 0.0015) - 0.0079985) <= 1e-12);
  CHECK(net_period_return(w, w, r, 0.0015) == doctest::Approx(0.02 * 0.6 - 0.01 * 0.4));
  CHECK(net_period_return(w, w, r, 0.0015, CostConvention::Subtractive) ==
        net_period_return(w, w, r, 0.0015, CostConvention::Literal));
  CHECK(net_period_return(w, prev, r, 0.0, CostConvention::Subtractive) ==
        net_period_return(w, prev, r, 0.0, CostConvention::Literal));
  CHECK(net_period_return(w, prev, r, 0.0015, CostConvention::Subtractive) ==
        doctest::Approx(0.008 - 0.0015 * 0.2));
  // A zero-weight, zero-return asset changes nothing.
  CHECK(net_period_return(std::vector<double>{0.6, 0.4, 0.0}, std::vector<double>{0.5, 0.5, 0.0},
                          std::vector<double>{0.02, -0.01, 0.0}, 0.0015) ==
        net_period_return(w, prev, r, 0.0015));
  CHECK_THROWS_AS((void)net_period_return(w, prev, std::vector<double>{0.1}, 0.0015), ArgumentError);
}

TEST_CASE("short exposure clip") {
  std::vector<double> ok{1.5, -0.5};
  CHECK_FALSE(clip_short_exposure(ok));
  std::vector<double> wild{4.0, -3.0};
  CHECK(clip_short_exposure(wild));
  CHECK(wild[0] == doctest::Approx(2.0));
  CHECK(wild[1] == doctest::Approx(-1.0));
}

TEST_CASE("Environment") {
  EnvConfig cfg;  // L=30, F=7, period=30
  const MarketDataset data(fixtures::drift_market(300, 2, 0.001, -0.001), cfg);
  const std::vector<double> ew{0.5, 0.5};

  SUBCASE("100-row span yields exactly two steps") {
    Environment env(data, 0, 100);
    auto s = env.reset();
    CHECK(s.index == 30);
    CHECK_FALSE(env.done());
    auto r1 = env.step(ew);
    CHECK(r1.next_state.index == 60);
    CHECK_FALSE(r1.done);
    auto r2 = env.step(ew);
    CHECK(r2.next_state.index == 90);
    CHECK(r2.done);
    CHECK_THROWS_AS((void)env.step(ew), StateError);
  }
  SUBCASE("weights must sum to one") {
    Environment env(data, 0, 300);
    (void)env.reset();
    CHECK_THROWS_AS((void)env.step(std::vector<double>{0.5, 0.6}), ArgumentError);
    CHECK_THROWS_AS((void)env.step(std::vector<double>{1.0}), ArgumentError);
  }
  SUBCASE("identical runs give identical trajectories") {
    Environment a(data, 0, 300);
    Environment b(data, 0, 300);
    auto sa = a.reset();
    auto sb = b.reset();
    CHECK(sa.values == sb.values);
    const std::vector<double> w{0.8, 0.2};
    while (!a.done()) {
      const auto ra = a.step(w);
      const auto rb = b.step(w);
      CHECK(ra.reward == rb.reward);
      CHECK(ra.net_return == rb.net_return);
      CHECK(ra.next_state.values == rb.next_state.values);
      CHECK(ra.next_state.forecast_fitted_through <= ra.next_state.index);
    }
    CHECK(b.done());
  }
  SUBCASE("reward uses the t-L .. t+F window") {
    Environment env(data, 0, 300);
    (void)env.reset();
    const auto r = env.step(ew);
    const auto window = data.reward_window(30);
    CHECK(window.size() == 37 * 2);
    CHECK(r.reward == reward(ew, window, 37, cfg.risk_preference));
    const auto& ret = data.returns();
    CHECK(window.front() == ret.at(0, 0));
    CHECK(window.back() == ret.at(36, 1));
  }
  SUBCASE("over-short actions are clipped and counted") {
    Environment env(data, 0, 300);
    (void)env.reset();
    const auto r = env.step(std::vector<double>{3.0, -2.0});
    CHECK(env.clip_count() == 1);
    CHECK(r.applied_weights[1] == doctest::Approx(-1.0));
  }
}
