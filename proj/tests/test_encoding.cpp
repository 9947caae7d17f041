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

#include <cmath>
#include <numbers>
#include <vector>

#include "qrlfolio/encoding.hpp"
#include "qrlfolio/error.hpp"
#include "qrlfolio/rng.hpp"

using namespace qrlfolio;
using namespace qrlfolio::enc;

namespace {

std::vector<double> random_features(CounterRng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(0.5, 1.5);
  return x;
}

}  // namespace

TEST_CASE("standardize") {
  const std::vector<double> x{1, 2, 3};
  const auto s = standardize(x);
  // Population sigma of {1,2,3} is sqrt(2/3); (3 - 2) / sqrt(2/3) = 1.2247449.
  CHECK(s[0] == doctest::Approx(-1.224745).epsilon(1e-6));
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(1.224745).epsilon(1e-6));

  CHECK(standardize(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0, 0});
  CHECK(standardize(std::vector<double>{0, 0}) == std::vector<double>{0, 0});
  CHECK_THROWS_AS((void)standardize(std::vector<double>{}), ArgumentError);

  CounterRng rng(1);
  const auto y = standardize(random_features(rng, 17));
  double mean = 0.0;
  double var = 0.0;
  for (double v : y) mean += v;
  mean /= 17.0;
  for (double v : y) var += (v - mean) * (v - mean);
  CHECK(std::abs(mean) < 1e-14);
  CHECK(var / 17.0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardize is affine invariant") {
  CounterRng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_features(rng, 12);
    const double a = rng.uniform(0.01, 100.0);
    const double b = rng.uniform(-50.0, 50.0);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const auto sx = standardize(x);
    const auto sy = standardize(y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(sx[i] - sy[i]) < 1e-9);
  }
}

TEST_CASE("feature_map") {
  const auto z = feature_map(std::vector<double>{0, 0});
  CHECK(z.values == std::vector<double>{0, 0, 0, 0, 0, 0, 1, 1});

  const auto h = feature_map(std::vector<double>{std::numbers::pi / 2});
  REQUIRE(h.values.size() == 4);
  CHECK(h.values[0] == doctest::Approx(1.570796).epsilon(1e-6));
  CHECK(h.values[1] == doctest::Approx(2.467401).epsilon(1e-6));
  CHECK(h.values[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(h.values[3]) < 1e-6);
}

TEST_CASE("to_amplitudes") {
  const auto a = to_amplitudes(FeatureMap{{3, 4, 0, 0}}, 2);
  CHECK(a.values == std::vector<double>{0.6, 0.8, 0, 0});

  const auto b = to_amplitudes(FeatureMap{{0, 0, 0, 0, 0, 0, 1, 1}}, 3);
  for (std::size_t i = 0; i < 6; ++i) CHECK(b.values[i] == 0.0);
  CHECK(b.values[6] == doctest::Approx(0.707107).epsilon(1e-6));
  CHECK(b.values[7] == doctest::Approx(0.707107).epsilon(1e-6));

  CHECK_THROWS_AS((void)to_amplitudes(FeatureMap{std::vector<double>(8, 1.0)}, 2),
                  CapacityError);
  CHECK_THROWS_AS((void)to_amplitudes(FeatureMap{std::vector<double>(4, 0.0)}, 2),
                  DegenerateInputError);
}

TEST_CASE("qubits_required") {
  CHECK(qubits_required(1) == 2);
  CHECK(qubits_required(2) == 3);
  CHECK(qubits_required(3) == 4);
  CHECK(qubits_required(4) == 4);
  CHECK(qubits_required(16) == 6);
  CHECK(qubits_required(555) == 12);
}

TEST_CASE("encode_state") {
  SUBCASE("constant input lands on the cosine block") {
    const auto s = encode_state(std::vector<double>{5, 5, 5}, 4);
    const double third = 1.0 / std::sqrt(3.0);
    for (std::size_t i = 0; i < 16; ++i) {
      const double want = (i >= 9 && i <= 11) ? third : 0.0;
      CHECK(std::abs(s[i] - sv::Complex{want, 0.0}) < 1e-15);
    }
  }
  SUBCASE("minimal qubit count accepted, one less rejected") {
    CounterRng rng(3);
    for (std::size_t n = 1; n <= 20; ++n) {
      const auto x = random_features(rng, n);
      const std::size_t q = qubits_required(n);
      CHECK((std::size_t{1} << q) >= 4 * n);
      CHECK_NOTHROW((void)encode_state(x, q));
      if (q > 1) CHECK_THROWS_AS((void)encode_state(x, q - 1), CapacityError);
    }
  }
  SUBCASE("direct and gate-synthesis agree") {
    CounterRng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 1 + rng.below(8);
      const auto x = random_features(rng, n);
      const std::size_t q = qubits_required(n);
      const auto direct = encode_state(x, q, EncodeMode::Direct);
      const auto synth = encode_state(x, q, EncodeMode::GateSynthesis);
      CHECK(std::abs(direct.norm_squared() - 1.0) <= 1e-10);
      CHECK(std::abs(synth.norm_squared() - 1.0) <= 1e-10);
      for (std::size_t i = 0; i < direct.dim(); ++i) {
        CHECK(std::abs(direct[i] - synth[i]) <= 1e-8);
        if (i >= 4 * n) CHECK(direct[i] == sv::Complex{0.0, 0.0});
      }
    }
  }
  SUBCASE("encoding ignores affine rescaling of raw inputs") {
    CounterRng rng(5);
    auto x = random_features(rng, 6);
    auto y = x;
    for (auto& v : y) v = 3.0 * v - 7.0;
    const auto sx = encode_state(x, 5);
    const auto sy = encode_state(y, 5);
    for (std::size_t i = 0; i < sx.dim(); ++i) CHECK(std::abs(sx[i] - sy[i]) < 1e-9);
  }
}
