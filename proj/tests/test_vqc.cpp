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

#include "oracles.hpp"
#include "qrlfolio/encoding.hpp"
#include "qrlfolio/error.hpp"
#include "qrlfolio/rng.hpp"
#include "qrlfolio/vqc.hpp"

using namespace qrlfolio;
using namespace qrlfolio::vqc;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_params(CounterRng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (auto& v : p) v = rng.uniform(-kPi, kPi);
  return p;
}

enc::AmplitudeVector random_input(CounterRng& rng, std::size_t qubits) {
  const std::size_t features = (std::size_t{1} << qubits) / 4;
  std::vector<double> x(features);
  for (auto& v : x) v = rng.uniform(0.8, 1.2);
  return enc::encode_amplitudes(x, qubits);
}

// One-qubit ansatz whose single layer is RY(theta).
Ansatz single_ry() { return build_ansatz(1, 1, EntanglerPattern::Ring); }

}  // namespace

TEST_CASE("build_ansatz") {
  CHECK(build_ansatz(10, 3, EntanglerPattern::AssetTemporal).parameter_count() == 30);
  CHECK(build_ansatz(10, 6, EntanglerPattern::AssetTemporal).parameter_count() == 60);

  const auto one = build_ansatz(1, 1, EntanglerPattern::Ring);
  CHECK(one.entanglers.empty());
  CHECK(one.parameter_count() == 1);

  const auto ring = build_ansatz(4, 3, EntanglerPattern::Ring);
  CHECK(ring.entanglers ==
        std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  CHECK(ring.axes == std::vector<Axis>{Axis::Y, Axis::Z, Axis::Y});

  const auto at = build_ansatz(6, 2, EntanglerPattern::AssetTemporal);
  CHECK(at.entanglers.size() == 9);
  CHECK(at.entanglers[6] == std::pair<std::size_t, std::size_t>{0, 3});
  CHECK(at.entanglers[8] == std::pair<std::size_t, std::size_t>{2, 5});

  // n = 2: the half-offset pair (0, 1) is already on the ring.
  CHECK(build_ansatz(2, 2, EntanglerPattern::AssetTemporal).entanglers.size() == 2);

  CHECK_THROWS_AS((void)build_ansatz(0, 1, EntanglerPattern::Ring), ArgumentError);
  CHECK_THROWS_AS((void)build_ansatz(3, 0, EntanglerPattern::Ring), ArgumentError);
}

TEST_CASE("evaluate closed forms") {
  SUBCASE("zero angles on |0...0> read +1 everywhere") {
    const auto a = build_ansatz(4, 3, EntanglerPattern::AssetTemporal);
    const std::vector<double> zeros(a.parameter_count(), 0.0);
    const auto z = evaluate(a, zeros, sv::zero_state(4), {0, 1, 2, 3});
    for (double v : z) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("RY(theta)|0> reads cos theta") {
    const auto a = single_ry();
    const std::vector<double> th{kPi / 3};
    CHECK(evaluate(a, th, sv::zero_state(1), {0})[0] == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("dimension mismatches") {
    const auto a = build_ansatz(3, 2, EntanglerPattern::Ring);
    const std::vector<double> p(6, 0.1);
    CHECK_THROWS_AS((void)evaluate(a, std::vector<double>(5, 0.0), sv::zero_state(3), {0}),
                    ArgumentError);
    CHECK_THROWS_AS((void)evaluate(a, p, sv::zero_state(2), {0}), ArgumentError);
    CHECK_THROWS_AS((void)evaluate(a, p, sv::zero_state(3), {3}), IndexError);
    CHECK_THROWS_AS((void)evaluate(a, p, sv::zero_state(3), {1, 1}), ArgumentError);
  }
}

TEST_CASE("evaluate matches the dense unitary oracle") {
  CounterRng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng.below(2);
    const std::size_t layers = 1 + rng.below(3);
    const auto pattern = rng.below(2) ? EntanglerPattern::Ring : EntanglerPattern::AssetTemporal;
    auto a = build_ansatz(n, layers, pattern);
    // Exercise the X axis too.
    for (auto& ax : a.axes) ax = static_cast<Axis>(rng.below(3));
    const auto params = random_params(rng, a.parameter_count());
    const auto input = random_input(rng, n);
    ObservableSet obs;
    for (std::size_t q = 0; q < n; ++q) obs.push_back(q);
    const auto got = evaluate(a, params, input, obs);
    const auto want = oracle::dense_expectations(a, params, input.values, obs);
    for (std::size_t k = 0; k < obs.size(); ++k) {
      CHECK(std::abs(got[k] - want[k]) <= 1e-10);
      CHECK(std::abs(got[k]) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("evaluate_sampled") {
  SUBCASE("deterministic output state") {
    const auto a = single_ry();
    const std::vector<double> th{kPi};
    for (std::uint64_t shots : {1ULL, 7ULL, 1000ULL}) {
      CHECK(evaluate_sampled(a, th, sv::zero_state(1), {0}, shots, 3)[0] == -1.0);
    }
  }
  SUBCASE("single shot reads +-1") {
    CounterRng rng(8);
    const auto a = build_ansatz(3, 2, EntanglerPattern::Ring);
    const auto p = random_params(rng, a.parameter_count());
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (double v : evaluate_sampled(a, p, sv::zero_state(3), {0, 1, 2}, 1, seed)) {
        CHECK((v == 1.0 || v == -1.0));
      }
    }
  }
  SUBCASE("10000 shots within 0.05") {
    CounterRng rng(10);
    const auto a = build_ansatz(4, 2, EntanglerPattern::AssetTemporal);
    const auto p = random_params(rng, a.parameter_count());
    const auto in = random_input(rng, 4);
    const auto exact = evaluate(a, p, in, {0, 1});
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto est = evaluate_sampled(a, p, in, {0, 1}, 10000, seed);
      good += std::abs(est[0] - exact[0]) <= 0.05 && std::abs(est[1] - exact[1]) <= 0.05;
    }
    CHECK(good >= 99);
    CHECK(evaluate_sampled(a, p, in, {0, 1}, 500, 4) == evaluate_sampled(a, p, in, {0, 1}, 500, 4));
  }
}

TEST_CASE("parameter-shift gradient") {
  SUBCASE("closed form on one qubit") {
    const auto a = single_ry();
    const std::vector<double> w{1.0};
    const auto g = gradient_parameter_shift(a, std::vector<double>{kPi / 3}, sv::zero_state(1), {0}, w);
    CHECK(g[0] == doctest::Approx(-0.866025).epsilon(1e-6));
    const auto g0 = gradient_parameter_shift(a, std::vector<double>{0.0}, sv::zero_state(1), {0}, w);
    CHECK(std::abs(g0[0]) < 1e-15);
  }
  SUBCASE("matches central finite differences") {
    CounterRng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
      const auto a = build_ansatz(4, 2, trial % 2 ? EntanglerPattern::Ring : EntanglerPattern::AssetTemporal);
      const auto p = random_params(rng, a.parameter_count());
      const auto in = random_input(rng, 4);
      const ObservableSet obs{0, 1, 2};
      std::vector<double> w(3);
      for (auto& v : w) v = rng.uniform(-1, 1);
      const auto f = [&](const std::vector<double>& th) {
        const auto z = evaluate(a, th, in, obs);
        return w[0] * z[0] + w[1] * z[1] + w[2] * z[2];
      };
      const auto fd = oracle::central_difference(f, p, 1e-5);
      const auto ps = gradient_parameter_shift(a, p, in, obs, w);
      for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(fd[i] - ps[i]) <= 1e-6);
    }
  }
  SUBCASE("linear in the readout weights") {
    CounterRng rng(62);
    const auto a = build_ansatz(3, 3, EntanglerPattern::Ring);
    const auto p = random_params(rng, a.parameter_count());
    const auto in = random_input(rng, 3);
    const ObservableSet obs{0, 1, 2};
    const std::vector<double> w{0.3, -1.2, 0.7};
    const auto total = gradient_parameter_shift(a, p, in, obs, w);
    std::vector<double> sum(p.size(), 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> e(3, 0.0);
      e[k] = 1.0;
      const auto gk = gradient_parameter_shift(a, p, in, obs, e);
      for (std::size_t i = 0; i < p.size(); ++i) sum[i] += w[k] * gk[i];
    }
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(sum[i] - total[i]) <= 1e-10);
  }
  SUBCASE("weight count mismatch") {
    const auto a = single_ry();
    CHECK_THROWS_AS((void)gradient_parameter_shift(a, std::vector<double>{0.1}, sv::zero_state(1), {0},
                                                   std::vector<double>{1.0, 2.0}),
                    ArgumentError);
  }
}

TEST_CASE("2 pi periodicity in each coordinate") {
  CounterRng rng(63);
  const auto a = build_ansatz(3, 3, EntanglerPattern::AssetTemporal);
  const auto p = random_params(rng, a.parameter_count());
  const auto in = random_input(rng, 3);
  const auto base = evaluate(a, p, in, {0, 1, 2});
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto q = p;
    q[i] += 2 * kPi;
    const auto z = evaluate(a, q, in, {0, 1, 2});
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(z[k] - base[k]) <= 1e-10);
  }
}

TEST_CASE("lowered program agrees with the direct forward pass") {
  CounterRng rng(64);
  const auto a = build_ansatz(4, 3, EntanglerPattern::AssetTemporal);
  const auto p = random_params(rng, a.parameter_count());
  const auto prog = lower(a, p);
  CHECK(prog.size() == 12 + 2 * a.entanglers.size());
  sv::QuantumState direct(4);
  apply(a, p, direct);
  const auto lowered = sv::run(sv::zero_state(4), prog);
  for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(direct[i] - lowered[i]) < 1e-14);
}
