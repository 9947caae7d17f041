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
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrlfolio/encoding.hpp"
#include "qrlfolio/statevector.hpp"

namespace qrlfolio::vqc {

enum class Axis { X, Y, Z };
enum class EntanglerPattern { Ring, AssetTemporal };

[[nodiscard]] std::string to_string(EntanglerPattern pattern);
[[nodiscard]] EntanglerPattern parse_pattern(const std::string& tag);
[[nodiscard]] char to_char(Axis axis);
[[nodiscard]] Axis parse_axis(char c);

// Layered ansatz: layer l rotates every qubit about axes[l] with angle
// params[l * num_qubits + q]; the CNOT list follows every layer but the last.
struct Ansatz {
  std::size_t num_qubits = 0;
  std::size_t num_layers = 0;
  EntanglerPattern pattern = EntanglerPattern::Ring;
  std::vector<Axis> axes;
  std::vector<std::pair<std::size_t, std::size_t>> entanglers;  // (control, target)

  [[nodiscard]] std::size_t parameter_count() const { return num_qubits * num_layers; }
};

/// Ring: CNOT(i, i+1 mod n). AssetTemporal: the ring plus CNOT(i, i + n/2)
/// for i < n/2, skipping pairs the ring already has. Axes alternate Y, Z.
[[nodiscard]] Ansatz build_ansatz(std::size_t num_qubits, std::size_t num_layers,
                                  EntanglerPattern pattern);

/// Checks entangler indices, axis count and distinctness.
void validate(const Ansatz& ansatz);

/// Lowers the ansatz to a gate list for the given angles.
[[nodiscard]] sv::GateProgram lower(const Ansatz& ansatz, std::span<const double> params);

/// Applies U(theta) in place.
void apply(const Ansatz& ansatz, std::span<const double> params, sv::QuantumState& state);

using ObservableSet = std::vector<std::size_t>;

/// <psi| U^dagger Z_q U |psi> for each q in obs, exact.
[[nodiscard]] std::vector<double> evaluate(const Ansatz& ansatz,
                                           std::span<const double> params,
                                           const sv::QuantumState& input,
                                           const ObservableSet& obs);
[[nodiscard]] std::vector<double> evaluate(const Ansatz& ansatz,
                                           std::span<const double> params,
                                           const enc::AmplitudeVector& input,
                                           const ObservableSet& obs);

/// Shot-based estimate from per-qubit marginals of sample_counts.
[[nodiscard]] std::vector<double> evaluate_sampled(const Ansatz& ansatz,
                                                   std::span<const double> params,
                                                   const sv::QuantumState& input,
                                                   const ObservableSet& obs,
                                                   std::uint64_t shots,
                                                   std::uint64_t seed);
[[nodiscard]] std::vector<double> evaluate_sampled(const Ansatz& ansatz,
                                                   std::span<const double> params,
                                                   const enc::AmplitudeVector& input,
                                                   const ObservableSet& obs,
                                                   std::uint64_t shots,
                                                   std::uint64_t seed);

/// d/dtheta_i of f = sum_q w_q <Z_q> by the two-term shift rule
/// (f(theta + pi/2 e_i) - f(theta - pi/2 e_i)) / 2. Shifted evaluations are
/// reduced in parameter order.
[[nodiscard]] std::vector<double> gradient_parameter_shift(
    const Ansatz& ansatz, std::span<const double> params,
    const sv::QuantumState& input, const ObservableSet& obs,
    std::span<const double> readout_weights);
[[nodiscard]] std::vector<double> gradient_parameter_shift(
    const Ansatz& ansatz, std::span<const double> params,
    const enc::AmplitudeVector& input, const ObservableSet& obs,
    std::span<const double> readout_weights);

/// Row i holds d<Z_obs[k]>/dtheta_i for every k (params x obs, row-major).
[[nodiscard]] std::vector<double> jacobian_parameter_shift(
    const Ansatz& ansatz, std::span<const double> params,
    const sv::QuantumState& input, const ObservableSet& obs);

}  // namespace qrlfolio::vqc
