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

// Classical features -> amplitude-encoded quantum state.
//
// The pipeline is
//   x  --standardize-->  x~  --feature_map-->  Z = [x~ | x~^2 | sin x~ | cos x~]
//      --to_amplitudes-->  Z / ||Z||_2 zero-padded to 2^q entries.
//
// Expanding x~ before normalizing breaks the radial symmetry that plain
// amplitude encoding has (x and 2x would otherwise encode identically).
// Because cos(0) = 1, Z is never the zero vector, so encoding a constant
// input still yields a valid state.
//
// Basis encoding (one qubit per bit of a binary feature) and angle encoding
// (one RY(x_j) per feature on its own qubit) are the usual alternatives; they
// need a qubit per feature, whereas amplitude encoding needs only
// ceil(log2(4n)) qubits for n raw features, so they are not provided here.

#include <cstddef>
#include <span>
#include <vector>

#include "qrlfolio/statevector.hpp"

namespace qrlfolio::enc {

struct FeatureMap {
  std::vector<double> values;  // length 4n
};

struct AmplitudeVector {
  std::vector<double> values;  // length 2^qubits, unit l2 norm
  std::size_t qubits = 0;
};

enum class EncodeMode { Direct, GateSynthesis };

/// (x - mean) / population std. Inputs with std < 1e-9 map to zeros.
[[nodiscard]] std::vector<double> standardize(std::span<const double> x);

[[nodiscard]] FeatureMap feature_map(std::span<const double> standardized);

/// Smallest qubit count whose register holds the 4n-entry feature map.
[[nodiscard]] std::size_t qubits_required(std::size_t raw_features);

/// Throws DegenerateInputError for an all-zero map and CapacityError when
/// 2^qubits < the map length.
[[nodiscard]] AmplitudeVector to_amplitudes(const FeatureMap& z, std::size_t qubits);

/// Full pipeline. Direct mode loads the amplitudes; GateSynthesis runs the
/// Moettoenen program on |0...0>.
[[nodiscard]] sv::QuantumState encode_state(std::span<const double> x,
                                            std::size_t qubits,
                                            EncodeMode mode = EncodeMode::Direct);

/// Amplitudes of the pipeline without building a state.
[[nodiscard]] AmplitudeVector encode_amplitudes(std::span<const double> x,
                                                std::size_t qubits);

}  // namespace qrlfolio::enc
