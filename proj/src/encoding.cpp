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

#include "qrlfolio/encoding.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "qrlfolio/error.hpp"

namespace qrlfolio::enc {

std::vector<double> standardize(std::span<const double> x) {
  if (x.empty()) throw ArgumentError("standardize: empty feature vector");
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw ArgumentError("standardize: non-finite feature");
    mean += v;
  }
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  std::vector<double> out(x.size(), 0.0);
  if (sd < 1e-9) return out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

FeatureMap feature_map(std::span<const double> standardized) {
  const std::size_t n = standardized.size();
  FeatureMap z;
  z.values.resize(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = standardized[i];
    z.values[i] = v;
    z.values[n + i] = v * v;
    z.values[2 * n + i] = std::sin(v);
    z.values[3 * n + i] = std::cos(v);
  }
  return z;
}

std::size_t qubits_required(std::size_t raw_features) {
  if (raw_features == 0) throw ArgumentError("qubits_required: zero features");
  return static_cast<std::size_t>(std::bit_width(4 * raw_features - 1));
}

AmplitudeVector to_amplitudes(const FeatureMap& z, std::size_t qubits) {
  if (qubits < 1 || qubits > sv::kMaxQubits) {
    throw CapacityError("qubit count " + std::to_string(qubits) + " outside [1, " +
                        std::to_string(sv::kMaxQubits) + "]");
  }
  const std::size_t dim = std::size_t{1} << qubits;
  if (z.values.size() > dim) {
    throw CapacityError("feature map of length " + std::to_string(z.values.size()) +
                        " does not fit " + std::to_string(qubits) + " qubits");
  }
  double norm2 = 0.0;
  for (double v : z.values) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (norm < 1e-9) throw DegenerateInputError("feature map is all zeros");
  AmplitudeVector out;
  out.qubits = qubits;
  out.values.assign(dim, 0.0);
  for (std::size_t i = 0; i < z.values.size(); ++i) out.values[i] = z.values[i] / norm;
  return out;
}

AmplitudeVector encode_amplitudes(std::span<const double> x, std::size_t qubits) {
  return to_amplitudes(feature_map(standardize(x)), qubits);
}

sv::QuantumState encode_state(std::span<const double> x, std::size_t qubits,
                              EncodeMode mode) {
  const AmplitudeVector amps = encode_amplitudes(x, qubits);
  if (mode == EncodeMode::Direct) {
    sv::QuantumState state(qubits);
    state.assign_real(amps.values);
    return state;
  }
  const sv::GateProgram program = sv::mottonen_prepare(amps.values);
  return sv::run(sv::zero_state(qubits), program);
}

}  // namespace qrlfolio::enc
