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

#include "qrlfolio/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qrlfolio/error.hpp"

namespace qrlfolio::vqc {

std::string to_string(EntanglerPattern pattern) {
  return pattern == EntanglerPattern::Ring ? "ring" : "asset_temporal";
}

EntanglerPattern parse_pattern(const std::string& tag) {
  if (tag == "ring") return EntanglerPattern::Ring;
  if (tag == "asset_temporal") return EntanglerPattern::AssetTemporal;
  throw ArgumentError("unknown entangler pattern '" + tag + "'");
}

char to_char(Axis axis) {
  switch (axis) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

Axis parse_axis(char c) {
  switch (c) {
    case 'X': return Axis::X;
    case 'Y': return Axis::Y;
    case 'Z': return Axis::Z;
    default: throw ArgumentError(std::string("unknown rotation axis '") + c + "'");
  }
}

Ansatz build_ansatz(std::size_t num_qubits, std::size_t num_layers,
                    EntanglerPattern pattern) {
  if (num_qubits == 0 || num_layers == 0) {
    throw ArgumentError("ansatz needs at least one qubit and one layer");
  }
  if (num_qubits > sv::kMaxQubits) {
    throw CapacityError("ansatz width " + std::to_string(num_qubits) + " exceeds cap");
  }
  Ansatz a;
  a.num_qubits = num_qubits;
  a.num_layers = num_layers;
  a.pattern = pattern;
  for (std::size_t l = 0; l < num_layers; ++l) {
    a.axes.push_back(l % 2 == 0 ? Axis::Y : Axis::Z);
  }
  if (num_qubits > 1) {
    for (std::size_t i = 0; i < num_qubits; ++i) {
      a.entanglers.emplace_back(i, (i + 1) % num_qubits);
    }
    if (pattern == EntanglerPattern::AssetTemporal) {
      const std::size_t half = num_qubits / 2;
      for (std::size_t i = 0; i < half; ++i) {
        const std::pair<std::size_t, std::size_t> pair{i, i + half};
        if (std::find(a.entanglers.begin(), a.entanglers.end(), pair) ==
            a.entanglers.end()) {
          a.entanglers.push_back(pair);
        }
      }
    }
  }
  return a;
}

void validate(const Ansatz& ansatz) {
  if (ansatz.num_qubits == 0 || ansatz.num_layers == 0) {
    throw ArgumentError("ansatz needs at least one qubit and one layer");
  }
  if (ansatz.axes.size() != ansatz.num_layers) {
    throw ArgumentError("ansatz axis schedule has " + std::to_string(ansatz.axes.size()) +
                        " entries for " + std::to_string(ansatz.num_layers) +
                        " layers");
  }
  for (const auto& [c, t] : ansatz.entanglers) {
    if (c >= ansatz.num_qubits || t >= ansatz.num_qubits) {
      throw IndexError("entangler (" + std::to_string(c) + ", " + std::to_string(t) +
                       ") out of range");
    }
    if (c == t) throw ArgumentError("entangler pair uses the same qubit twice");
  }
}

namespace {

void check_params(const Ansatz& ansatz, std::span<const double> params) {
  if (params.size() != ansatz.parameter_count()) {
    throw ArgumentError("ansatz expects " + std::to_string(ansatz.parameter_count()) +
                        " parameters, got " + std::to_string(params.size()));
  }
}

void check_obs(const Ansatz& ansatz, const ObservableSet& obs) {
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i] >= ansatz.num_qubits) {
      throw IndexError("observable qubit " + std::to_string(obs[i]) + " out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (obs[j] == obs[i]) throw ArgumentError("observable qubits must be distinct");
    }
  }
}

void rotate(sv::QuantumState& state, Axis axis, std::size_t q, double angle) {
  switch (axis) {
    case Axis::X: state.apply_rx(q, angle); break;
    case Axis::Y: state.apply_ry(q, angle); break;
    case Axis::Z: state.apply_rz(q, angle); break;
  }
}

// Unchecked forward pass; callers validate once.
void apply_unchecked(const Ansatz& ansatz, std::span<const double> params,
                     sv::QuantumState& state) {
  const std::size_t n = ansatz.num_qubits;
  for (std::size_t l = 0; l < ansatz.num_layers; ++l) {
    for (std::size_t q = 0; q < n; ++q) rotate(state, ansatz.axes[l], q, params[l * n + q]);
    if (l + 1 < ansatz.num_layers) {
      for (const auto& [c, t] : ansatz.entanglers) state.apply_cnot(c, t);
    }
  }
}

std::vector<double> readout(const sv::QuantumState& state, const ObservableSet& obs) {
  std::vector<double> out(obs.size(), 0.0);
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    for (std::size_t k = 0; k < obs.size(); ++k) {
      out[k] += ((i >> obs[k]) & 1U) ? -p : p;
    }
  }
  return out;
}

std::vector<double> forward(const Ansatz& ansatz, std::span<const double> params,
                            const sv::QuantumState& input, const ObservableSet& obs) {
  sv::QuantumState state = input;
  apply_unchecked(ansatz, params, state);
  return readout(state, obs);
}

void check_input(const Ansatz& ansatz, const sv::QuantumState& input) {
  if (input.num_qubits() != ansatz.num_qubits) {
    throw ArgumentError("input state has " + std::to_string(input.num_qubits()) +
                        " qubits, ansatz has " + std::to_string(ansatz.num_qubits));
  }
}

sv::QuantumState state_from(const enc::AmplitudeVector& input) {
  if (input.values.size() != (std::size_t{1} << input.qubits)) {
    throw ArgumentError("amplitude vector length does not match its qubit count");
  }
  sv::QuantumState state(input.qubits);
  state.assign_real(input.values);
  return state;
}

}  // namespace

sv::GateProgram lower(const Ansatz& ansatz, std::span<const double> params) {
  validate(ansatz);
  check_params(ansatz, params);
  sv::GateProgram program(ansatz.num_qubits);
  const std::size_t n = ansatz.num_qubits;
  for (std::size_t l = 0; l < ansatz.num_layers; ++l) {
    for (std::size_t q = 0; q < n; ++q) {
      const double angle = params[l * n + q];
      switch (ansatz.axes[l]) {
        case Axis::X: program.push(sv::GateOp::rx(q, angle)); break;
        case Axis::Y: program.push(sv::GateOp::ry(q, angle)); break;
        case Axis::Z: program.push(sv::GateOp::rz(q, angle)); break;
      }
    }
    if (l + 1 < ansatz.num_layers) {
      for (const auto& [c, t] : ansatz.entanglers) program.push(sv::GateOp::cnot(c, t));
    }
  }
  return program;
}

void apply(const Ansatz& ansatz, std::span<const double> params, sv::QuantumState& state) {
  validate(ansatz);
  check_params(ansatz, params);
  check_input(ansatz, state);
  apply_unchecked(ansatz, params, state);
}

std::vector<double> evaluate(const Ansatz& ansatz, std::span<const double> params,
                             const sv::QuantumState& input, const ObservableSet& obs) {
  validate(ansatz);
  check_params(ansatz, params);
  check_input(ansatz, input);
  check_obs(ansatz, obs);
  return forward(ansatz, params, input, obs);
}

std::vector<double> evaluate(const Ansatz& ansatz, std::span<const double> params,
                             const enc::AmplitudeVector& input, const ObservableSet& obs) {
  return evaluate(ansatz, params, state_from(input), obs);
}

std::vector<double> evaluate_sampled(const Ansatz& ansatz, std::span<const double> params,
                                     const sv::QuantumState& input, const ObservableSet& obs,
                                     std::uint64_t shots, std::uint64_t seed) {
  validate(ansatz);
  check_params(ansatz, params);
  check_input(ansatz, input);
  check_obs(ansatz, obs);
  sv::QuantumState state = input;
  apply_unchecked(ansatz, params, state);
  const sv::ShotCounts counts = sv::sample_counts(state, shots, seed);
  std::vector<double> out;
  out.reserve(obs.size());
  for (std::size_t q : obs) out.push_back(sv::sampled_expectation_z(counts, q));
  return out;
}

std::vector<double> evaluate_sampled(const Ansatz& ansatz, std::span<const double> params,
                                     const enc::AmplitudeVector& input,
                                     const ObservableSet& obs, std::uint64_t shots,
                                     std::uint64_t seed) {
  return evaluate_sampled(ansatz, params, state_from(input), obs, shots, seed);
}

std::vector<double> jacobian_parameter_shift(const Ansatz& ansatz,
                                             std::span<const double> params,
                                             const sv::QuantumState& input,
                                             const ObservableSet& obs) {
  validate(ansatz);
  check_params(ansatz, params);
  check_input(ansatz, input);
  check_obs(ansatz, obs);
  constexpr double kShift = std::numbers::pi / 2.0;
  const std::size_t p = params.size();
  std::vector<double> jac(p * obs.size(), 0.0);
  // Rotations appear in the lowered program in parameter order. The state
  // before each rotation is carried forward so every shifted circuit only
  // replays its suffix.
  const auto ops = lower(ansatz, params).ops();
  sv::QuantumState prefix = input;
  std::size_t i = 0;
  for (std::size_t g = 0; g < ops.size(); ++g) {
    if (ops[g].kind != sv::GateKind::CNOT) {
      std::vector<double> sides[2];
      for (int side = 0; side < 2; ++side) {
        sv::QuantumState state = prefix;
        sv::GateOp op = ops[g];
        op.angle = params[i] + (side == 0 ? kShift : -kShift);
        sv::apply_in_place(state, op);
        for (std::size_t h = g + 1; h < ops.size(); ++h) sv::apply_in_place(state, ops[h]);
        sides[side] = readout(state, obs);
      }
      for (std::size_t k = 0; k < obs.size(); ++k) {
        jac[i * obs.size() + k] = 0.5 * (sides[0][k] - sides[1][k]);
      }
      ++i;
    }
    sv::apply_in_place(prefix, ops[g]);
  }
  return jac;
}

std::vector<double> gradient_parameter_shift(const Ansatz& ansatz,
                                             std::span<const double> params,
                                             const sv::QuantumState& input,
                                             const ObservableSet& obs,
                                             std::span<const double> readout_weights) {
  if (readout_weights.size() != obs.size()) {
    throw ArgumentError("readout weights (" + std::to_string(readout_weights.size()) +
                        ") do not match observables (" + std::to_string(obs.size()) + ")");
  }
  const auto jac = jacobian_parameter_shift(ansatz, params, input, obs);
  std::vector<double> grad(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = 0.0;
    for (std::size_t k = 0; k < obs.size(); ++k) g += readout_weights[k] * jac[i * obs.size() + k];
    grad[i] = g;
  }
  return grad;
}

std::vector<double> gradient_parameter_shift(const Ansatz& ansatz,
                                             std::span<const double> params,
                                             const enc::AmplitudeVector& input,
                                             const ObservableSet& obs,
                                             std::span<const double> readout_weights) {
  return gradient_parameter_shift(ansatz, params, state_from(input), obs, readout_weights);
}

}  // namespace qrlfolio::vqc
