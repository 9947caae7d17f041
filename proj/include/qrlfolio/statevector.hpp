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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qrlfolio::sv {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 24;

// Dense pure state over 2^n basis states. Qubit q is bit q of the basis
// index, so qubit 0 is the least significant bit. Global phase is not
// tracked.
class QuantumState {
 public:
  /// |0...0> on num_qubits qubits. Throws CapacityError outside [1, 24].
  explicit QuantumState(std::size_t num_qubits);

  [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
  [[nodiscard]] std::size_t dim() const { return amplitudes_.size(); }

  [[nodiscard]] std::span<const Complex> amplitudes() const {
    return amplitudes_;
  }
  [[nodiscard]] const Complex& operator[](std::size_t i) const {
    return amplitudes_[i];
  }

  [[nodiscard]] double norm_squared() const;
  [[nodiscard]] double probability(std::size_t basis_index) const {
    return std::norm(amplitudes_[basis_index]);
  }

  // In-place kernels. The free functions below are the value-returning API.
  void apply_rx(std::size_t target, double angle);
  void apply_ry(std::size_t target, double angle);
  void apply_rz(std::size_t target, double angle);
  void apply_cnot(std::size_t control, std::size_t target);

  /// Overwrites the amplitudes. Length must equal dim(); no validation of
  /// the norm is done here (see init_amplitudes_direct).
  void assign(std::span<const Complex> amplitudes);
  void assign_real(std::span<const double> amplitudes);

 private:
  void check_qubit(std::size_t q) const;

  std::size_t num_qubits_;
  std::vector<Complex> amplitudes_;
};

enum class GateKind { RX, RY, RZ, CNOT };

[[nodiscard]] const char* to_string(GateKind kind);

struct GateOp {
  GateKind kind = GateKind::RY;
  std::size_t target = 0;
  std::optional<std::size_t> control;
  double angle = 0.0;

  static GateOp rx(std::size_t target, double angle) {
    return {GateKind::RX, target, std::nullopt, angle};
  }
  static GateOp ry(std::size_t target, double angle) {
    return {GateKind::RY, target, std::nullopt, angle};
  }
  static GateOp rz(std::size_t target, double angle) {
    return {GateKind::RZ, target, std::nullopt, angle};
  }
  static GateOp cnot(std::size_t control, std::size_t target) {
    return {GateKind::CNOT, target, control, 0.0};
  }
};

class GateProgram {
 public:
  explicit GateProgram(std::size_t num_qubits) : num_qubits_(num_qubits) {}

  /// Appends op after checking its indices against the declared width.
  void push(const GateOp& op);

  [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
  [[nodiscard]] const std::vector<GateOp>& ops() const { return ops_; }
  [[nodiscard]] std::size_t size() const { return ops_.size(); }

  /// One op per line: `KIND target [control] [angle]`, angles with 12
  /// significant digits.
  [[nodiscard]] std::string dump() const;

 private:
  std::size_t num_qubits_;
  std::vector<GateOp> ops_;
};

struct ShotCounts {
  // Keys are bitstrings with qubit 0 as the first character.
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total_shots = 0;
};

/// Bitstring for a basis index, qubit 0 first.
[[nodiscard]] std::string bitstring(std::size_t basis_index,
                                    std::size_t num_qubits);

[[nodiscard]] QuantumState zero_state(std::size_t num_qubits);

/// Throws IndexError for out-of-range qubits and ArgumentError when a CNOT
/// has control == target or a rotation carries a control.
void validate(const GateOp& op, std::size_t num_qubits);

void apply_in_place(QuantumState& state, const GateOp& op);
void run_in_place(QuantumState& state, const GateProgram& program);

[[nodiscard]] QuantumState apply_gate(QuantumState state, const GateOp& op);
[[nodiscard]] QuantumState run(QuantumState state, const GateProgram& program);

/// <Z_q> = P(q = 0) - P(q = 1).
[[nodiscard]] double expectation_z(const QuantumState& state, std::size_t qubit);

/// Probability that qubit measures 1.
[[nodiscard]] double probability_one(const QuantumState& state,
                                     std::size_t qubit);

/// i.i.d. computational-basis samples. Deterministic for a given seed.
[[nodiscard]] ShotCounts sample_counts(const QuantumState& state,
                                       std::uint64_t shots, std::uint64_t seed);

/// Per-qubit <Z> estimated from shot counts.
[[nodiscard]] double sampled_expectation_z(const ShotCounts& counts,
                                           std::size_t qubit);

/// Loads target directly as the state's amplitudes. The length must be a
/// power of two and the l2 norm within 1e-8 of one.
[[nodiscard]] QuantumState init_amplitudes_direct(std::span<const Complex> target);
[[nodiscard]] QuantumState init_amplitudes_direct(std::span<const double> target);

/// Moettoenen synthesis for real targets: a cascade of uniformly controlled
/// RY rotations, each lowered to alternating RY/CNOT via the Gray-code
/// decomposition. Running the result on |0...0> reproduces target (signs
/// included, no RZ stage needed). Gate count is below 2^(n+1).
[[nodiscard]] GateProgram mottonen_prepare(std::span<const double> target);

/// |<a|b>|^2, insensitive to global phase.
[[nodiscard]] double fidelity(const QuantumState& a, const QuantumState& b);
[[nodiscard]] double fidelity(const QuantumState& a, std::span<const double> b);

}  // namespace qrlfolio::sv
