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

#include "qrlfolio/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qrlfolio/error.hpp"
#include "qrlfolio/rng.hpp"

namespace qrlfolio::sv {

namespace {

std::size_t qubits_for_length(std::size_t length) {
  if (length < 2 || !std::has_single_bit(length)) {
    throw ArgumentError("amplitude vector length " + std::to_string(length) +
                        " is not a power of two >= 2");
  }
  const auto n = static_cast<std::size_t>(std::countr_zero(length));
  if (n > kMaxQubits) {
    throw CapacityError("amplitude vector needs " + std::to_string(n) +
                        " qubits, cap is " + std::to_string(kMaxQubits));
  }
  return n;
}

}  // namespace

QuantumState::QuantumState(std::size_t num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw CapacityError("qubit count " + std::to_string(num_qubits) +
                        " outside [1, " + std::to_string(kMaxQubits) + "]");
  }
  amplitudes_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
  amplitudes_[0] = Complex{1.0, 0.0};
}

double QuantumState::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return total;
}

void QuantumState::check_qubit(std::size_t q) const {
  if (q >= num_qubits_) {
    throw IndexError("qubit index " + std::to_string(q) + " out of range for " +
                     std::to_string(num_qubits_) + "-qubit state");
  }
}

void QuantumState::apply_rx(std::size_t target, double angle) {
  check_qubit(target);
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const Complex mis{0.0, -s};
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t dim = amplitudes_.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Complex a0 = amplitudes_[i];
      const Complex a1 = amplitudes_[i + stride];
      amplitudes_[i] = c * a0 + mis * a1;
      amplitudes_[i + stride] = mis * a0 + c * a1;
    }
  }
}

void QuantumState::apply_ry(std::size_t target, double angle) {
  check_qubit(target);
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t dim = amplitudes_.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Complex a0 = amplitudes_[i];
      const Complex a1 = amplitudes_[i + stride];
      amplitudes_[i] = c * a0 - s * a1;
      amplitudes_[i + stride] = s * a0 + c * a1;
    }
  }
}

void QuantumState::apply_rz(std::size_t target, double angle) {
  check_qubit(target);
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t dim = amplitudes_.size();
  // e^{-i angle/2} on |0>, e^{+i angle/2} on |1>, written out to avoid the
  // checked complex product.
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const double re0 = amplitudes_[i].real();
      const double im0 = amplitudes_[i].imag();
      amplitudes_[i] = {c * re0 + s * im0, c * im0 - s * re0};
      const double re1 = amplitudes_[i + stride].real();
      const double im1 = amplitudes_[i + stride].imag();
      amplitudes_[i + stride] = {c * re1 - s * im1, c * im1 + s * re1};
    }
  }
}

void QuantumState::apply_cnot(std::size_t control, std::size_t target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) {
    throw ArgumentError("CNOT control and target are both qubit " +
                        std::to_string(control));
  }
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  const std::size_t lo = std::min(control, target);
  const std::size_t hi = std::max(control, target);
  const std::size_t quarter = amplitudes_.size() >> 2;
  for (std::size_t k = 0; k < quarter; ++k) {
    // Spread k around zero bits at positions lo and hi.
    std::size_t i = ((k >> lo) << (lo + 1)) | (k & ((std::size_t{1} << lo) - 1));
    i = ((i >> hi) << (hi + 1)) | (i & ((std::size_t{1} << hi) - 1));
    i |= cmask;
    std::swap(amplitudes_[i], amplitudes_[i | tmask]);
  }
}

void QuantumState::assign(std::span<const Complex> amplitudes) {
  if (amplitudes.size() != amplitudes_.size()) {
    throw ArgumentError("assign: expected " + std::to_string(amplitudes_.size()) +
                        " amplitudes, got " + std::to_string(amplitudes.size()));
  }
  std::copy(amplitudes.begin(), amplitudes.end(), amplitudes_.begin());
}

void QuantumState::assign_real(std::span<const double> amplitudes) {
  if (amplitudes.size() != amplitudes_.size()) {
    throw ArgumentError("assign: expected " + std::to_string(amplitudes_.size()) +
                        " amplitudes, got " + std::to_string(amplitudes.size()));
  }
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    amplitudes_[i] = Complex{amplitudes[i], 0.0};
  }
}

const char* to_string(GateKind kind) {
  switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
  }
  return "?";
}

void validate(const GateOp& op, std::size_t num_qubits) {
  if (op.target >= num_qubits) {
    throw IndexError(std::string(to_string(op.kind)) + " target " +
                     std::to_string(op.target) + " out of range for " +
                     std::to_string(num_qubits) + " qubits");
  }
  if (op.kind == GateKind::CNOT) {
    if (!op.control) throw ArgumentError("CNOT requires a control qubit");
    if (*op.control >= num_qubits) {
      throw IndexError("CNOT control " + std::to_string(*op.control) +
                       " out of range for " + std::to_string(num_qubits) +
                       " qubits");
    }
    if (*op.control == op.target) {
      throw ArgumentError("CNOT control and target are both qubit " +
                          std::to_string(op.target));
    }
  } else if (op.control) {
    throw ArgumentError("rotation gates take no control qubit");
  }
}

void GateProgram::push(const GateOp& op) {
  validate(op, num_qubits_);
  ops_.push_back(op);
}

std::string GateProgram::dump() const {
  std::string out;
  char buf[64];
  for (const auto& op : ops_) {
    out += to_string(op.kind);
    out += ' ';
    out += std::to_string(op.target);
    if (op.kind == GateKind::CNOT) {
      out += ' ';
      out += std::to_string(*op.control);
    } else {
      std::snprintf(buf, sizeof buf, " %.12g", op.angle);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string bitstring(std::size_t basis_index, std::size_t num_qubits) {
  std::string s(num_qubits, '0');
  for (std::size_t q = 0; q < num_qubits; ++q) {
    if ((basis_index >> q) & 1U) s[q] = '1';
  }
  return s;
}

QuantumState zero_state(std::size_t num_qubits) { return QuantumState(num_qubits); }

void apply_in_place(QuantumState& state, const GateOp& op) {
  validate(op, state.num_qubits());
  switch (op.kind) {
    case GateKind::RX: state.apply_rx(op.target, op.angle); break;
    case GateKind::RY: state.apply_ry(op.target, op.angle); break;
    case GateKind::RZ: state.apply_rz(op.target, op.angle); break;
    case GateKind::CNOT: state.apply_cnot(*op.control, op.target); break;
  }
}

void run_in_place(QuantumState& state, const GateProgram& program) {
  if (program.num_qubits() != state.num_qubits()) {
    throw ArgumentError("program declares " + std::to_string(program.num_qubits()) +
                        " qubits, state has " + std::to_string(state.num_qubits()));
  }
  for (const auto& op : program.ops()) apply_in_place(state, op);
}

QuantumState apply_gate(QuantumState state, const GateOp& op) {
  apply_in_place(state, op);
  return state;
}

QuantumState run(QuantumState state, const GateProgram& program) {
  run_in_place(state, program);
  return state;
}

double probability_one(const QuantumState& state, std::size_t qubit) {
  if (qubit >= state.num_qubits()) {
    throw IndexError("qubit index " + std::to_string(qubit) + " out of range");
  }
  const std::size_t mask = std::size_t{1} << qubit;
  double p1 = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) p1 += std::norm(amps[i]);
  }
  return p1;
}

double expectation_z(const QuantumState& state, std::size_t qubit) {
  if (qubit >= state.num_qubits()) {
    throw IndexError("qubit index " + std::to_string(qubit) + " out of range");
  }
  const std::size_t mask = std::size_t{1} << qubit;
  double p0 = 0.0;
  double p1 = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    ((i & mask) ? p1 : p0) += std::norm(amps[i]);
  }
  return p0 - p1;
}

ShotCounts sample_counts(const QuantumState& state, std::uint64_t shots,
                         std::uint64_t seed) {
  if (shots == 0) throw ArgumentError("sample_counts requires shots >= 1");
  const auto amps = state.amplitudes();
  std::vector<double> cumulative(amps.size());
  double running = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    running += std::norm(amps[i]);
    cumulative[i] = running;
  }
  std::vector<std::uint64_t> hits(amps.size(), 0);
  CounterRng rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    auto idx = static_cast<std::size_t>(it - cumulative.begin());
    // u lands past the end only through rounding; fall back to the last
    // outcome with nonzero mass.
    if (idx >= amps.size()) idx = amps.size() - 1;
    while (std::norm(amps[idx]) == 0.0 && idx > 0) --idx;
    ++hits[idx];
  }
  ShotCounts out;
  out.total_shots = shots;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] > 0) out.counts.emplace(bitstring(i, state.num_qubits()), hits[i]);
  }
  return out;
}

double sampled_expectation_z(const ShotCounts& counts, std::size_t qubit) {
  if (counts.total_shots == 0) throw ArgumentError("no shots recorded");
  std::int64_t balance = 0;
  for (const auto& [bits, n] : counts.counts) {
    if (qubit >= bits.size()) {
      throw IndexError("qubit index " + std::to_string(qubit) + " out of range");
    }
    balance += (bits[qubit] == '0') ? static_cast<std::int64_t>(n)
                                    : -static_cast<std::int64_t>(n);
  }
  return static_cast<double>(balance) / static_cast<double>(counts.total_shots);
}

QuantumState init_amplitudes_direct(std::span<const Complex> target) {
  const std::size_t n = qubits_for_length(target.size());
  double norm2 = 0.0;
  for (const auto& a : target) norm2 += std::norm(a);
  if (!std::isfinite(norm2) || std::abs(std::sqrt(norm2) - 1.0) > 1e-8) {
    throw ArgumentError("amplitude vector norm " + std::to_string(std::sqrt(norm2)) +
                        " is not within 1e-8 of 1");
  }
  QuantumState state(n);
  state.assign(target);
  return state;
}

QuantumState init_amplitudes_direct(std::span<const double> target) {
  std::vector<Complex> c(target.begin(), target.end());
  return init_amplitudes_direct(std::span<const Complex>(c));
}

namespace {

// Uniformly controlled RY on `target` with controls target+1 .. n-1 (bit p of
// the control value j is qubit target+1+p). angles[j] is the rotation applied
// when the controls read j.
void append_uniformly_controlled_ry(GateProgram& program, std::size_t target,
                                    const std::vector<double>& angles) {
  const std::size_t count = angles.size();
  if (count == 1) {
    program.push(GateOp::ry(target, angles[0]));
    return;
  }
  const auto k = static_cast<std::size_t>(std::countr_zero(count));
  const double scale = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t gray = i ^ (i >> 1);
    double theta = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      theta += (std::popcount(j & gray) % 2 == 0) ? angles[j] : -angles[j];
    }
    program.push(GateOp::ry(target, theta * scale));
    const std::size_t flip_bit = (i + 1 < count)
                                     ? static_cast<std::size_t>(std::countr_zero(i + 1))
                                     : k - 1;
    program.push(GateOp::cnot(target + 1 + flip_bit, target));
  }
}

}  // namespace

GateProgram mottonen_prepare(std::span<const double> target) {
  const std::size_t n = qubits_for_length(target.size());
  double norm2 = 0.0;
  for (double a : target) {
    if (!std::isfinite(a)) throw ArgumentError("target has a non-finite entry");
    norm2 += a * a;
  }
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-8) {
    throw ArgumentError("target norm " + std::to_string(std::sqrt(norm2)) +
                        " is not within 1e-8 of 1");
  }

  GateProgram program(n);
  // Fix qubits from the most significant down; at qubit q the controls are
  // the already-prepared qubits above it.
  for (std::size_t level = 0; level < n; ++level) {
    const std::size_t q = n - 1 - level;
    const std::size_t blocks = std::size_t{1} << level;
    const std::size_t half = std::size_t{1} << q;
    std::vector<double> angles(blocks, 0.0);
    for (std::size_t j = 0; j < blocks; ++j) {
      const std::size_t base = j * 2 * half;
      if (q == 0) {
        angles[j] = 2.0 * std::atan2(target[base + 1], target[base]);
      } else {
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
          lo += target[base + i] * target[base + i];
          hi += target[base + half + i] * target[base + half + i];
        }
        angles[j] = 2.0 * std::atan2(std::sqrt(hi), std::sqrt(lo));
      }
    }
    append_uniformly_controlled_ry(program, q, angles);
  }
  return program;
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.dim() != b.dim()) throw ArgumentError("fidelity: dimension mismatch");
  Complex overlap{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) overlap += std::conj(a[i]) * b[i];
  return std::norm(overlap);
}

double fidelity(const QuantumState& a, std::span<const double> b) {
  if (a.dim() != b.size()) throw ArgumentError("fidelity: dimension mismatch");
  Complex overlap{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) overlap += std::conj(a[i]) * b[i];
  return std::norm(overlap);
}

}  // namespace qrlfolio::sv
