#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vartsp/bitstring.hpp"

namespace vartsp {

using Amplitude = std::complex<double>;
using ParameterVector = std::vector<double>;

// Dense simulation stores 2^q amplitudes; q = 25 is 512 MiB.
inline constexpr std::size_t kDenseQubitLimit = 25;

enum class GateKind { kH, kRX, kRY, kRZ, kCX, kRXX, kRZZ };

std::string to_string(GateKind kind);
bool is_two_qubit(GateKind kind);
bool is_parametrizable(GateKind kind);

// Rotation conventions: R_P(t) = exp(-i t P / 2) for P in {X, Y, Z, XX, ZZ}.
// CX uses the first target as control.
struct GateOp {
  GateKind kind = GateKind::kH;
  std::array<std::size_t, 2> targets{0, 0};
  std::optional<std::size_t> param_slot;
  double fixed_angle = 0.0;  // used when param_slot is empty

  std::size_t arity() const { return is_two_qubit(kind) ? 2 : 1; }
  double angle(std::span<const double> theta) const {
    return param_slot ? theta[*param_slot] : fixed_angle;
  }
};

// How Circuit 3 spends its parameters.
enum class Circuit3Variant {
  kRzAndRzz,  // per-qubit RZ and pairwise RZZ angles, 2q - 1 parameters
  kRzOnly,    // per-qubit RZ only; RZZ fixed at pi/2, q parameters
};

struct CircuitSpec {
  int id = 0;
  std::size_t q = 0;
  std::vector<GateOp> gates;
  std::size_t param_count = 0;

  bool entangling() const;
};

// Circuits 1-5 on a linear chain of q qubits. Slots are assigned in gate
// order. Throws ConfigError for an unknown id or q == 0.
CircuitSpec build_circuit(int id, std::size_t q,
                          Circuit3Variant variant = Circuit3Variant::kRzAndRzz);

// One gate per line: "KIND targets [slot]".
std::string format_netlist(const CircuitSpec& spec);

// Row-major 2x2 or 4x4 unitary; two-qubit basis is |t0 t1>, t0 major.
std::vector<Amplitude> gate_matrix(GateKind kind, double angle);

// Amplitudes of 2^q basis states. Qubit i is bit q-1-i of the index, so the
// index written in binary reads qubit 0 first.
class StateVector {
 public:
  explicit StateVector(std::size_t q);  // |0...0>

  std::size_t qubits() const { return q_; }
  std::span<const Amplitude> amplitudes() const { return amps_; }
  std::span<Amplitude> amplitudes() { return amps_; }
  std::vector<double> probabilities() const;
  double norm_squared() const;

  void apply(const GateOp& gate, std::span<const double> theta);

 private:
  std::size_t q_;
  std::vector<Amplitude> amps_;
};

// Per-qubit states of an entanglement-free circuit.
struct ProductState {
  std::vector<std::array<Amplitude, 2>> qubits;

  double probability_one(std::size_t qubit) const {
    return std::norm(qubits[qubit][1]);
  }
  StateVector to_dense() const;
};

// Reference path: every gate applied in order to a dense vector.
StateVector simulate_gate_by_gate(const CircuitSpec& spec,
                                  std::span<const double> theta);

// Dense statevector from |0...0>. Circuits built only from commuting X-type
// rotations (or Z-type rotations between Hadamard layers) are evaluated as a
// phase vector followed by a Walsh-Hadamard transform; anything else falls
// back to gate-by-gate. Throws ResourceError above kDenseQubitLimit and
// ConfigError on a parameter count mismatch.
StateVector simulate(const CircuitSpec& spec, std::span<const double> theta);

// Throws ConfigError if the circuit has two-qubit gates.
ProductState simulate_product(const CircuitSpec& spec,
                              std::span<const double> theta);

struct SampleBatch {
  std::map<BitString, std::uint64_t> counts;
  std::uint64_t shots = 0;
};

enum class SimulationPath {
  kProduct,         // no two-qubit gates
  kProductThenCx,   // single-qubit layer, then a classical CX network
  kPhaseTransform,  // dense via phase vector + Walsh-Hadamard transform
  kGateByGate,      // dense reference
};

SimulationPath simulation_path(const CircuitSpec& spec);

// Measurement sampler holding a reusable amplitude buffer. Sampling is
// deterministic for a given (theta, shots, seed).
class Sampler {
 public:
  // Throws ResourceError when the circuit needs the dense path and
  // q > kDenseQubitLimit.
  explicit Sampler(CircuitSpec spec);

  const CircuitSpec& spec() const { return spec_; }
  SimulationPath path() const { return path_; }

  SampleBatch sample(std::span<const double> theta, std::uint64_t shots,
                     std::uint64_t seed);

 private:
  CircuitSpec spec_;
  SimulationPath path_;
  std::vector<Amplitude> buffer_;
};

SampleBatch sample(const CircuitSpec& spec, std::span<const double> theta,
                   std::uint64_t shots, std::uint64_t seed);

// Circuit 2 warm start: RX slot i = pi if bit i is set, RXX slots 0.
// Throws ConfigError for other circuits or a length mismatch.
ParameterVector load_warm_start(const CircuitSpec& spec, const BitString& b);

}  // namespace vartsp
