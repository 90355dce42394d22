// Copyright 2026 The kernelscape authors
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
#include <cstdint>
#include <span>
#include <vector>

namespace ks::qsim {

using Complex = std::complex<double>;

// Amplitudes in little-endian order: qubit 0 is the least significant bit of
// the basis-state index.
using Statevector = std::vector<Complex>;

enum class Entanglement { Linear };

// One qubit per feature; the feature space has 2^num_qubits dimensions.
struct FeatureMapSpec {
    int num_qubits = 1;
    int reps = 2;
    Entanglement entanglement = Entanglement::Linear;
};

// Throws std::invalid_argument if num_qubits < 1 or reps < 1.
void validate(const FeatureMapSpec& spec);

struct GateOp {
    enum class Kind { Hadamard, PhaseRotation, ControlledNot };

    Kind kind;
    int target = 0;
    int control = -1;   // ControlledNot only
    double angle = 0.0; // PhaseRotation only

    static GateOp hadamard(int target) { return {Kind::Hadamard, target, -1, 0.0}; }
    static GateOp phase(int target, double angle) {
        return {Kind::PhaseRotation, target, -1, angle};
    }
    static GateOp cnot(int control, int target) {
        return {Kind::ControlledNot, target, control, 0.0};
    }
};

// Gates are applied in list order: gates.front() acts first.
struct Circuit {
    int num_qubits = 0;
    std::vector<GateOp> gates;
};

// Layered map of Hadamards plus data-dependent phases. Per repetition:
//   H on every qubit;
//   PhaseRotation(i, 2*x[i]) on every qubit;
//   for each linear pair (i, i+1): CNOT(i,i+1),
//     PhaseRotation(i+1, 2*(pi - x[i])*(pi - x[i+1])), CNOT(i,i+1).
// PhaseRotation is diag(1, e^{i*theta}); the global-phase difference to the
// rotation form cancels in fidelities.
Circuit build_feature_map(const FeatureMapSpec& spec, std::span<const double> x);

Statevector zero_state(int num_qubits);

// Primary gate kernels; parallelized over amplitude pairs for large states.
// All writes are to disjoint slots, so results are bit-identical for any
// thread count.
void apply_gate(Statevector& state, const GateOp& gate, int num_qubits);
Statevector apply_circuit(const Circuit& circuit, Statevector state);
void apply_circuit_inplace(const Circuit& circuit, Statevector& state);

// Single-threaded reference kernels, kept for tests and the benchmark target.
namespace serial {
void apply_gate(Statevector& state, const GateOp& gate, int num_qubits);
Statevector apply_circuit(const Circuit& circuit, Statevector state);
}  // namespace serial

double norm_sq(const Statevector& state);
Complex inner_product(const Statevector& bra, const Statevector& ket);

// |<psi(y)|psi(x)>|^2 with psi(v) = feature-map circuit applied to |0...0>.
double fidelity_exact(const FeatureMapSpec& spec, std::span<const double> x,
                      std::span<const double> y);

// Frequency of the all-zeros outcome over `shots` measurements of the
// inverse-fidelity circuit, realized as one binomial draw at the exact
// success probability. The draw is pinned: seed the engine with `seed`, count
// how many of `shots` 53-bit uniforms fall below p.
double sample_fidelity(double p, int shots, std::uint64_t seed);

double fidelity_sampled(const FeatureMapSpec& spec, std::span<const double> x,
                        std::span<const double> y, int shots, std::uint64_t seed);

}  // namespace ks::qsim
