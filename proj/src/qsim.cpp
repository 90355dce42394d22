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

#include "kernelscape/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kernelscape/rng.hpp"

namespace ks::qsim {

namespace {

// Below this many loop iterations the OpenMP fork costs more than the loop.
constexpr std::size_t kParallelThreshold = std::size_t{1} << 15;

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

void check_qubit(int q, int num_qubits, const char* what) {
    if (q < 0 || q >= num_qubits)
        throw std::invalid_argument(std::string(what) + ": qubit index out of range");
}

void check_gate(const GateOp& gate, int num_qubits) {
    check_qubit(gate.target, num_qubits, "apply_gate");
    if (gate.kind == GateOp::Kind::ControlledNot) {
        check_qubit(gate.control, num_qubits, "apply_gate");
        if (gate.control == gate.target)
            throw std::invalid_argument("apply_gate: control equals target");
    }
}

// p enumerates basis indices with the target bit deleted; expand by inserting
// a zero bit at the target position.
inline std::size_t insert_zero_bit(std::size_t p, std::size_t bit) {
    const std::size_t lo = p & (bit - 1);
    return ((p - lo) << 1) | lo;
}

inline void hadamard_pair(Complex* amp, std::size_t i0, std::size_t i1) {
    const Complex a = amp[i0];
    const Complex b = amp[i1];
    amp[i0] = (a + b) * kInvSqrt2;
    amp[i1] = (a - b) * kInvSqrt2;
}

void hadamard_serial(Complex* amp, std::size_t n, int target) {
    const std::size_t step = std::size_t{1} << target;
    const std::size_t pairs = n >> 1;
    for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t i0 = insert_zero_bit(p, step);
        hadamard_pair(amp, i0, i0 | step);
    }
}

void hadamard_parallel(Complex* amp, std::size_t n, int target) {
    const std::size_t step = std::size_t{1} << target;
    const std::size_t pairs = n >> 1;
    if (pairs < kParallelThreshold) {
        hadamard_serial(amp, n, target);
        return;
    }
#pragma omp parallel for
    for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t i0 = insert_zero_bit(p, step);
        hadamard_pair(amp, i0, i0 | step);
    }
}

// Not inlined: keeps a single compiled copy, so every caller sees identical
// rounding (inlined copies let the compiler fuse cos+sin into sincos in some
// clones only, which differs from separate calls by an ulp).
[[gnu::noinline]] Complex phase_factor(double angle) {
    return Complex{std::cos(angle), std::sin(angle)};
}

void phase_serial(Complex* amp, std::size_t n, int target, double angle) {
    const std::size_t step = std::size_t{1} << target;
    const std::size_t pairs = n >> 1;
    const Complex phase = phase_factor(angle);
    for (std::size_t p = 0; p < pairs; ++p) amp[insert_zero_bit(p, step) | step] *= phase;
}

void phase_parallel(Complex* amp, std::size_t n, int target, double angle) {
    const std::size_t step = std::size_t{1} << target;
    const std::size_t pairs = n >> 1;
    if (pairs < kParallelThreshold) {
        phase_serial(amp, n, target, angle);
        return;
    }
    const Complex phase = phase_factor(angle);
#pragma omp parallel for
    for (std::size_t p = 0; p < pairs; ++p) amp[insert_zero_bit(p, step) | step] *= phase;
}

// q enumerates basis indices with both the control and target bits deleted;
// expand to the index with control=1, target=0 and swap with its target=1
// partner.
inline std::size_t cnot_base(std::size_t q, std::size_t low_bit, std::size_t high_bit,
                             std::size_t cbit) {
    return insert_zero_bit(insert_zero_bit(q, low_bit), high_bit) | cbit;
}

void cnot_serial(Complex* amp, std::size_t n, int control, int target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    const std::size_t low_bit = std::min(cbit, tbit);
    const std::size_t high_bit = std::max(cbit, tbit);
    const std::size_t quads = n >> 2;
    for (std::size_t q = 0; q < quads; ++q) {
        const std::size_t base = cnot_base(q, low_bit, high_bit, cbit);
        std::swap(amp[base], amp[base | tbit]);
    }
}

void cnot_parallel(Complex* amp, std::size_t n, int control, int target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    const std::size_t low_bit = std::min(cbit, tbit);
    const std::size_t high_bit = std::max(cbit, tbit);
    const std::size_t quads = n >> 2;
    if (quads < kParallelThreshold) {
        cnot_serial(amp, n, control, target);
        return;
    }
#pragma omp parallel for
    for (std::size_t q = 0; q < quads; ++q) {
        const std::size_t base = cnot_base(q, low_bit, high_bit, cbit);
        std::swap(amp[base], amp[base | tbit]);
    }
}

void check_state(const Statevector& state, int num_qubits, const char* what) {
    if (num_qubits < 1 || state.size() != (std::size_t{1} << num_qubits))
        throw std::invalid_argument(std::string(what) + ": state size does not match qubit count");
}

}  // namespace

void validate(const FeatureMapSpec& spec) {
    if (spec.num_qubits < 1) throw std::invalid_argument("FeatureMapSpec: num_qubits must be >= 1");
    if (spec.reps < 1) throw std::invalid_argument("FeatureMapSpec: reps must be >= 1");
}

Circuit build_feature_map(const FeatureMapSpec& spec, std::span<const double> x) {
    validate(spec);
    const int d = spec.num_qubits;
    if (static_cast<int>(x.size()) != d)
        throw std::invalid_argument(
            "build_feature_map: feature vector length does not match num_qubits");

    Circuit circuit;
    circuit.num_qubits = d;
    const std::size_t pairs = d > 1 ? static_cast<std::size_t>(d - 1) : 0;
    circuit.gates.reserve(static_cast<std::size_t>(spec.reps) *
                          (2 * static_cast<std::size_t>(d) + 3 * pairs));
    const double pi = std::numbers::pi;
    for (int rep = 0; rep < spec.reps; ++rep) {
        for (int i = 0; i < d; ++i) circuit.gates.push_back(GateOp::hadamard(i));
        for (int i = 0; i < d; ++i) circuit.gates.push_back(GateOp::phase(i, 2.0 * x[i]));
        for (int i = 0; i + 1 < d; ++i) {
            circuit.gates.push_back(GateOp::cnot(i, i + 1));
            circuit.gates.push_back(GateOp::phase(i + 1, 2.0 * (pi - x[i]) * (pi - x[i + 1])));
            circuit.gates.push_back(GateOp::cnot(i, i + 1));
        }
    }
    return circuit;
}

Statevector zero_state(int num_qubits) {
    if (num_qubits < 1) throw std::invalid_argument("zero_state: num_qubits must be >= 1");
    Statevector state(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    state[0] = Complex{1.0, 0.0};
    return state;
}

void apply_gate(Statevector& state, const GateOp& gate, int num_qubits) {
    check_state(state, num_qubits, "apply_gate");
    check_gate(gate, num_qubits);
    switch (gate.kind) {
        case GateOp::Kind::Hadamard:
            hadamard_parallel(state.data(), state.size(), gate.target);
            break;
        case GateOp::Kind::PhaseRotation:
            phase_parallel(state.data(), state.size(), gate.target, gate.angle);
            break;
        case GateOp::Kind::ControlledNot:
            cnot_parallel(state.data(), state.size(), gate.control, gate.target);
            break;
    }
}

void apply_circuit_inplace(const Circuit& circuit, Statevector& state) {
    check_state(state, circuit.num_qubits, "apply_circuit");
    for (const GateOp& gate : circuit.gates) apply_gate(state, gate, circuit.num_qubits);
}

Statevector apply_circuit(const Circuit& circuit, Statevector state) {
    apply_circuit_inplace(circuit, state);
    return state;
}

namespace serial {

void apply_gate(Statevector& state, const GateOp& gate, int num_qubits) {
    check_state(state, num_qubits, "apply_gate");
    check_gate(gate, num_qubits);
    switch (gate.kind) {
        case GateOp::Kind::Hadamard:
            hadamard_serial(state.data(), state.size(), gate.target);
            break;
        case GateOp::Kind::PhaseRotation:
            phase_serial(state.data(), state.size(), gate.target, gate.angle);
            break;
        case GateOp::Kind::ControlledNot:
            cnot_serial(state.data(), state.size(), gate.control, gate.target);
            break;
    }
}

Statevector apply_circuit(const Circuit& circuit, Statevector state) {
    check_state(state, circuit.num_qubits, "apply_circuit");
    for (const GateOp& gate : circuit.gates)
        serial::apply_gate(state, gate, circuit.num_qubits);
    return state;
}

}  // namespace serial

double norm_sq(const Statevector& state) {
    double s = 0.0;
    for (const Complex& a : state) s += std::norm(a);
    return s;
}

Complex inner_product(const Statevector& bra, const Statevector& ket) {
    if (bra.size() != ket.size()) throw std::invalid_argument("inner_product: dimension mismatch");
    // Fixed summation order keeps <x|y> the exact conjugate of <y|x>.
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < bra.size(); ++i) s += std::conj(bra[i]) * ket[i];
    return s;
}

double fidelity_exact(const FeatureMapSpec& spec, std::span<const double> x,
                      std::span<const double> y) {
    const Statevector psi_x =
        apply_circuit(build_feature_map(spec, x), zero_state(spec.num_qubits));
    const Statevector psi_y =
        apply_circuit(build_feature_map(spec, y), zero_state(spec.num_qubits));
    const double f = std::norm(inner_product(psi_y, psi_x));
    // Guard against rounding just past the endpoints.
    return std::clamp(f, 0.0, 1.0);
}

double sample_fidelity(double p, int shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("sample_fidelity: shots must be >= 1");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("sample_fidelity: probability outside [0,1]");
    Rng rng(seed);
    long successes = 0;
    for (int t = 0; t < shots; ++t)
        if (rng.next_uniform() < p) ++successes;
    return static_cast<double>(successes) / static_cast<double>(shots);
}

double fidelity_sampled(const FeatureMapSpec& spec, std::span<const double> x,
                        std::span<const double> y, int shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("fidelity_sampled: shots must be >= 1");
    return sample_fidelity(fidelity_exact(spec, x, y), shots, seed);
}

}  // namespace ks::qsim
