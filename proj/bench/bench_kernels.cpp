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

// Serial reference implementations against the OpenMP-parallel kernels.

#include <numbers>

#include <benchmark/benchmark.h>

#include "kernelscape/kernels.hpp"
#include "kernelscape/qsim.hpp"
#include "kernelscape/rng.hpp"

namespace {

ks::Mat random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
    ks::Rng rng(seed);
    ks::Mat x(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) x(i, j) = rng.next_uniform() * std::numbers::pi;
    return x;
}

void BM_RbfGramSerial(benchmark::State& state) {
    const ks::Mat x = random_points(static_cast<std::size_t>(state.range(0)), 10, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ks::kernels::serial::rbf_gram_sym(x, 0.1));
}

void BM_RbfGramParallel(benchmark::State& state) {
    const ks::Mat x = random_points(static_cast<std::size_t>(state.range(0)), 10, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(ks::kernels::rbf_gram_sym(x, 0.1, static_cast<int>(state.range(1))));
}

void BM_QuantumGramSerial(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const int qubits = static_cast<int>(state.range(1));
    const ks::Mat x = random_points(n, static_cast<std::size_t>(qubits), 2);
    const ks::qsim::FeatureMapSpec spec{qubits, 2, ks::qsim::Entanglement::Linear};
    ks::kernels::QuantumGramOptions opts;
    for (auto _ : state)
        benchmark::DoNotOptimize(ks::kernels::serial::quantum_gram_sym(spec, x, opts));
}

void BM_QuantumGramParallel(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const int qubits = static_cast<int>(state.range(1));
    const ks::Mat x = random_points(n, static_cast<std::size_t>(qubits), 2);
    const ks::qsim::FeatureMapSpec spec{qubits, 2, ks::qsim::Entanglement::Linear};
    ks::kernels::QuantumGramOptions opts;
    opts.threads = static_cast<int>(state.range(2));
    for (auto _ : state)
        benchmark::DoNotOptimize(ks::kernels::quantum_gram_sym(spec, x, opts));
}

void BM_ApplyCircuitSerial(benchmark::State& state) {
    const int qubits = static_cast<int>(state.range(0));
    const ks::Mat x = random_points(1, static_cast<std::size_t>(qubits), 3);
    const ks::qsim::FeatureMapSpec spec{qubits, 2, ks::qsim::Entanglement::Linear};
    const ks::qsim::Circuit circuit = ks::qsim::build_feature_map(spec, x.row(0));
    for (auto _ : state) {
        ks::qsim::Statevector psi =
            ks::qsim::serial::apply_circuit(circuit, ks::qsim::zero_state(qubits));
        benchmark::DoNotOptimize(psi.data());
    }
}

void BM_ApplyCircuitParallel(benchmark::State& state) {
    const int qubits = static_cast<int>(state.range(0));
    const ks::Mat x = random_points(1, static_cast<std::size_t>(qubits), 3);
    const ks::qsim::FeatureMapSpec spec{qubits, 2, ks::qsim::Entanglement::Linear};
    const ks::qsim::Circuit circuit = ks::qsim::build_feature_map(spec, x.row(0));
    for (auto _ : state) {
        ks::qsim::Statevector psi =
            ks::qsim::apply_circuit(circuit, ks::qsim::zero_state(qubits));
        benchmark::DoNotOptimize(psi.data());
    }
}

}  // namespace

BENCHMARK(BM_RbfGramSerial)->Arg(256)->Arg(512);
BENCHMARK(BM_RbfGramParallel)->Args({256, 2})->Args({256, 8})->Args({512, 8});
BENCHMARK(BM_QuantumGramSerial)->Args({32, 6})->Args({48, 6});
BENCHMARK(BM_QuantumGramParallel)->Args({32, 6, 8})->Args({48, 6, 8});
BENCHMARK(BM_ApplyCircuitSerial)->Arg(14)->Arg(18);
BENCHMARK(BM_ApplyCircuitParallel)->Arg(14)->Arg(18);

BENCHMARK_MAIN();
