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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "kernelscape/matrix.hpp"
#include "kernelscape/qsim.hpp"

namespace ks::kernels {

enum class KernelKind { Rbf, QuantumExact, QuantumSampled };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);

struct KernelMatrix {
    Mat values;
    KernelKind kind = KernelKind::Rbf;
    std::optional<int> shots;
    std::optional<std::uint64_t> seed;
    bool symmetric = false;
};

// entry (i,j) = exp(-gamma * ||X[i] - X2[j]||^2)
KernelMatrix rbf_gram(const Mat& x, const Mat& x2, double gamma, int threads = 1);
// Square variant: strict upper triangle evaluated, mirrored, diagonal exactly 1.
KernelMatrix rbf_gram_sym(const Mat& x, double gamma, int threads = 1);

enum class QuantumMode { Exact, Sampled };

struct QuantumGramOptions {
    QuantumMode mode = QuantumMode::Exact;
    int shots = 1024;
    std::uint64_t seed = 0;
    int threads = 1;
    // Statevectors are cached up to this budget; past it the columns are
    // processed in blocks and row states recomputed per block.
    std::size_t cache_budget_bytes = std::size_t{1} << 30;
};

// entry (i,j) = fidelity of the feature-map states of X[i] and X2[j].
// Sampled entries use the per-entry seed hash(seed, i, j), so the Gram is
// identical regardless of evaluation order or thread count.
KernelMatrix quantum_gram(const qsim::FeatureMapSpec& spec, const Mat& x, const Mat& x2,
                          const QuantumGramOptions& opts);
// Square variant: strict upper triangle evaluated, mirrored, diagonal exactly 1.
KernelMatrix quantum_gram_sym(const qsim::FeatureMapSpec& spec, const Mat& x,
                              const QuantumGramOptions& opts);

// Plain per-entry reference implementations, kept for tests and benchmarks.
namespace serial {
KernelMatrix rbf_gram(const Mat& x, const Mat& x2, double gamma);
KernelMatrix rbf_gram_sym(const Mat& x, double gamma);
KernelMatrix quantum_gram(const qsim::FeatureMapSpec& spec, const Mat& x, const Mat& x2,
                          const QuantumGramOptions& opts);
KernelMatrix quantum_gram_sym(const qsim::FeatureMapSpec& spec, const Mat& x,
                              const QuantumGramOptions& opts);
}  // namespace serial

// K * N / trace(K); requires square K with positive trace.
KernelMatrix normalize_trace(KernelMatrix k);

// Clips negative eigenvalues to zero. PSD input is returned unchanged.
KernelMatrix psd_floor(KernelMatrix k);

struct GeoDiffResult {
    double g = 0.0;
    double lambda = 0.0;
};

enum class GeoDiffVariant {
    // sqrt( || sqrt(Kq) (Kc + lambda I)^-1 sqrt(Kq) || )
    Plain,
    // sqrt( || sqrt(Kq) (Kc + lambda I)^-1 Kc (Kc + lambda I)^-1 sqrt(Kq) || )
    Sandwich,
};

// Both inputs are trace-normalized internally before the spectral-norm ratio
// is taken. sqrt(Kq) clips negative eigenvalues to zero.
GeoDiffResult geometric_difference(const KernelMatrix& kc, const KernelMatrix& kq, double lambda,
                                   GeoDiffVariant variant = GeoDiffVariant::Plain);

// CSV: one `#` comment line carrying kind/shots/seed/symmetric, then the
// row-major values.
void save_gram_csv(const std::filesystem::path& path, const KernelMatrix& k);
KernelMatrix load_gram_csv(const std::filesystem::path& path);

}  // namespace ks::kernels
