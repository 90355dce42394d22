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

#include "kernelscape/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "kernelscape/errors.hpp"
#include "kernelscape/jacobi.hpp"
#include "kernelscape/rng.hpp"

namespace ks::kernels {
namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        d += diff * diff;
    }
    return d;
}

double rbf_entry(std::span<const double> a, std::span<const double> b, double gamma) {
    return std::exp(-gamma * sq_dist(a, b));
}

void check_rbf_args(const Mat& x, const Mat& x2, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("rbf_gram: gamma must be positive");
    if (x.cols() != x2.cols())
        throw std::invalid_argument("rbf_gram: feature dimensions differ");
}

void check_quantum_args(const qsim::FeatureMapSpec& spec, const Mat& x, const Mat& x2,
                        const QuantumGramOptions& opts) {
    qsim::validate(spec);
    if (x.cols() != static_cast<std::size_t>(spec.num_qubits) || x2.cols() != x.cols())
        throw std::invalid_argument("quantum_gram: feature count must equal num_qubits");
    if (opts.mode == QuantumMode::Sampled && opts.shots < 1)
        throw std::invalid_argument("quantum_gram: shots must be >= 1");
}

// |<bra|ket>|^2, same expression as the per-pair fidelity so the cached path
// is bit-identical to the reference.
double exact_entry(const qsim::Statevector& bra, const qsim::Statevector& ket) {
    return std::clamp(std::norm(qsim::inner_product(bra, ket)), 0.0, 1.0);
}

qsim::Statevector map_state(const qsim::FeatureMapSpec& spec, std::span<const double> x) {
    return qsim::apply_circuit(qsim::build_feature_map(spec, x), qsim::zero_state(spec.num_qubits));
}

// States for rows [begin, end) of m. Writes are disjoint, so the result does
// not depend on the thread count.
std::vector<qsim::Statevector> simulate_rows(const qsim::FeatureMapSpec& spec, const Mat& m,
                                             std::size_t begin, std::size_t end, int threads) {
    std::vector<qsim::Statevector> states(end - begin);
    const auto count = static_cast<std::int64_t>(end - begin);
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(dynamic)
    for (std::int64_t t = 0; t < count; ++t)
        states[static_cast<std::size_t>(t)] = map_state(spec, m.row(begin + static_cast<std::size_t>(t)));
    return states;
}

double sampled_entry(double p, const QuantumGramOptions& opts, std::size_t i, std::size_t j) {
    return qsim::sample_fidelity(
        p, opts.shots,
        derive_seed(opts.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
}

KernelMatrix make_quantum(Mat values, const QuantumGramOptions& opts, bool symmetric) {
    KernelMatrix k;
    k.values = std::move(values);
    k.symmetric = symmetric;
    if (opts.mode == QuantumMode::Sampled) {
        k.kind = KernelKind::QuantumSampled;
        k.shots = opts.shots;
        k.seed = opts.seed;
    } else {
        k.kind = KernelKind::QuantumExact;
    }
    return k;
}

std::size_t states_per_budget(const qsim::FeatureMapSpec& spec, const QuantumGramOptions& opts) {
    const std::size_t sv_bytes =
        sizeof(qsim::Complex) * (std::size_t{1} << spec.num_qubits);
    return std::max<std::size_t>(1, opts.cache_budget_bytes / sv_bytes);
}

}  // namespace

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Rbf: return "rbf";
        case KernelKind::QuantumExact: return "quantum_exact";
        case KernelKind::QuantumSampled: return "quantum_sampled";
    }
    throw std::invalid_argument("to_string: unknown kernel kind");
}

KernelKind kernel_kind_from_string(const std::string& s) {
    if (s == "rbf") return KernelKind::Rbf;
    if (s == "quantum_exact") return KernelKind::QuantumExact;
    if (s == "quantum_sampled") return KernelKind::QuantumSampled;
    throw std::invalid_argument("unknown kernel kind: " + s);
}

KernelMatrix rbf_gram(const Mat& x, const Mat& x2, double gamma, int threads) {
    check_rbf_args(x, x2, gamma);
    Mat out(x.rows(), x2.rows());
    const auto nrows = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(static)
    for (std::int64_t i = 0; i < nrows; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        for (std::size_t j = 0; j < x2.rows(); ++j)
            out(ui, j) = rbf_entry(x.row(ui), x2.row(j), gamma);
    }
    return {std::move(out), KernelKind::Rbf, std::nullopt, std::nullopt, false};
}

KernelMatrix rbf_gram_sym(const Mat& x, double gamma, int threads) {
    check_rbf_args(x, x, gamma);
    const std::size_t n = x.rows();
    Mat out(n, n);
    const auto nrows = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(dynamic)
    for (std::int64_t i = 0; i < nrows; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        out(ui, ui) = 1.0;
        for (std::size_t j = ui + 1; j < n; ++j) {
            const double v = rbf_entry(x.row(ui), x.row(j), gamma);
            out(ui, j) = v;
            out(j, ui) = v;
        }
    }
    return {std::move(out), KernelKind::Rbf, std::nullopt, std::nullopt, true};
}

KernelMatrix quantum_gram(const qsim::FeatureMapSpec& spec, const Mat& x, const Mat& x2,
                          const QuantumGramOptions& opts) {
    check_quantum_args(spec, x, x2, opts);
    const std::size_t n = x.rows();
    const std::size_t m = x2.rows();
    Mat out(n, m);
    const int threads = std::max(1, opts.threads);
    const std::size_t budget = states_per_budget(spec, opts);

    const auto fill_block = [&](const std::vector<qsim::Statevector>& col_states,
                                std::size_t jb, std::size_t je) {
        const auto nrows = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
        for (std::int64_t i = 0; i < nrows; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const qsim::Statevector psi = map_state(spec, x.row(ui));
            for (std::size_t j = jb; j < je; ++j) {
                const double p = exact_entry(col_states[j - jb], psi);
                out(ui, j) = opts.mode == QuantumMode::Exact ? p : sampled_entry(p, opts, ui, j);
            }
        }
    };

    if (n + m <= budget) {
        const auto states = simulate_rows(spec, x, 0, n, threads);
        const auto states2 = simulate_rows(spec, x2, 0, m, threads);
        const auto nrows = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(threads) schedule(static)
        for (std::int64_t i = 0; i < nrows; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            for (std::size_t j = 0; j < m; ++j) {
                const double p = exact_entry(states2[j], states[ui]);
                out(ui, j) = opts.mode == QuantumMode::Exact ? p : sampled_entry(p, opts, ui, j);
            }
        }
    } else {
        const std::size_t block =
            std::max<std::size_t>(1, budget > static_cast<std::size_t>(threads)
                                         ? budget - static_cast<std::size_t>(threads)
                                         : 1);
        for (std::size_t jb = 0; jb < m; jb += block) {
            const std::size_t je = std::min(m, jb + block);
            fill_block(simulate_rows(spec, x2, jb, je, threads), jb, je);
        }
    }
    return make_quantum(std::move(out), opts, false);
}

KernelMatrix quantum_gram_sym(const qsim::FeatureMapSpec& spec, const Mat& x,
                              const QuantumGramOptions& opts) {
    check_quantum_args(spec, x, x, opts);
    const std::size_t n = x.rows();
    Mat out(n, n);
    const int threads = std::max(1, opts.threads);
    const std::size_t budget = states_per_budget(spec, opts);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;

    if (n <= budget) {
        const auto states = simulate_rows(spec, x, 0, n, threads);
        const auto nrows = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
        for (std::int64_t i = 0; i < nrows; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            for (std::size_t j = ui + 1; j < n; ++j) {
                const double p = exact_entry(states[j], states[ui]);
                const double v =
                    opts.mode == QuantumMode::Exact ? p : sampled_entry(p, opts, ui, j);
                out(ui, j) = v;
                out(j, ui) = v;
            }
        }
    } else {
        const std::size_t block =
            std::max<std::size_t>(1, budget > static_cast<std::size_t>(threads)
                                         ? budget - static_cast<std::size_t>(threads)
                                         : 1);
        for (std::size_t jb = 1; jb < n; jb += block) {
            const std::size_t je = std::min(n, jb + block);
            const auto col_states = simulate_rows(spec, x, jb, je, threads);
            const auto last_row = static_cast<std::int64_t>(je - 1);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
            for (std::int64_t i = 0; i < last_row; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const std::size_t j0 = std::max(jb, ui + 1);
                if (j0 >= je) continue;
                const qsim::Statevector psi = map_state(spec, x.row(ui));
                for (std::size_t j = j0; j < je; ++j) {
                    const double p = exact_entry(col_states[j - jb], psi);
                    const double v =
                        opts.mode == QuantumMode::Exact ? p : sampled_entry(p, opts, ui, j);
                    out(ui, j) = v;
                    out(j, ui) = v;
                }
            }
        }
    }
    return make_quantum(std::move(out), opts, true);
}

namespace serial {

KernelMatrix rbf_gram(const Mat& x, const Mat& x2, double gamma) {
    check_rbf_args(x, x2, gamma);
    Mat out(x.rows(), x2.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x2.rows(); ++j)
            out(i, j) = rbf_entry(x.row(i), x2.row(j), gamma);
    return {std::move(out), KernelKind::Rbf, std::nullopt, std::nullopt, false};
}

KernelMatrix rbf_gram_sym(const Mat& x, double gamma) {
    check_rbf_args(x, x, gamma);
    const std::size_t n = x.rows();
    Mat out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = rbf_entry(x.row(i), x.row(j), gamma);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return {std::move(out), KernelKind::Rbf, std::nullopt, std::nullopt, true};
}

KernelMatrix quantum_gram(const qsim::FeatureMapSpec& spec, const Mat& x, const Mat& x2,
                          const QuantumGramOptions& opts) {
    check_quantum_args(spec, x, x2, opts);
    Mat out(x.rows(), x2.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x2.rows(); ++j) {
            const double p = qsim::fidelity_exact(spec, x.row(i), x2.row(j));
            out(i, j) = opts.mode == QuantumMode::Exact ? p : sampled_entry(p, opts, i, j);
        }
    }
    return make_quantum(std::move(out), opts, false);
}

KernelMatrix quantum_gram_sym(const qsim::FeatureMapSpec& spec, const Mat& x,
                              const QuantumGramOptions& opts) {
    check_quantum_args(spec, x, x, opts);
    const std::size_t n = x.rows();
    Mat out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = qsim::fidelity_exact(spec, x.row(i), x.row(j));
            const double v = opts.mode == QuantumMode::Exact ? p : sampled_entry(p, opts, i, j);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return make_quantum(std::move(out), opts, true);
}

}  // namespace serial

KernelMatrix normalize_trace(KernelMatrix k) {
    const std::size_t n = k.values.rows();
    if (n != k.values.cols())
        throw std::invalid_argument("normalize_trace: matrix must be square");
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += k.values(i, i);
    if (!(trace > 0.0))
        throw std::invalid_argument("normalize_trace: trace must be positive");
    const double scale = static_cast<double>(n) / trace;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) k.values(i, j) *= scale;
    return k;
}

KernelMatrix psd_floor(KernelMatrix k) {
    const std::size_t n = k.values.rows();
    if (n != k.values.cols()) throw std::invalid_argument("psd_floor: matrix must be square");
    if (!linalg::is_symmetric(k.values))
        throw std::invalid_argument("psd_floor: matrix must be symmetric");
    const auto eig = linalg::jacobi_eigensymmetric(k.values);
    if (eig.eigenvalues.empty() || eig.eigenvalues.front() >= 0.0) return k;
    std::vector<double> clipped = eig.eigenvalues;
    for (double& v : clipped) v = std::max(v, 0.0);
    k.values = linalg::reconstruct(eig, clipped);
    return k;
}

GeoDiffResult geometric_difference(const KernelMatrix& kc, const KernelMatrix& kq, double lambda,
                                   GeoDiffVariant variant) {
    const std::size_t n = kc.values.rows();
    if (n != kc.values.cols() || kq.values.rows() != kq.values.cols())
        throw std::invalid_argument("geometric_difference: matrices must be square");
    if (kq.values.rows() != n)
        throw std::invalid_argument("geometric_difference: matrices must have equal size");
    if (n == 0) throw std::invalid_argument("geometric_difference: empty matrix");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("geometric_difference: lambda must be >= 0");
    if (!linalg::is_symmetric(kc.values) || !linalg::is_symmetric(kq.values))
        throw std::invalid_argument("geometric_difference: matrices must be symmetric");

    const Mat kcn = normalize_trace(kc).values;
    const Mat kqn = normalize_trace(kq).values;

    const auto eig_q = linalg::jacobi_eigensymmetric(kqn);
    std::vector<double> sqrt_vals(eig_q.eigenvalues.size());
    for (std::size_t i = 0; i < sqrt_vals.size(); ++i)
        sqrt_vals[i] = std::sqrt(std::max(eig_q.eigenvalues[i], 0.0));
    const Mat s = linalg::reconstruct(eig_q, sqrt_vals);

    const auto eig_c = linalg::jacobi_eigensymmetric(kcn);
    const double sing_tol = 1e-13 * static_cast<double>(n);
    std::vector<double> inv_vals(eig_c.eigenvalues.size());
    for (std::size_t i = 0; i < inv_vals.size(); ++i) {
        const double shifted = eig_c.eigenvalues[i] + lambda;
        if (shifted <= sing_tol)
            throw std::domain_error("geometric_difference: Kc + lambda*I is singular");
        inv_vals[i] = 1.0 / shifted;
    }
    const Mat inv = linalg::reconstruct(eig_c, inv_vals);

    Mat middle = inv;
    if (variant == GeoDiffVariant::Sandwich) middle = matmul(matmul(inv, kcn), inv);
    Mat m = matmul(matmul(s, middle), s);
    // Round-off from the products breaks exact symmetry; re-symmetrize before
    // the symmetric spectral norm.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return {std::sqrt(linalg::spectral_norm_sym(m)), lambda};
}

void save_gram_csv(const std::filesystem::path& path, const KernelMatrix& k) {
    std::ofstream out(path);
    if (!out) throw io_error("save_gram_csv: cannot open " + path.string());
    out << "# kind=" << to_string(k.kind);
    if (k.shots) out << " shots=" << *k.shots;
    if (k.seed) out << " seed=" << *k.seed;
    out << " symmetric=" << (k.symmetric ? 1 : 0) << " rows=" << k.values.rows()
        << " cols=" << k.values.cols() << "\n";
    char buf[40];
    for (std::size_t i = 0; i < k.values.rows(); ++i) {
        for (std::size_t j = 0; j < k.values.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", k.values(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << "\n";
    }
    out.flush();
    if (!out) throw io_error("save_gram_csv: write failed for " + path.string());
}

KernelMatrix load_gram_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_gram_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw io_error("load_gram_csv: empty file " + path.string());

    KernelMatrix k;
    std::size_t expect_rows = 0;
    std::size_t expect_cols = 0;
    bool have_dims = false;
    std::size_t lineno = 0;
    if (!line.empty() && line.front() == '#') {
        lineno = 1;
        std::istringstream header(line.substr(1));
        std::string token;
        while (header >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = token.substr(0, eq);
            const std::string value = token.substr(eq + 1);
            if (key == "kind") k.kind = kernel_kind_from_string(value);
            else if (key == "shots") k.shots = std::stoi(value);
            else if (key == "seed") k.seed = std::stoull(value);
            else if (key == "symmetric") k.symmetric = value == "1";
            else if (key == "rows") { expect_rows = std::stoull(value); have_dims = true; }
            else if (key == "cols") { expect_cols = std::stoull(value); have_dims = true; }
        }
        line.clear();
        if (!std::getline(in, line) && expect_rows > 0)
            throw io_error("load_gram_csv: missing data rows in " + path.string());
    }

    std::vector<std::vector<double>> rows;
    do {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.c_str();
        while (true) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p)
                throw io_error("load_gram_csv: " + path.string() + ":" +
                                         std::to_string(lineno) + ": bad number");
            row.push_back(v);
            p = end;
            while (*p == ' ') ++p;
            if (*p == ',') { ++p; continue; }
            if (*p == '\0' || *p == '\r') break;
            throw io_error("load_gram_csv: " + path.string() + ":" +
                                     std::to_string(lineno) + ": unexpected character");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw io_error("load_gram_csv: " + path.string() + ":" +
                                     std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    } while (std::getline(in, line));

    if (rows.empty()) throw io_error("load_gram_csv: no data in " + path.string());
    if (have_dims && (rows.size() != expect_rows || rows.front().size() != expect_cols))
        throw io_error("load_gram_csv: header dimensions do not match data in " +
                                 path.string());
    Mat m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    k.values = std::move(m);
    return k;
}

}  // namespace ks::kernels
