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

#include <cmath>
#include <filesystem>
#include <numbers>

#include <Eigen/Dense>
#include <doctest.h>

#include "kernelscape/errors.hpp"
#include "kernelscape/jacobi.hpp"
#include "kernelscape/kernels.hpp"
#include "kernelscape/rng.hpp"

namespace {

using ks::Mat;
using ks::kernels::KernelMatrix;

Mat random_points(ks::Rng& rng, std::size_t n, std::size_t dim, double scale) {
    Mat x(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) x(i, d) = rng.next_uniform() * scale;
    return x;
}

Eigen::MatrixXd to_eigen(const Mat& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return out;
}

double min_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(to_eigen(m));
    return eig.eigenvalues().minCoeff();
}

void check_bitwise_equal(const Mat& a, const Mat& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) REQUIRE(a(i, j) == b(i, j));
}

Mat random_symmetric(ks::Rng& rng, std::size_t n) {
    Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = rng.next_normal();
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return a;
}

}  // namespace

TEST_CASE("RBF gram matches the closed form") {
    ks::Rng rng(501);
    const Mat x = random_points(rng, 8, 3, std::numbers::pi);
    const Mat z = random_points(rng, 5, 3, std::numbers::pi);
    const double gamma = 0.37;
    const KernelMatrix k = ks::kernels::rbf_gram(z, x, gamma);
    REQUIRE(k.values.rows() == 5);
    REQUIRE(k.values.cols() == 8);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < 3; ++d) {
                const double diff = z(i, d) - x(j, d);
                d2 += diff * diff;
            }
            CHECK(k.values(i, j) == doctest::Approx(std::exp(-gamma * d2)).epsilon(1e-14));
        }
    }
}

TEST_CASE("symmetric RBF gram has unit diagonal and exact symmetry") {
    ks::Rng rng(502);
    const Mat x = random_points(rng, 12, 4, std::numbers::pi);
    const KernelMatrix k = ks::kernels::rbf_gram_sym(x, 0.25);
    CHECK(k.symmetric);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(k.values(i, i) == 1.0);
        for (std::size_t j = 0; j < 12; ++j) CHECK(k.values(i, j) == k.values(j, i));
    }
}

TEST_CASE("parallel grams match the serial reference bit for bit") {
    ks::Rng rng(503);
    const Mat x = random_points(rng, 10, 3, std::numbers::pi);
    const Mat z = random_points(rng, 7, 3, std::numbers::pi);
    ks::qsim::FeatureMapSpec spec;
    spec.num_qubits = 3;

    SUBCASE("rbf") {
        check_bitwise_equal(ks::kernels::rbf_gram(z, x, 0.4, 4).values,
                            ks::kernels::serial::rbf_gram(z, x, 0.4).values);
        check_bitwise_equal(ks::kernels::rbf_gram_sym(x, 0.4, 4).values,
                            ks::kernels::serial::rbf_gram_sym(x, 0.4).values);
    }
    SUBCASE("quantum exact") {
        ks::kernels::QuantumGramOptions opts;
        opts.mode = ks::kernels::QuantumMode::Exact;
        opts.threads = 4;
        check_bitwise_equal(ks::kernels::quantum_gram(spec, z, x, opts).values,
                            ks::kernels::serial::quantum_gram(spec, z, x, opts).values);
        check_bitwise_equal(ks::kernels::quantum_gram_sym(spec, x, opts).values,
                            ks::kernels::serial::quantum_gram_sym(spec, x, opts).values);
    }
    SUBCASE("quantum sampled") {
        ks::kernels::QuantumGramOptions opts;
        opts.mode = ks::kernels::QuantumMode::Sampled;
        opts.shots = 256;
        opts.seed = 77;
        opts.threads = 4;
        check_bitwise_equal(ks::kernels::quantum_gram(spec, z, x, opts).values,
                            ks::kernels::serial::quantum_gram(spec, z, x, opts).values);
        check_bitwise_equal(ks::kernels::quantum_gram_sym(spec, x, opts).values,
                            ks::kernels::serial::quantum_gram_sym(spec, x, opts).values);
    }
}

TEST_CASE("quantum gram entries equal pairwise fidelities") {
    ks::Rng rng(504);
    const Mat x = random_points(rng, 6, 2, std::numbers::pi);
    ks::qsim::FeatureMapSpec spec;
    spec.num_qubits = 2;
    ks::kernels::QuantumGramOptions opts;
    opts.mode = ks::kernels::QuantumMode::Exact;
    const KernelMatrix k = ks::kernels::quantum_gram_sym(spec, x, opts);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(k.values(i, i) == 1.0);
        for (std::size_t j = 0; j < 6; ++j) {
            if (i == j) continue;
            const double f = ks::qsim::fidelity_exact(
                spec, std::span<const double>(x.row(i)), std::span<const double>(x.row(j)));
            CHECK(k.values(i, j) == f);
        }
    }
}

TEST_CASE("sampled gram entry seeds depend only on the index pair") {
    ks::Rng rng(505);
    const Mat x = random_points(rng, 5, 2, std::numbers::pi);
    ks::qsim::FeatureMapSpec spec;
    spec.num_qubits = 2;
    ks::kernels::QuantumGramOptions opts;
    opts.mode = ks::kernels::QuantumMode::Sampled;
    opts.shots = 512;
    opts.seed = 9;
    const KernelMatrix k = ks::kernels::quantum_gram_sym(spec, x, opts);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) {
            const double p = ks::qsim::fidelity_exact(
                spec, std::span<const double>(x.row(i)), std::span<const double>(x.row(j)));
            const double expected = ks::qsim::sample_fidelity(
                p, 512, ks::derive_seed(opts.seed, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j)));
            CHECK(k.values(i, j) == expected);
            CHECK(k.values(j, i) == expected);
        }
    }
}

TEST_CASE("a tiny cache budget reproduces the fully cached gram") {
    ks::Rng rng(506);
    const Mat x = random_points(rng, 9, 3, std::numbers::pi);
    const Mat z = random_points(rng, 4, 3, std::numbers::pi);
    ks::qsim::FeatureMapSpec spec;
    spec.num_qubits = 3;
    ks::kernels::QuantumGramOptions big;
    big.mode = ks::kernels::QuantumMode::Exact;
    ks::kernels::QuantumGramOptions tiny = big;
    tiny.cache_budget_bytes = 1;  // forces the blocked recompute path
    check_bitwise_equal(ks::kernels::quantum_gram_sym(spec, x, big).values,
                        ks::kernels::quantum_gram_sym(spec, x, tiny).values);
    check_bitwise_equal(ks::kernels::quantum_gram(spec, z, x, big).values,
                        ks::kernels::quantum_gram(spec, z, x, tiny).values);
}

TEST_CASE("normalize_trace scales the trace to n") {
    ks::Rng rng(507);
    const Mat x = random_points(rng, 6, 2, std::numbers::pi);
    KernelMatrix k = ks::kernels::rbf_gram_sym(x, 0.8);
    for (std::size_t i = 0; i < 6; ++i) k.values(i, i) = 0.5;  // perturb the trace
    const KernelMatrix n = ks::kernels::normalize_trace(k);
    double trace = 0.0;
    for (std::size_t i = 0; i < 6; ++i) trace += n.values(i, i);
    CHECK(trace == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("psd_floor") {
    SUBCASE("returns an already-PSD matrix unchanged") {
        ks::Rng rng(508);
        const Mat x = random_points(rng, 10, 3, std::numbers::pi);
        const KernelMatrix k = ks::kernels::rbf_gram_sym(x, 0.5);
        const KernelMatrix floored = ks::kernels::psd_floor(k);
        check_bitwise_equal(k.values, floored.values);
    }
    SUBCASE("clips negative eigenvalues") {
        // Indefinite symmetric matrix with an eigenvalue at -1.
        Mat a(2, 2);
        a(0, 0) = 0.0;
        a(0, 1) = 1.0;
        a(1, 0) = 1.0;
        a(1, 1) = 0.0;
        KernelMatrix k;
        k.values = a;
        k.symmetric = true;
        const KernelMatrix floored = ks::kernels::psd_floor(k);
        CHECK(min_eigenvalue(floored.values) >= -1e-10);
        // The positive eigenpair (eigenvector (1,1)/sqrt(2), value 1) survives.
        CHECK(floored.values(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(floored.values(0, 1) == doctest::Approx(0.5).epsilon(1e-10));
    }
}

TEST_CASE("geometric difference identities") {
    ks::Rng rng(509);
    SUBCASE("g(K, K) = 1 at lambda 0") {
        for (int t = 0; t < 10; ++t) {
            const std::size_t n = 3 + static_cast<std::size_t>(rng.next_below(6));
            const Mat x = random_points(rng, n, 3, std::numbers::pi);
            const KernelMatrix k = ks::kernels::rbf_gram_sym(x, 0.5);
            const auto res = ks::kernels::geometric_difference(k, k, 0.0);
            CHECK(std::abs(res.g - 1.0) < 1e-8);
        }
    }
    SUBCASE("diagonal case") {
        KernelMatrix kc;
        kc.values = Mat(2, 2);
        kc.values(0, 0) = 1.0;
        kc.values(1, 1) = 1.0;
        kc.symmetric = true;
        KernelMatrix kq;
        kq.values = Mat(2, 2);
        kq.values(0, 0) = 1.5;
        kq.values(1, 1) = 0.5;
        kq.symmetric = true;
        const auto res = ks::kernels::geometric_difference(kc, kq, 0.0);
        CHECK(res.g == doctest::Approx(std::sqrt(1.5)).epsilon(1e-8));
    }
    SUBCASE("trace normalization is internal") {
        KernelMatrix kc;
        kc.values = Mat(2, 2);
        kc.values(0, 0) = 7.0;
        kc.values(1, 1) = 7.0;  // scaled identity normalizes back to identity
        kc.symmetric = true;
        KernelMatrix kq;
        kq.values = Mat(2, 2);
        kq.values(0, 0) = 3.0;
        kq.values(1, 1) = 1.0;  // normalizes to diag(1.5, 0.5)
        kq.symmetric = true;
        const auto res = ks::kernels::geometric_difference(kc, kq, 0.0);
        CHECK(res.g == doctest::Approx(std::sqrt(1.5)).epsilon(1e-8));
    }
    SUBCASE("nonincreasing in lambda") {
        const std::size_t n = 8;
        const Mat x = random_points(rng, n, 3, std::numbers::pi);
        const KernelMatrix kc = ks::kernels::rbf_gram_sym(x, 0.7);
        ks::qsim::FeatureMapSpec spec;
        spec.num_qubits = 3;
        ks::kernels::QuantumGramOptions opts;
        opts.mode = ks::kernels::QuantumMode::Exact;
        const KernelMatrix kq = ks::kernels::quantum_gram_sym(spec, x, opts);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 10; ++k) {
            const double lambda = std::pow(10.0, -6.0 + k);
            const double g = ks::kernels::geometric_difference(kc, kq, lambda).g;
            CHECK(g <= prev + 1e-9);
            prev = g;
        }
    }
    SUBCASE("sandwich variant never exceeds plain on shared eigenbases") {
        KernelMatrix kc;
        kc.values = Mat(2, 2);
        kc.values(0, 0) = 1.2;
        kc.values(1, 1) = 0.8;
        kc.symmetric = true;
        KernelMatrix kq;
        kq.values = Mat(2, 2);
        kq.values(0, 0) = 0.5;
        kq.values(1, 1) = 1.5;
        kq.symmetric = true;
        for (const double lambda : {1e-6, 1e-3, 0.1, 1.0}) {
            const double plain =
                ks::kernels::geometric_difference(kc, kq, lambda,
                                                  ks::kernels::GeoDiffVariant::Plain)
                    .g;
            const double sandwich =
                ks::kernels::geometric_difference(kc, kq, lambda,
                                                  ks::kernels::GeoDiffVariant::Sandwich)
                    .g;
            CHECK(sandwich <= plain + 1e-12);
        }
    }
    SUBCASE("singular classical kernel at lambda 0 is a domain error") {
        KernelMatrix kc;
        kc.values = Mat(2, 2);
        kc.values(0, 0) = 2.0;  // rank 1 after normalization
        kc.symmetric = true;
        KernelMatrix kq;
        kq.values = Mat(2, 2);
        kq.values(0, 0) = 1.0;
        kq.values(1, 1) = 1.0;
        kq.symmetric = true;
        CHECK_THROWS_AS(ks::kernels::geometric_difference(kc, kq, 0.0), std::domain_error);
    }
}

TEST_CASE("gram CSV round-trips bitwise") {
    ks::Rng rng(510);
    const Mat x = random_points(rng, 6, 2, std::numbers::pi);
    ks::qsim::FeatureMapSpec spec;
    spec.num_qubits = 2;
    ks::kernels::QuantumGramOptions opts;
    opts.mode = ks::kernels::QuantumMode::Sampled;
    opts.shots = 128;
    opts.seed = 21;
    const KernelMatrix k = ks::kernels::quantum_gram_sym(spec, x, opts);
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "ks_test_gram_roundtrip.csv";
    ks::kernels::save_gram_csv(path, k);
    const KernelMatrix back = ks::kernels::load_gram_csv(path);
    check_bitwise_equal(k.values, back.values);
    CHECK(back.kind == k.kind);
    CHECK(back.shots == k.shots);
    CHECK(back.seed == k.seed);
    CHECK(back.symmetric == k.symmetric);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(ks::kernels::load_gram_csv(path), ks::io_error);
}

TEST_CASE("jacobi eigensolver agrees with a dense reference") {
    ks::Rng rng(511);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.next_below(9));
        const Mat a = random_symmetric(rng, n);
        const ks::linalg::EigenDecomposition dec = ks::linalg::jacobi_eigensymmetric(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(a));
        REQUIRE(dec.eigenvalues.size() == n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(dec.eigenvalues[i] ==
                  doctest::Approx(ref.eigenvalues()(static_cast<Eigen::Index>(i)))
                      .epsilon(1e-9));
        const Mat rebuilt = ks::linalg::reconstruct(dec, dec.eigenvalues);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(rebuilt(i, j) == doctest::Approx(a(i, j)).epsilon(1e-9));
        const double want_norm =
            std::max(std::abs(ref.eigenvalues()(0)),
                     std::abs(ref.eigenvalues()(static_cast<Eigen::Index>(n - 1))));
        CHECK(ks::linalg::spectral_norm_sym(a) == doctest::Approx(want_norm).epsilon(1e-9));
    }
}
