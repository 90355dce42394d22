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

#include "kernelscape/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ks::linalg {

namespace {

double off_diagonal_norm(const Mat& a) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t q = 0; q < a.cols(); ++q)
            if (p != q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
}

double frobenius_norm(const Mat& a) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t q = 0; q < a.cols(); ++q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
}

}  // namespace

bool is_symmetric(const Mat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > tol) return false;
    return true;
}

EigenDecomposition jacobi_eigensymmetric(const Mat& a, double tol, int max_sweeps) {
    if (a.rows() != a.cols()) throw std::invalid_argument("jacobi: matrix not square");
    const std::size_t n = a.rows();
    Mat work = a;
    Mat vec = Mat::identity(n);

    const double scale = frobenius_norm(work);
    if (scale > 0.0) {
        const double threshold = tol * scale;
        int sweep = 0;
        while (off_diagonal_norm(work) > threshold) {
            if (++sweep > max_sweeps) throw std::runtime_error("jacobi: did not converge");
            for (std::size_t p = 0; p + 1 < n; ++p) {
                for (std::size_t q = p + 1; q < n; ++q) {
                    const double apq = work(p, q);
                    if (apq == 0.0) continue;
                    const double tau = (work(q, q) - work(p, p)) / (2.0 * apq);
                    const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                     (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                    const double c = 1.0 / std::sqrt(1.0 + t * t);
                    const double s = t * c;

                    work(p, p) -= t * apq;
                    work(q, q) += t * apq;
                    work(p, q) = 0.0;
                    work(q, p) = 0.0;
                    for (std::size_t r = 0; r < n; ++r) {
                        if (r != p && r != q) {
                            const double arp = work(r, p);
                            const double arq = work(r, q);
                            work(r, p) = c * arp - s * arq;
                            work(p, r) = work(r, p);
                            work(r, q) = s * arp + c * arq;
                            work(q, r) = work(r, q);
                        }
                        const double vrp = vec(r, p);
                        const double vrq = vec(r, q);
                        vec(r, p) = c * vrp - s * vrq;
                        vec(r, q) = s * vrp + c * vrq;
                    }
                }
            }
        }
    }

    // Sort ascending; ties keep the cyclic order so output is deterministic.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return work(i, i) < work(j, j); });

    EigenDecomposition eig;
    eig.eigenvalues.resize(n);
    eig.eigenvectors = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        eig.eigenvalues[k] = work(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) eig.eigenvectors(r, k) = vec(r, order[k]);
    }
    return eig;
}

Mat reconstruct(const EigenDecomposition& eig, std::span<const double> values) {
    const std::size_t n = eig.eigenvalues.size();
    if (values.size() != n) throw std::invalid_argument("reconstruct: eigenvalue count mismatch");
    const Mat& v = eig.eigenvectors;
    Mat out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += values[k] * v(i, k) * v(j, k);
            out(i, j) = s;
            out(j, i) = s;
        }
    }
    return out;
}

double spectral_norm_sym(const Mat& a) {
    const EigenDecomposition eig = jacobi_eigensymmetric(a);
    double m = 0.0;
    for (double lambda : eig.eigenvalues) m = std::max(m, std::abs(lambda));
    return m;
}

}  // namespace ks::linalg
