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

#include <span>
#include <vector>

#include "kernelscape/matrix.hpp"

namespace ks::linalg {

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // ascending
    Mat eigenvectors;                 // column k pairs with eigenvalues[k]
};

// Cyclic Jacobi for symmetric matrices. Single-threaded; adequate for the
// n <= 300 kernel matrices this project produces. Converges when the
// off-diagonal Frobenius norm falls below tol times the matrix norm.
EigenDecomposition jacobi_eigensymmetric(const Mat& a, double tol = 1e-12, int max_sweeps = 100);

// Rebuilds V * diag(values) * V^T. The result is symmetric bit-for-bit.
Mat reconstruct(const EigenDecomposition& eig, std::span<const double> values);

double spectral_norm_sym(const Mat& a);

bool is_symmetric(const Mat& a, double tol = 0.0);

}  // namespace ks::linalg
