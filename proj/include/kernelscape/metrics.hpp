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
#include <span>
#include <vector>

#include "kernelscape/matrix.hpp"

namespace ks::metrics {

// Positive class is +1 throughout.
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

// (TPR + TNR) / 2; requires both classes present in y_true.
double balanced_accuracy(const ConfusionMatrix& cm);

// 2*tp / (2*tp + fp + fn); 0 when the denominator is 0.
double f1_score(const ConfusionMatrix& cm);

// Metric values over the configuration space: rows follow feature counts,
// columns follow training-set sizes.
struct LandscapeGrid {
    Mat values;
    std::vector<int> feature_counts;  // one per row
    std::vector<int> train_sizes;     // one per column
};

struct TerrainResult {
    Mat local;
    double global = 0.0;
};

// Root of the summed squared differences against the 8 neighbors;
// out-of-bounds neighbors count as 0.
double ptri_local(const LandscapeGrid& grid, std::size_t i, std::size_t j);

// Local value for every cell (boundary cells included, zero-padded), global
// mean over all cells.
TerrainResult ptri_global(const LandscapeGrid& grid);

struct EqaSummary {
    Mat delta;  // quantum minus classical, cellwise
    double fraction_positive = 0.0;  // share of cells with delta strictly > 0
    std::vector<int> feature_counts;
    std::vector<int> train_sizes;
    // series[j][i] = delta for train size j, feature count i; one series per
    // train size.
    std::vector<std::vector<double>> series;
};

EqaSummary eqa_summary(const LandscapeGrid& quantum, const LandscapeGrid& classical);

}  // namespace ks::metrics
