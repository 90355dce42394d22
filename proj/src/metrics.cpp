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

#include "kernelscape/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ks::metrics {
namespace {

void check_grid(const LandscapeGrid& grid, const char* who) {
    if (grid.values.rows() == 0 || grid.values.cols() == 0)
        throw std::invalid_argument(std::string(who) + ": empty grid");
    if (!grid.feature_counts.empty() && grid.feature_counts.size() != grid.values.rows())
        throw std::invalid_argument(std::string(who) + ": row labels do not match grid");
    if (!grid.train_sizes.empty() && grid.train_sizes.size() != grid.values.cols())
        throw std::invalid_argument(std::string(who) + ": column labels do not match grid");
    for (std::size_t i = 0; i < grid.values.rows(); ++i)
        for (std::size_t j = 0; j < grid.values.cols(); ++j)
            if (!std::isfinite(grid.values(i, j)))
                throw std::invalid_argument(std::string(who) + ": non-finite grid entry");
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("confusion: label vectors differ in length");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if ((y_true[i] != 1 && y_true[i] != -1) || (y_pred[i] != 1 && y_pred[i] != -1))
            throw std::invalid_argument("confusion: labels must be +1 or -1");
        if (y_true[i] == 1)
            (y_pred[i] == 1 ? cm.tp : cm.fn)++;
        else
            (y_pred[i] == -1 ? cm.tn : cm.fp)++;
    }
    return cm;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    const std::int64_t pos = cm.tp + cm.fn;
    const std::int64_t neg = cm.tn + cm.fp;
    if (pos <= 0 || neg <= 0)
        throw std::invalid_argument("balanced_accuracy: both classes must be present");
    const double tpr = static_cast<double>(cm.tp) / static_cast<double>(pos);
    const double tnr = static_cast<double>(cm.tn) / static_cast<double>(neg);
    return 0.5 * (tpr + tnr);
}

double f1_score(const ConfusionMatrix& cm) {
    const std::int64_t denom = 2 * cm.tp + cm.fp + cm.fn;
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(cm.tp) / static_cast<double>(denom);
}

double ptri_local(const LandscapeGrid& grid, std::size_t i, std::size_t j) {
    check_grid(grid, "ptri_local");
    if (i >= grid.values.rows() || j >= grid.values.cols())
        throw std::out_of_range("ptri_local: cell index out of range");
    const double v = grid.values(i, j);
    double sum = 0.0;
    for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            const std::int64_t ni = static_cast<std::int64_t>(i) + di;
            const std::int64_t nj = static_cast<std::int64_t>(j) + dj;
            const bool inside = ni >= 0 && nj >= 0 &&
                                ni < static_cast<std::int64_t>(grid.values.rows()) &&
                                nj < static_cast<std::int64_t>(grid.values.cols());
            const double neighbor =
                inside ? grid.values(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj))
                       : 0.0;
            const double d = v - neighbor;
            sum += d * d;
        }
    }
    return std::sqrt(sum);
}

TerrainResult ptri_global(const LandscapeGrid& grid) {
    check_grid(grid, "ptri_global");
    TerrainResult result;
    result.local = Mat(grid.values.rows(), grid.values.cols());
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.values.rows(); ++i) {
        for (std::size_t j = 0; j < grid.values.cols(); ++j) {
            const double v = ptri_local(grid, i, j);
            result.local(i, j) = v;
            sum += v;
        }
    }
    result.global = sum / static_cast<double>(grid.values.rows() * grid.values.cols());
    return result;
}

EqaSummary eqa_summary(const LandscapeGrid& quantum, const LandscapeGrid& classical) {
    check_grid(quantum, "eqa_summary");
    check_grid(classical, "eqa_summary");
    if (quantum.values.rows() != classical.values.rows() ||
        quantum.values.cols() != classical.values.cols())
        throw std::invalid_argument("eqa_summary: grid dimensions differ");

    EqaSummary out;
    const std::size_t rows = quantum.values.rows();
    const std::size_t cols = quantum.values.cols();
    out.delta = Mat(rows, cols);
    out.feature_counts = quantum.feature_counts;
    out.train_sizes = quantum.train_sizes;
    std::size_t positive = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double d = quantum.values(i, j) - classical.values(i, j);
            out.delta(i, j) = d;
            if (d > 0.0) ++positive;
        }
    }
    out.fraction_positive = static_cast<double>(positive) / static_cast<double>(rows * cols);
    out.series.resize(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        out.series[j].resize(rows);
        for (std::size_t i = 0; i < rows; ++i) out.series[j][i] = out.delta(i, j);
    }
    return out;
}

}  // namespace ks::metrics
