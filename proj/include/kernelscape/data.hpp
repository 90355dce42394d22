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
#include <span>
#include <string>
#include <vector>

#include "kernelscape/matrix.hpp"

namespace ks::data {

enum class Provenance { Synthetic, Csv };

// Missing entries hold NaN and are flagged in the mask; statistics skip them.
struct Dataset {
    Mat features;
    std::vector<std::uint8_t> missing_mask;  // row-major n x D
    std::vector<int> labels;                 // +1 / -1
    std::vector<std::string> feature_names;
    Provenance provenance = Provenance::Synthetic;

    std::size_t n() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    bool missing(std::size_t i, std::size_t d) const {
        return missing_mask[i * features.cols() + d] != 0;
    }
};

void validate(const Dataset& dataset);

// Two-Gaussian classes; per-feature class separation decays geometrically with
// feature rank. Label counts are exact: round(n * class_prior) positives.
// Features at index >= missing_from go missing independently at missing_rate.
Dataset generate_synthetic(std::size_t n, std::size_t dim, double class_prior,
                           std::size_t missing_from, double missing_rate, double difficulty,
                           std::uint64_t seed);

// Header row with feature names plus a `label` column ({-1,1} or {0,1}; 0 maps
// to -1). Empty feature cells are missing values.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const std::filesystem::path& path, const Dataset& dataset);

Dataset restrict_features(const Dataset& dataset, std::span<const std::size_t> feature_idx);

struct PreprocessModel {
    std::vector<double> means;  // imputation values, train rows only
    std::vector<double> mins;   // scaling bounds, train rows only
    std::vector<double> maxs;
};

// Train statistics only; missing entries imputed with the train mean, then
// min-max scaled to [0, pi]. Constant columns scale to 0.
PreprocessModel fit_preprocess(const Dataset& dataset, std::span<const std::size_t> train_indices);

// Imputes, scales, and clamps the given rows into [0, pi].
Mat apply_preprocess(const PreprocessModel& model, const Dataset& dataset,
                     std::span<const std::size_t> rows);

struct FeatureRanking {
    std::vector<std::size_t> order;  // permutation of 0..D-1, best first
    std::vector<double> scores;      // aligned with order, nonincreasing
};

struct ProbeConfig {
    double c = 1.0;
    double gamma = 0.0;  // 0 selects 1/D
    double holdout_fraction = 0.3;
};

// Permutation importance of an RBF-SVM probe: mean balanced-accuracy drop on a
// holdout block over `repetitions` shuffles per feature column.
FeatureRanking rank_features(const Dataset& dataset, const ProbeConfig& probe,
                             std::size_t repetitions, std::uint64_t seed);

struct SplitCoordinate {
    int feature_count = 0;
    int train_size = 0;
};

struct Subpoint {
    SplitCoordinate coordinate;
    std::vector<std::size_t> train_indices;  // ascending
    std::vector<std::size_t> test_indices;   // ascending
    std::uint64_t seed = 0;
};

// Disjoint per-class sampling without replacement; class proportions follow
// the dataset prior to within rounding.
Subpoint stratified_split(const Dataset& dataset, std::size_t n_train, std::size_t n_test,
                          std::uint64_t seed);

// Indices of the k candidates whose scores sit closest to the mean score;
// ties broken by ascending candidate index. Result ordered by closeness.
std::vector<std::size_t> select_representative_indices(std::span<const double> scores,
                                                       std::size_t k);

std::vector<Subpoint> select_representative(const std::vector<Subpoint>& candidates,
                                            std::span<const double> scores, std::size_t k);

}  // namespace ks::data
