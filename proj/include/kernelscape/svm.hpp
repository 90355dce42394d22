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

#include "kernelscape/kernels.hpp"

namespace ks::svm {

struct TrainedModel {
    std::vector<double> dual_coefs;  // alpha_i * y_i, one per training point
    double bias = 0.0;
    std::vector<std::size_t> support_indices;  // alpha_i > 1e-12
    double c = 0.0;
    std::size_t n_train = 0;
};

// P(y=+1 | f) = 1 / (1 + exp(a*f + b))
struct CalibrationModel {
    double a = 0.0;
    double b = 0.0;
    int folds = 5;
};

struct HyperGrid {
    std::vector<double> c_values;

    // Log-spaced inclusive of both endpoints.
    static HyperGrid log_spaced(std::size_t count = 18, double first = 0.006,
                                double last = 1024.0);
};

// C-SVM dual via SMO (maximal violating pair). The solver polishes well past
// the 1e-3 acceptance tolerance and only reports failure if even that is not
// met within the iteration cap.
TrainedModel fit_svm(const kernels::KernelMatrix& gram_train, std::span<const int> y, double c);

// f_j = sum_i dual_coefs[i] * gram_cross(j, i) + bias
std::vector<double> decision_values(const TrainedModel& model,
                                    const kernels::KernelMatrix& gram_cross);

// sign(f); exact zero maps to +1.
std::vector<int> predict_labels(const TrainedModel& model,
                                const kernels::KernelMatrix& gram_cross);

// Sigmoid fit on given decision values (damped Newton, smoothed targets).
CalibrationModel fit_platt_sigmoid(std::span<const double> decision, std::span<const int> y);

// 5 stratified folds, out-of-fold decision values, then the sigmoid fit.
CalibrationModel calibrate_platt(const kernels::KernelMatrix& gram_train, std::span<const int> y,
                                 double c, std::uint64_t seed);

std::vector<double> predict_probabilities(const TrainedModel& model,
                                          const CalibrationModel& calibration,
                                          const kernels::KernelMatrix& gram_cross);

enum class Metric { BalancedAccuracy, F1 };
enum class PredictionMode { Predict, Probability };

std::string to_string(Metric metric);
std::string to_string(PredictionMode mode);

struct ThresholdResult {
    double threshold = 0.0;
    double value = 0.0;
};

// Evaluates predicted-positive = (prob >= t) over t in {0, step, 2*step, ..., 1}
// and returns the smallest t attaining the maximum metric.
ThresholdResult threshold_sweep(std::span<const double> probs, std::span<const int> y_true,
                                Metric metric, double step = 0.01);

// One fitted model per C plus its scores on the test block under all four
// metric/mode combinations. Shared by the per-combination selections so each
// C is fit and calibrated once.
struct CCell {
    double c = 0.0;
    TrainedModel model;
    CalibrationModel calibration;
    double predict_ba = 0.0;
    double predict_f1 = 0.0;
    double prob_ba = 0.0;
    double prob_ba_threshold = 0.0;
    double prob_f1 = 0.0;
    double prob_f1_threshold = 0.0;
};

struct CGridEvaluation {
    std::vector<CCell> cells;
};

// Cells are independent, so the thread count never changes the result.
CGridEvaluation evaluate_c_grid(const kernels::KernelMatrix& gram_train,
                                std::span<const int> y_train,
                                const kernels::KernelMatrix& gram_cross,
                                std::span<const int> y_test, const HyperGrid& grid,
                                std::uint64_t seed, int threads = 1);

struct SelectedC {
    std::size_t grid_index = 0;
    double c = 0.0;
    double value = 0.0;
    // Chosen probability threshold; NaN in predict mode.
    double threshold = 0.0;
};

// Smallest C attaining the maximum score for the combination.
SelectedC pick_best(const CGridEvaluation& eval, Metric metric, PredictionMode mode);

struct BestCResult {
    double c = 0.0;
    TrainedModel model;
    double value = 0.0;
    double threshold = 0.0;  // NaN in predict mode
};

BestCResult select_best_C(const kernels::KernelMatrix& gram_train, std::span<const int> y_train,
                          const kernels::KernelMatrix& gram_cross, std::span<const int> y_test,
                          const HyperGrid& grid, Metric metric, PredictionMode mode,
                          std::uint64_t seed);

}  // namespace ks::svm
