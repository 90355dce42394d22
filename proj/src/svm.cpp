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

#include "kernelscape/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kernelscape/metrics.hpp"
#include "kernelscape/rng.hpp"

namespace ks::svm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Accepted KKT violation; the solver polishes far below this before stopping.
constexpr double kGapContract = 1e-3;
constexpr double kGapPolish = 1e-9;
constexpr double kSupportEps = 1e-12;

void check_labels(std::span<const int> y, const char* who) {
    bool pos = false;
    bool neg = false;
    for (int v : y) {
        if (v == 1) pos = true;
        else if (v == -1) neg = true;
        else throw std::invalid_argument(std::string(who) + ": labels must be +1 or -1");
    }
    if (!pos || !neg)
        throw std::invalid_argument(std::string(who) + ": both classes must be present");
}

// Symmetric principal submatrix, metadata carried over.
kernels::KernelMatrix subset_sym(const kernels::KernelMatrix& k,
                                 std::span<const std::size_t> idx) {
    kernels::KernelMatrix out;
    out.kind = k.kind;
    out.shots = k.shots;
    out.seed = k.seed;
    out.symmetric = true;
    out.values = Mat(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b)
            out.values(a, b) = k.values(idx[a], idx[b]);
    return out;
}

kernels::KernelMatrix subset_cross(const kernels::KernelMatrix& k,
                                   std::span<const std::size_t> row_idx,
                                   std::span<const std::size_t> col_idx) {
    kernels::KernelMatrix out;
    out.kind = k.kind;
    out.shots = k.shots;
    out.seed = k.seed;
    out.symmetric = false;
    out.values = Mat(row_idx.size(), col_idx.size());
    for (std::size_t a = 0; a < row_idx.size(); ++a)
        for (std::size_t b = 0; b < col_idx.size(); ++b)
            out.values(a, b) = k.values(row_idx[a], col_idx[b]);
    return out;
}

double sigmoid_prob(double f, const CalibrationModel& cal) {
    const double fab = f * cal.a + cal.b;
    if (fab >= 0.0) {
        const double e = std::exp(-fab);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(fab));
}

}  // namespace

HyperGrid HyperGrid::log_spaced(std::size_t count, double first, double last) {
    if (count < 2) throw std::invalid_argument("HyperGrid: need at least two values");
    if (!(first > 0.0) || !(last > first))
        throw std::invalid_argument("HyperGrid: need 0 < first < last");
    HyperGrid grid;
    grid.c_values.resize(count);
    const double l0 = std::log(first);
    const double l1 = std::log(last);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(count - 1);
        grid.c_values[k] = std::exp(l0 + t * (l1 - l0));
    }
    grid.c_values.front() = first;
    grid.c_values.back() = last;
    return grid;
}

TrainedModel fit_svm(const kernels::KernelMatrix& gram_train, std::span<const int> y, double c) {
    const std::size_t n = y.size();
    if (gram_train.values.rows() != n || gram_train.values.cols() != n)
        throw std::invalid_argument("fit_svm: gram must be n x n for n labels");
    if (n == 0) throw std::invalid_argument("fit_svm: empty training set");
    if (!(c > 0.0)) throw std::invalid_argument("fit_svm: C must be positive");
    check_labels(y, "fit_svm");

    const Mat& k = gram_train.values;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // G_i = (Q alpha)_i - 1, alpha = 0

    const auto q = [&](std::size_t i, std::size_t j) {
        return static_cast<double>(y[i] * y[j]) * k(i, j);
    };

    const std::size_t max_iter = 10'000 * n;
    double gap = kInf;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // Maximal violating pair: i maximizes -y G over I_up, j minimizes it
        // over I_low. First index wins ties, so selection is deterministic.
        std::size_t ii = n;
        std::size_t jj = n;
        double up_best = -kInf;
        double low_best = kInf;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            const bool in_up = (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
            const bool in_low = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c);
            if (in_up && v > up_best) {
                up_best = v;
                ii = t;
            }
            if (in_low && v < low_best) {
                low_best = v;
                jj = t;
            }
        }
        gap = up_best - low_best;
        if (!(gap > kGapPolish)) break;

        const std::size_t i = ii;
        const std::size_t j = jj;
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        double quad = q(i, i) + q(j, j) - 2.0 * static_cast<double>(y[i] * y[j]) * q(i, j);
        if (quad <= 0.0) quad = 1e-12;

        if (y[i] != y[j]) {
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        if (dai == 0.0 && daj == 0.0) break;  // stalled at rounding limit
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += q(t, i) * dai + q(t, j) * daj;
    }
    if (gap > kGapContract)
        throw std::runtime_error("fit_svm: SMO did not converge within the iteration cap");

    // bias from free support vectors; bound midpoint fallback.
    double upper = kInf;
    double lower = -kInf;
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = static_cast<double>(y[t]) * grad[t];
        if (alpha[t] >= c) {
            if (y[t] == -1) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free)
                                  : 0.5 * (upper + lower);

    TrainedModel model;
    model.dual_coefs.resize(n);
    for (std::size_t t = 0; t < n; ++t)
        model.dual_coefs[t] = alpha[t] * static_cast<double>(y[t]);
    model.bias = -rho;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > kSupportEps) model.support_indices.push_back(t);
    model.c = c;
    model.n_train = n;
    return model;
}

std::vector<double> decision_values(const TrainedModel& model,
                                    const kernels::KernelMatrix& gram_cross) {
    if (gram_cross.values.cols() != model.n_train)
        throw std::invalid_argument("decision_values: gram columns must equal n_train");
    std::vector<double> f(gram_cross.values.rows());
    for (std::size_t j = 0; j < f.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < model.n_train; ++i)
            acc += model.dual_coefs[i] * gram_cross.values(j, i);
        f[j] = acc + model.bias;
    }
    return f;
}

std::vector<int> predict_labels(const TrainedModel& model,
                                const kernels::KernelMatrix& gram_cross) {
    const std::vector<double> f = decision_values(model, gram_cross);
    std::vector<int> labels(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) labels[j] = f[j] >= 0.0 ? 1 : -1;
    return labels;
}

CalibrationModel fit_platt_sigmoid(std::span<const double> decision, std::span<const int> y) {
    if (decision.size() != y.size())
        throw std::invalid_argument("fit_platt_sigmoid: length mismatch");
    if (decision.empty()) throw std::invalid_argument("fit_platt_sigmoid: empty input");
    check_labels(y, "fit_platt_sigmoid");

    const std::size_t n = decision.size();
    double prior1 = 0.0;
    double prior0 = 0.0;
    for (int v : y) (v == 1 ? prior1 : prior0) += 1.0;

    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = y[i] == 1 ? hi : lo;

    const int max_iter = 100;
    const double min_step = 1e-10;
    const double sigma = 1e-12;
    const double eps = 1e-5;

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

    const auto objective = [&](double aa, double bb) {
        double fval = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fab = decision[i] * aa + bb;
            if (fab >= 0.0)
                fval += target[i] * fab + std::log1p(std::exp(-fab));
            else
                fval += (target[i] - 1.0) * fab + std::log1p(std::exp(fab));
        }
        return fval;
    };

    double fval = objective(a, b);
    for (int it = 0; it < max_iter; ++it) {
        double h11 = sigma;
        double h22 = sigma;
        double h21 = 0.0;
        double g1 = 0.0;
        double g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fab = decision[i] * a + b;
            double p;
            double qq;
            if (fab >= 0.0) {
                const double e = std::exp(-fab);
                p = e / (1.0 + e);
                qq = 1.0 / (1.0 + e);
            } else {
                const double e = std::exp(fab);
                p = 1.0 / (1.0 + e);
                qq = e / (1.0 + e);
            }
            const double d2 = p * qq;
            h11 += decision[i] * decision[i] * d2;
            h22 += d2;
            h21 += decision[i] * d2;
            const double d1 = target[i] - p;
            g1 += decision[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        bool advanced = false;
        while (step >= min_step) {
            const double na = a + step * da;
            const double nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if (!advanced) break;  // line search exhausted
    }
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::runtime_error("fit_platt_sigmoid: diverged");
    return {a, b, 5};
}

CalibrationModel calibrate_platt(const kernels::KernelMatrix& gram_train, std::span<const int> y,
                                 double c, std::uint64_t seed) {
    const std::size_t n = y.size();
    if (gram_train.values.rows() != n || gram_train.values.cols() != n)
        throw std::invalid_argument("calibrate_platt: gram must be n x n for n labels");
    if (n < 10) throw std::invalid_argument("calibrate_platt: need at least 10 samples");
    check_labels(y, "calibrate_platt");

    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < n; ++i) (y[i] == 1 ? pos : neg).push_back(i);
    // Round-robin dealing keeps every fold complement two-class as long as
    // each class has at least two members.
    if (pos.size() < 2 || neg.size() < 2)
        throw std::invalid_argument("calibrate_platt: a class is too small to stratify");

    constexpr int kFolds = 5;
    Rng rng(derive_seed(seed, std::string_view("platt_folds")));
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<int> fold_of(n);
    for (std::size_t t = 0; t < pos.size(); ++t) fold_of[pos[t]] = static_cast<int>(t % kFolds);
    for (std::size_t t = 0; t < neg.size(); ++t) fold_of[neg[t]] = static_cast<int>(t % kFolds);

    std::vector<double> oof(n, 0.0);
    for (int f = 0; f < kFolds; ++f) {
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> val_idx;
        for (std::size_t i = 0; i < n; ++i)
            (fold_of[i] == f ? val_idx : train_idx).push_back(i);
        if (val_idx.empty()) continue;

        std::vector<int> y_sub(train_idx.size());
        for (std::size_t a = 0; a < train_idx.size(); ++a) y_sub[a] = y[train_idx[a]];
        const TrainedModel model = fit_svm(subset_sym(gram_train, train_idx), y_sub, c);
        const std::vector<double> f_val =
            decision_values(model, subset_cross(gram_train, val_idx, train_idx));
        for (std::size_t a = 0; a < val_idx.size(); ++a) oof[val_idx[a]] = f_val[a];
    }
    return fit_platt_sigmoid(oof, y);
}

std::vector<double> predict_probabilities(const TrainedModel& model,
                                          const CalibrationModel& calibration,
                                          const kernels::KernelMatrix& gram_cross) {
    const std::vector<double> f = decision_values(model, gram_cross);
    std::vector<double> probs(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) probs[j] = sigmoid_prob(f[j], calibration);
    return probs;
}

std::string to_string(Metric metric) {
    return metric == Metric::BalancedAccuracy ? "balanced_accuracy" : "f1";
}

std::string to_string(PredictionMode mode) {
    return mode == PredictionMode::Predict ? "predict" : "probability";
}

ThresholdResult threshold_sweep(std::span<const double> probs, std::span<const int> y_true,
                                Metric metric, double step) {
    if (probs.empty()) throw std::invalid_argument("threshold_sweep: empty input");
    if (probs.size() != y_true.size())
        throw std::invalid_argument("threshold_sweep: length mismatch");
    if (!(step > 0.0 && step < 1.0))
        throw std::invalid_argument("threshold_sweep: step must be in (0,1)");
    for (double p : probs)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("threshold_sweep: probabilities must lie in [0,1]");

    // k*step while < 1, then exactly 1; avoids accumulation drift at the top.
    std::vector<double> grid;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * step;
        if (!(t < 1.0)) break;
        grid.push_back(t);
    }
    grid.push_back(1.0);

    std::vector<int> pred(probs.size());
    ThresholdResult best{0.0, -kInf};
    for (const double t : grid) {
        for (std::size_t i = 0; i < probs.size(); ++i) pred[i] = probs[i] >= t ? 1 : -1;
        const auto cm = metrics::confusion(y_true, pred);
        const double value = metric == Metric::BalancedAccuracy ? metrics::balanced_accuracy(cm)
                                                                : metrics::f1_score(cm);
        if (value > best.value) best = {t, value};
    }
    return best;
}

CGridEvaluation evaluate_c_grid(const kernels::KernelMatrix& gram_train,
                                std::span<const int> y_train,
                                const kernels::KernelMatrix& gram_cross,
                                std::span<const int> y_test, const HyperGrid& grid,
                                std::uint64_t seed, int threads) {
    if (grid.c_values.empty()) throw std::invalid_argument("evaluate_c_grid: empty grid");
    if (gram_cross.values.rows() != y_test.size())
        throw std::invalid_argument("evaluate_c_grid: test gram rows must match test labels");

    CGridEvaluation eval;
    eval.cells.resize(grid.c_values.size());
    std::string first_error;
    const auto count = static_cast<std::int64_t>(grid.c_values.size());
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(dynamic)
    for (std::int64_t k = 0; k < count; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        try {
            CCell cell;
            cell.c = grid.c_values[uk];
            cell.model = fit_svm(gram_train, y_train, cell.c);

            const std::vector<int> pred = predict_labels(cell.model, gram_cross);
            const auto cm = metrics::confusion(y_test, pred);
            cell.predict_ba = metrics::balanced_accuracy(cm);
            cell.predict_f1 = metrics::f1_score(cm);

            cell.calibration = calibrate_platt(gram_train, y_train, cell.c, seed);
            const std::vector<double> probs =
                predict_probabilities(cell.model, cell.calibration, gram_cross);
            const auto ba = threshold_sweep(probs, y_test, Metric::BalancedAccuracy);
            const auto f1 = threshold_sweep(probs, y_test, Metric::F1);
            cell.prob_ba = ba.value;
            cell.prob_ba_threshold = ba.threshold;
            cell.prob_f1 = f1.value;
            cell.prob_f1_threshold = f1.threshold;
            eval.cells[uk] = std::move(cell);
        } catch (const std::exception& e) {
#pragma omp critical(ks_cgrid_error)
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);
    return eval;
}

SelectedC pick_best(const CGridEvaluation& eval, Metric metric, PredictionMode mode) {
    if (eval.cells.empty()) throw std::invalid_argument("pick_best: empty evaluation");
    SelectedC best;
    best.value = -kInf;
    for (std::size_t k = 0; k < eval.cells.size(); ++k) {
        const CCell& cell = eval.cells[k];
        double value;
        double threshold = std::numeric_limits<double>::quiet_NaN();
        if (mode == PredictionMode::Predict) {
            value = metric == Metric::BalancedAccuracy ? cell.predict_ba : cell.predict_f1;
        } else if (metric == Metric::BalancedAccuracy) {
            value = cell.prob_ba;
            threshold = cell.prob_ba_threshold;
        } else {
            value = cell.prob_f1;
            threshold = cell.prob_f1_threshold;
        }
        if (value > best.value) best = {k, cell.c, value, threshold};
    }
    return best;
}

BestCResult select_best_C(const kernels::KernelMatrix& gram_train, std::span<const int> y_train,
                          const kernels::KernelMatrix& gram_cross, std::span<const int> y_test,
                          const HyperGrid& grid, Metric metric, PredictionMode mode,
                          std::uint64_t seed) {
    const CGridEvaluation eval =
        evaluate_c_grid(gram_train, y_train, gram_cross, y_test, grid, seed);
    const SelectedC best = pick_best(eval, metric, mode);
    return {best.c, eval.cells[best.grid_index].model, best.value, best.threshold};
}

}  // namespace ks::svm
