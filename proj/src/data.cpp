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

#include "kernelscape/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kernelscape/errors.hpp"
#include "kernelscape/kernels.hpp"
#include "kernelscape/metrics.hpp"
#include "kernelscape/rng.hpp"
#include "kernelscape/svm.hpp"

namespace ks::data {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Geometric decay of per-feature class separation; 1 - 0.75^10 ~ 0.94 of the
// total signal sits in the first ten features.
constexpr double kSignalDecay = 0.75;

std::size_t count_positive(const std::vector<int>& labels) {
    std::size_t c = 0;
    for (int v : labels) c += v == 1;
    return c;
}

void check_both_classes(const Dataset& dataset, const char* who) {
    const std::size_t pos = count_positive(dataset.labels);
    if (pos == 0 || pos == dataset.labels.size())
        throw std::invalid_argument(std::string(who) + ": both classes must be present");
}

}  // namespace

void validate(const Dataset& dataset) {
    const std::size_t n = dataset.features.rows();
    const std::size_t d = dataset.features.cols();
    if (dataset.labels.size() != n)
        throw std::invalid_argument("dataset: label count does not match rows");
    if (dataset.missing_mask.size() != n * d)
        throw std::invalid_argument("dataset: mask size does not match features");
    if (!dataset.feature_names.empty() && dataset.feature_names.size() != d)
        throw std::invalid_argument("dataset: feature name count does not match columns");
    for (int v : dataset.labels)
        if (v != 1 && v != -1)
            throw std::invalid_argument("dataset: labels must be +1 or -1");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (!dataset.missing(i, j) && !std::isfinite(dataset.features(i, j)))
                throw std::invalid_argument("dataset: non-finite present value");
}

Dataset generate_synthetic(std::size_t n, std::size_t dim, double class_prior,
                           std::size_t missing_from, double missing_rate, double difficulty,
                           std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("generate_synthetic: n must be >= 2");
    if (dim < 1) throw std::invalid_argument("generate_synthetic: dim must be >= 1");
    if (!(class_prior > 0.0 && class_prior < 1.0))
        throw std::invalid_argument("generate_synthetic: class_prior must be in (0,1)");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0))
        throw std::invalid_argument("generate_synthetic: missing_rate must be in [0,1)");
    if (!(difficulty >= 0.0))
        throw std::invalid_argument("generate_synthetic: difficulty must be >= 0");

    Dataset out;
    out.provenance = Provenance::Synthetic;
    out.features = Mat(n, dim);
    out.missing_mask.assign(n * dim, 0);
    out.feature_names.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) out.feature_names[d] = "f" + std::to_string(d);

    // Exact positive count, positions shuffled.
    const auto n_pos = static_cast<std::size_t>(std::clamp<long long>(
        std::llround(static_cast<double>(n) * class_prior), 1, static_cast<long long>(n) - 1));
    out.labels.assign(n, -1);
    std::fill(out.labels.begin(), out.labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
    Rng label_rng(derive_seed(seed, std::string_view("labels")));
    label_rng.shuffle(out.labels);

    std::vector<double> half_gap(dim);
    for (std::size_t d = 0; d < dim; ++d)
        half_gap[d] = 0.5 * difficulty * std::pow(kSignalDecay, static_cast<double>(d));

    Rng feature_rng(derive_seed(seed, std::string_view("features")));
    for (std::size_t i = 0; i < n; ++i) {
        const double y = out.labels[i];
        for (std::size_t d = 0; d < dim; ++d)
            out.features(i, d) = y * half_gap[d] + feature_rng.next_normal();
    }

    if (missing_rate > 0.0 && missing_from < dim) {
        Rng missing_rng(derive_seed(seed, std::string_view("missing")));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = missing_from; d < dim; ++d) {
                if (missing_rng.next_uniform() < missing_rate) {
                    out.missing_mask[i * dim + d] = 1;
                    out.features(i, d) = kNaN;
                }
            }
        }
    }
    return out;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_csv: cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    // Header is the first non-comment line.
    for (;;) {
        if (!std::getline(in, line))
            throw io_error("load_csv: empty file " + path.string());
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        break;
    }

    std::vector<std::string> header;
    {
        std::string cell;
        std::istringstream row(line);
        while (std::getline(row, cell, ',')) header.push_back(cell);
        if (!line.empty() && line.back() == ',') header.push_back("");
    }
    std::size_t label_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == "label") label_col = c;
    if (label_col == header.size())
        throw io_error("load_csv: no `label` column in " + path.string());

    Dataset out;
    out.provenance = Provenance::Csv;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_col) out.feature_names.push_back(header[c]);
    const std::size_t dim = out.feature_names.size();

    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        std::vector<std::string> cells;
        std::string cell;
        std::istringstream row(line);
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (cells.size() != header.size())
            throw io_error("load_csv: " + path.string() + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));

        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& s = cells[c];
            if (c == label_col) {
                if (s == "1" || s == "+1") out.labels.push_back(1);
                else if (s == "-1" || s == "0") out.labels.push_back(-1);
                else
                    throw io_error("load_csv: " + path.string() + ":" +
                                             std::to_string(lineno) + ": column " +
                                             std::to_string(c + 1) + ": bad label `" + s + "`");
                continue;
            }
            if (s.empty()) {
                values.push_back(kNaN);
                mask.push_back(1);
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end == s.c_str() || *end != '\0' || !std::isfinite(v))
                throw io_error("load_csv: " + path.string() + ":" +
                                         std::to_string(lineno) + ": column " +
                                         std::to_string(c + 1) + ": bad number `" + s + "`");
            values.push_back(v);
            mask.push_back(0);
        }
    }
    if (out.labels.empty()) throw io_error("load_csv: no data rows in " + path.string());

    out.features = Mat(out.labels.size(), dim);
    std::copy(values.begin(), values.end(), out.features.data());
    out.missing_mask = std::move(mask);
    validate(out);
    return out;
}

void save_csv(const std::filesystem::path& path, const Dataset& dataset) {
    validate(dataset);
    std::ofstream out(path);
    if (!out) throw io_error("save_csv: cannot open " + path.string());
    for (std::size_t d = 0; d < dataset.dim(); ++d) {
        if (d) out << ',';
        out << (dataset.feature_names.empty() ? "f" + std::to_string(d)
                                              : dataset.feature_names[d]);
    }
    out << (dataset.dim() ? ",label\n" : "label\n");
    char buf[40];
    for (std::size_t i = 0; i < dataset.n(); ++i) {
        for (std::size_t d = 0; d < dataset.dim(); ++d) {
            if (d) out << ',';
            if (!dataset.missing(i, d)) {
                std::snprintf(buf, sizeof(buf), "%.17g", dataset.features(i, d));
                out << buf;
            }
        }
        if (dataset.dim()) out << ',';
        out << dataset.labels[i] << "\n";
    }
    out.flush();
    if (!out) throw io_error("save_csv: write failed for " + path.string());
}

Dataset restrict_features(const Dataset& dataset, std::span<const std::size_t> feature_idx) {
    Dataset out;
    out.provenance = dataset.provenance;
    out.labels = dataset.labels;
    out.features = Mat(dataset.n(), feature_idx.size());
    out.missing_mask.assign(dataset.n() * feature_idx.size(), 0);
    out.feature_names.resize(feature_idx.size());
    for (std::size_t k = 0; k < feature_idx.size(); ++k) {
        const std::size_t d = feature_idx[k];
        if (d >= dataset.dim())
            throw std::out_of_range("restrict_features: feature index out of range");
        out.feature_names[k] =
            dataset.feature_names.empty() ? "f" + std::to_string(d) : dataset.feature_names[d];
        for (std::size_t i = 0; i < dataset.n(); ++i) {
            out.features(i, k) = dataset.features(i, d);
            out.missing_mask[i * feature_idx.size() + k] = dataset.missing_mask[i * dataset.dim() + d];
        }
    }
    return out;
}

PreprocessModel fit_preprocess(const Dataset& dataset,
                               std::span<const std::size_t> train_indices) {
    if (train_indices.empty()) throw std::invalid_argument("fit_preprocess: no training rows");
    for (std::size_t i : train_indices)
        if (i >= dataset.n()) throw std::out_of_range("fit_preprocess: row index out of range");

    const std::size_t dim = dataset.dim();
    PreprocessModel model;
    model.means.resize(dim);
    model.mins.resize(dim);
    model.maxs.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        double sum = 0.0;
        std::size_t count = 0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i : train_indices) {
            if (dataset.missing(i, d)) continue;
            const double v = dataset.features(i, d);
            sum += v;
            ++count;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (count == 0)
            throw std::invalid_argument("fit_preprocess: feature " + std::to_string(d) +
                                        " has no present training value");
        model.means[d] = sum / static_cast<double>(count);
        // The imputed mean lies inside [lo, hi], so present-value bounds are
        // the post-imputation bounds as well.
        model.mins[d] = lo;
        model.maxs[d] = hi;
    }
    return model;
}

Mat apply_preprocess(const PreprocessModel& model, const Dataset& dataset,
                     std::span<const std::size_t> rows) {
    const std::size_t dim = dataset.dim();
    if (model.means.size() != dim)
        throw std::invalid_argument("apply_preprocess: model dimension mismatch");
    Mat out(rows.size(), dim);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        const std::size_t i = rows[a];
        if (i >= dataset.n()) throw std::out_of_range("apply_preprocess: row index out of range");
        for (std::size_t d = 0; d < dim; ++d) {
            const double raw = dataset.missing(i, d) ? model.means[d] : dataset.features(i, d);
            const double span = model.maxs[d] - model.mins[d];
            double scaled =
                span > 0.0 ? (raw - model.mins[d]) / span * std::numbers::pi : 0.0;
            out(a, d) = std::clamp(scaled, 0.0, std::numbers::pi);
        }
    }
    return out;
}

FeatureRanking rank_features(const Dataset& dataset, const ProbeConfig& probe,
                             std::size_t repetitions, std::uint64_t seed) {
    validate(dataset);
    check_both_classes(dataset, "rank_features");
    if (repetitions < 1) throw std::invalid_argument("rank_features: repetitions must be >= 1");
    if (!(probe.holdout_fraction > 0.0 && probe.holdout_fraction < 1.0))
        throw std::invalid_argument("rank_features: holdout_fraction must be in (0,1)");
    if (!(probe.c > 0.0)) throw std::invalid_argument("rank_features: probe C must be positive");

    const std::size_t n = dataset.n();
    const std::size_t dim = dataset.dim();
    const auto n_hold = static_cast<std::size_t>(std::clamp<long long>(
        std::llround(static_cast<double>(n) * probe.holdout_fraction), 2,
        static_cast<long long>(n) - 2));
    const Subpoint split = stratified_split(dataset, n - n_hold, n_hold,
                                            derive_seed(seed, std::string_view("probe_split")));

    const PreprocessModel pre = fit_preprocess(dataset, split.train_indices);
    const Mat x_train = apply_preprocess(pre, dataset, split.train_indices);
    const Mat x_hold = apply_preprocess(pre, dataset, split.test_indices);
    std::vector<int> y_train(split.train_indices.size());
    std::vector<int> y_hold(split.test_indices.size());
    for (std::size_t a = 0; a < y_train.size(); ++a)
        y_train[a] = dataset.labels[split.train_indices[a]];
    for (std::size_t a = 0; a < y_hold.size(); ++a)
        y_hold[a] = dataset.labels[split.test_indices[a]];

    const double gamma = probe.gamma > 0.0 ? probe.gamma : 1.0 / static_cast<double>(dim);
    const svm::TrainedModel model =
        svm::fit_svm(kernels::rbf_gram_sym(x_train, gamma), y_train, probe.c);

    const auto score = [&](const Mat& x) {
        const std::vector<int> pred =
            svm::predict_labels(model, kernels::rbf_gram(x, x_train, gamma));
        return metrics::balanced_accuracy(metrics::confusion(y_hold, pred));
    };
    const double baseline = score(x_hold);

    std::vector<double> scores(dim);
    std::vector<std::size_t> perm(x_hold.rows());
    for (std::size_t d = 0; d < dim; ++d) {
        double drop_sum = 0.0;
        for (std::size_t r = 0; r < repetitions; ++r) {
            for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
            Rng rng(derive_seed(seed, std::string_view("perm"), static_cast<std::uint64_t>(d),
                                static_cast<std::uint64_t>(r)));
            rng.shuffle(perm);
            Mat shuffled = x_hold;
            for (std::size_t i = 0; i < perm.size(); ++i) shuffled(i, d) = x_hold(perm[i], d);
            drop_sum += baseline - score(shuffled);
        }
        scores[d] = drop_sum / static_cast<double>(repetitions);
    }

    FeatureRanking ranking;
    ranking.order.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) ranking.order[d] = d;
    std::stable_sort(ranking.order.begin(), ranking.order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    ranking.scores.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) ranking.scores[k] = scores[ranking.order[k]];
    return ranking;
}

Subpoint stratified_split(const Dataset& dataset, std::size_t n_train, std::size_t n_test,
                          std::uint64_t seed) {
    validate(dataset);
    check_both_classes(dataset, "stratified_split");
    const std::size_t n = dataset.n();
    if (n_train < 1) throw std::invalid_argument("stratified_split: n_train must be >= 1");
    if (n_train + n_test > n)
        throw std::invalid_argument("stratified_split: split larger than dataset");

    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < n; ++i) (dataset.labels[i] == 1 ? pos : neg).push_back(i);
    const double prior = static_cast<double>(pos.size()) / static_cast<double>(n);

    const auto pos_train =
        static_cast<std::size_t>(std::llround(static_cast<double>(n_train) * prior));
    const auto pos_test =
        static_cast<std::size_t>(std::llround(static_cast<double>(n_test) * prior));
    if (pos_train > n_train || pos_test > n_test)
        throw std::invalid_argument("stratified_split: rounding exceeded block size");
    const std::size_t neg_train = n_train - pos_train;
    const std::size_t neg_test = n_test - pos_test;
    if (pos_train + pos_test > pos.size() || neg_train + neg_test > neg.size())
        throw std::invalid_argument("stratified_split: insufficient samples in a class");

    Rng rng(derive_seed(seed, std::string_view("strat_split")));
    rng.shuffle(pos);
    rng.shuffle(neg);

    Subpoint sp;
    sp.coordinate = {static_cast<int>(dataset.dim()), static_cast<int>(n_train)};
    sp.seed = seed;
    sp.train_indices.insert(sp.train_indices.end(), pos.begin(),
                            pos.begin() + static_cast<std::ptrdiff_t>(pos_train));
    sp.train_indices.insert(sp.train_indices.end(), neg.begin(),
                            neg.begin() + static_cast<std::ptrdiff_t>(neg_train));
    sp.test_indices.insert(sp.test_indices.end(),
                           pos.begin() + static_cast<std::ptrdiff_t>(pos_train),
                           pos.begin() + static_cast<std::ptrdiff_t>(pos_train + pos_test));
    sp.test_indices.insert(sp.test_indices.end(),
                           neg.begin() + static_cast<std::ptrdiff_t>(neg_train),
                           neg.begin() + static_cast<std::ptrdiff_t>(neg_train + neg_test));
    std::sort(sp.train_indices.begin(), sp.train_indices.end());
    std::sort(sp.test_indices.begin(), sp.test_indices.end());
    return sp;
}

std::vector<std::size_t> select_representative_indices(std::span<const double> scores,
                                                       std::size_t k) {
    if (scores.empty()) throw std::invalid_argument("select_representative: empty candidates");
    if (k > scores.size())
        throw std::invalid_argument("select_representative: k exceeds candidate count");
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());

    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(scores[a] - mean) < std::abs(scores[b] - mean);
    });
    idx.resize(k);
    return idx;
}

std::vector<Subpoint> select_representative(const std::vector<Subpoint>& candidates,
                                            std::span<const double> scores, std::size_t k) {
    if (scores.size() != candidates.size())
        throw std::invalid_argument("select_representative: scores do not match candidates");
    std::vector<Subpoint> out;
    for (std::size_t i : select_representative_indices(scores, k)) out.push_back(candidates[i]);
    return out;
}

}  // namespace ks::data
