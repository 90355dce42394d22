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

#include "kernelscape/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "jsonio.hpp"
#include "kernelscape/errors.hpp"
#include "kernelscape/rng.hpp"
#include "kernelscape/svm.hpp"

namespace ks::sweep {
namespace {

using nlohmann::json;

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw io_error("config: unknown key `" + key + "` in " + where);
    }
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw io_error(std::string("config: `") + key + "` must be a number");
    return obj.at(key).get<double>();
}

std::int64_t get_integer(const json& obj, const char* key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw io_error(std::string("config: `") + key + "` must be an integer");
    return obj.at(key).get<std::int64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean())
        throw io_error(std::string("config: `") + key + "` must be a boolean");
    return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string())
        throw io_error(std::string("config: `") + key + "` must be a string");
    return obj.at(key).get<std::string>();
}

std::vector<int> get_int_list(const json& obj, const char* key, std::vector<int> fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_array())
        throw io_error(std::string("config: `") + key + "` must be an array of integers");
    std::vector<int> out;
    for (const auto& v : obj.at(key)) {
        if (!v.is_number_integer())
            throw io_error(std::string("config: `") + key + "` must contain only integers");
        out.push_back(v.get<int>());
    }
    return out;
}

json config_json(const ConfigSpace& c, bool identity_only) {
    json data;
    if (!c.data.csv_path.empty()) {
        data["csv"] = c.data.csv_path;
    } else {
        json synth;
        synth["n"] = c.data.synthetic.n;
        synth["dim"] = c.data.synthetic.dim;
        synth["class_prior"] = c.data.synthetic.class_prior;
        synth["missing_from"] = c.data.synthetic.missing_from;
        synth["missing_rate"] = c.data.synthetic.missing_rate;
        synth["difficulty"] = c.data.synthetic.difficulty;
        if (c.data.synthetic.seed) synth["seed"] = *c.data.synthetic.seed;
        data["synthetic"] = synth;
    }
    json ranking;
    ranking["repetitions"] = c.ranking.repetitions;
    ranking["probe_c"] = c.ranking.probe_c;
    ranking["gamma"] = c.ranking.gamma;
    ranking["holdout_fraction"] = c.ranking.holdout_fraction;

    json j;
    j["data"] = data;
    j["ranking"] = ranking;
    j["feature_counts"] = c.feature_counts;
    j["train_sizes"] = c.train_sizes;
    j["subpoints_per_coordinate"] = c.subpoints_per_coordinate;
    j["candidate_splits"] = c.candidate_splits;
    j["test_size"] = c.test_size;
    j["shots"] = c.shots;
    j["exact"] = c.exact_kernel;
    j["reps"] = c.feature_map_reps;
    j["rbf_gamma"] = c.rbf_gamma;
    j["geodiff_lambda"] = c.geodiff_lambda;
    j["geodiff_variant"] =
        c.geodiff_variant == kernels::GeoDiffVariant::Plain ? "plain" : "sandwich";
    j["threshold_step"] = c.threshold_step;
    j["c_grid"] = {{"count", c.c_grid_count}, {"min", c.c_grid_min}, {"max", c.c_grid_max}};
    j["reference_c"] = c.reference_c;
    j["seed"] = c.master_seed;
    if (!identity_only) {
        j["save_grams"] = c.save_grams;
        j["parallel"] = c.parallel;
        j["out"] = c.out_dir;
    }
    return j;
}

ConfigSpace config_from_json_object(const json& j) {
    if (!j.is_object()) throw io_error("config: top level must be a JSON object");
    reject_unknown(j,
                   {"data", "ranking", "feature_counts", "train_sizes",
                    "subpoints_per_coordinate", "candidate_splits", "test_size", "shots", "exact",
                    "reps", "rbf_gamma", "geodiff_lambda", "geodiff_variant", "threshold_step",
                    "c_grid", "reference_c", "seed", "save_grams", "parallel", "out"},
                   "top level");
    ConfigSpace c;
    if (j.contains("data")) {
        const json& data = j.at("data");
        if (!data.is_object()) throw io_error("config: `data` must be an object");
        reject_unknown(data, {"csv", "synthetic"}, "`data`");
        if (data.contains("csv") && data.contains("synthetic"))
            throw io_error("config: `data` must name either `csv` or `synthetic`, not both");
        c.data.csv_path = get_string(data, "csv", "");
        if (data.contains("synthetic")) {
            const json& synth = data.at("synthetic");
            if (!synth.is_object()) throw io_error("config: `data.synthetic` must be an object");
            reject_unknown(synth,
                           {"n", "dim", "class_prior", "missing_from", "missing_rate",
                            "difficulty", "seed"},
                           "`data.synthetic`");
            SyntheticSource& s = c.data.synthetic;
            s.n = static_cast<std::size_t>(get_integer(synth, "n", static_cast<std::int64_t>(s.n)));
            s.dim = static_cast<std::size_t>(
                get_integer(synth, "dim", static_cast<std::int64_t>(s.dim)));
            s.class_prior = get_number(synth, "class_prior", s.class_prior);
            s.missing_from = static_cast<std::size_t>(
                get_integer(synth, "missing_from", static_cast<std::int64_t>(s.missing_from)));
            s.missing_rate = get_number(synth, "missing_rate", s.missing_rate);
            s.difficulty = get_number(synth, "difficulty", s.difficulty);
            if (synth.contains("seed"))
                s.seed = static_cast<std::uint64_t>(get_integer(synth, "seed", 0));
        }
    }
    if (j.contains("ranking")) {
        const json& r = j.at("ranking");
        if (!r.is_object()) throw io_error("config: `ranking` must be an object");
        reject_unknown(r, {"repetitions", "probe_c", "gamma", "holdout_fraction"}, "`ranking`");
        c.ranking.repetitions = static_cast<std::size_t>(
            get_integer(r, "repetitions", static_cast<std::int64_t>(c.ranking.repetitions)));
        c.ranking.probe_c = get_number(r, "probe_c", c.ranking.probe_c);
        c.ranking.gamma = get_number(r, "gamma", c.ranking.gamma);
        c.ranking.holdout_fraction = get_number(r, "holdout_fraction", c.ranking.holdout_fraction);
    }
    c.feature_counts = get_int_list(j, "feature_counts", c.feature_counts);
    c.train_sizes = get_int_list(j, "train_sizes", c.train_sizes);
    c.subpoints_per_coordinate = static_cast<int>(
        get_integer(j, "subpoints_per_coordinate", c.subpoints_per_coordinate));
    c.candidate_splits = static_cast<int>(get_integer(j, "candidate_splits", c.candidate_splits));
    c.test_size = static_cast<int>(get_integer(j, "test_size", c.test_size));
    c.shots = static_cast<int>(get_integer(j, "shots", c.shots));
    c.exact_kernel = get_bool(j, "exact", c.exact_kernel);
    c.feature_map_reps = static_cast<int>(get_integer(j, "reps", c.feature_map_reps));
    c.rbf_gamma = get_number(j, "rbf_gamma", c.rbf_gamma);
    c.geodiff_lambda = get_number(j, "geodiff_lambda", c.geodiff_lambda);
    const std::string variant = get_string(j, "geodiff_variant", "plain");
    if (variant == "plain") c.geodiff_variant = kernels::GeoDiffVariant::Plain;
    else if (variant == "sandwich") c.geodiff_variant = kernels::GeoDiffVariant::Sandwich;
    else throw io_error("config: `geodiff_variant` must be `plain` or `sandwich`");
    c.threshold_step = get_number(j, "threshold_step", c.threshold_step);
    if (j.contains("c_grid")) {
        const json& g = j.at("c_grid");
        if (!g.is_object()) throw io_error("config: `c_grid` must be an object");
        reject_unknown(g, {"count", "min", "max"}, "`c_grid`");
        c.c_grid_count = static_cast<std::size_t>(
            get_integer(g, "count", static_cast<std::int64_t>(c.c_grid_count)));
        c.c_grid_min = get_number(g, "min", c.c_grid_min);
        c.c_grid_max = get_number(g, "max", c.c_grid_max);
    }
    c.reference_c = get_number(j, "reference_c", c.reference_c);
    c.master_seed = static_cast<std::uint64_t>(
        get_integer(j, "seed", static_cast<std::int64_t>(c.master_seed)));
    c.save_grams = get_bool(j, "save_grams", c.save_grams);
    c.parallel = static_cast<int>(get_integer(j, "parallel", c.parallel));
    c.out_dir = get_string(j, "out", c.out_dir);
    validate(c);
    return c;
}

double classical_candidate_score(const data::Dataset& restricted, const data::Subpoint& split,
                                 double gamma_config, double reference_c) {
    const data::PreprocessModel pre = data::fit_preprocess(restricted, split.train_indices);
    const Mat x_tr = data::apply_preprocess(pre, restricted, split.train_indices);
    const Mat x_te = data::apply_preprocess(pre, restricted, split.test_indices);
    std::vector<int> y_tr(split.train_indices.size());
    std::vector<int> y_te(split.test_indices.size());
    for (std::size_t a = 0; a < y_tr.size(); ++a) y_tr[a] = restricted.labels[split.train_indices[a]];
    for (std::size_t a = 0; a < y_te.size(); ++a) y_te[a] = restricted.labels[split.test_indices[a]];
    const double gamma =
        gamma_config > 0.0 ? gamma_config : 1.0 / static_cast<double>(restricted.dim());
    const svm::TrainedModel model =
        svm::fit_svm(kernels::rbf_gram_sym(x_tr, gamma), y_tr, reference_c);
    const std::vector<int> pred =
        svm::predict_labels(model, kernels::rbf_gram(x_te, x_tr, gamma));
    return metrics::balanced_accuracy(metrics::confusion(y_te, pred));
}

json result_payload(const SubpointResult& r) {
    json cells = json::array();
    for (int arm = 0; arm < 2; ++arm) {
        for (int metric = 0; metric < 2; ++metric) {
            for (int mode = 0; mode < 2; ++mode) {
                const CellScore& cell = r.cells[arm][metric][mode];
                json c;
                c["arm"] = kArmNames[arm];
                c["metric"] = kMetricNames[metric];
                c["mode"] = kModeNames[mode];
                c["value"] = cell.value;
                c["best_c"] = cell.best_c;
                if (std::isnan(cell.threshold)) c["threshold"] = nullptr;
                else c["threshold"] = cell.threshold;
                cells.push_back(c);
            }
        }
    }
    json j;
    j["coordinate"] = {{"feature_count", r.coordinate.feature_count},
                       {"train_size", r.coordinate.train_size}};
    j["subpoint_index"] = r.subpoint_index;
    j["seed"] = r.seed;
    j["cells"] = cells;
    j["geometric_difference"] = {{"g", r.geodiff_g}, {"lambda", r.geodiff_lambda}};
    return j;
}

SubpointResult result_from_json(const json& j) {
    SubpointResult r;
    r.coordinate.feature_count = j.at("coordinate").at("feature_count").get<int>();
    r.coordinate.train_size = j.at("coordinate").at("train_size").get<int>();
    r.subpoint_index = j.at("subpoint_index").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    bool seen[2][2][2] = {};
    for (const json& c : j.at("cells")) {
        const std::string arm = c.at("arm").get<std::string>();
        const std::string metric = c.at("metric").get<std::string>();
        const std::string mode = c.at("mode").get<std::string>();
        int ai = -1;
        int mi = -1;
        int oi = -1;
        for (int k = 0; k < 2; ++k) {
            if (arm == kArmNames[k]) ai = k;
            if (metric == kMetricNames[k]) mi = k;
            if (mode == kModeNames[k]) oi = k;
        }
        if (ai < 0 || mi < 0 || oi < 0) throw io_error("subpoint result: unknown cell labels");
        CellScore& cell = r.cells[ai][mi][oi];
        cell.value = c.at("value").get<double>();
        cell.best_c = c.at("best_c").get<double>();
        cell.threshold = c.at("threshold").is_null()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : c.at("threshold").get<double>();
        seen[ai][mi][oi] = true;
    }
    for (auto& a : seen)
        for (auto& m : a)
            for (bool s : m)
                if (!s) throw io_error("subpoint result: incomplete cell coverage");
    r.geodiff_g = j.at("geometric_difference").at("g").get<double>();
    r.geodiff_lambda = j.at("geometric_difference").at("lambda").get<double>();
    return r;
}

std::filesystem::path subpoint_path(const std::filesystem::path& dir, const PlanItem& item) {
    return dir / "subpoints" / (item_name(item) + ".json");
}

}  // namespace

void validate(const ConfigSpace& config) {
    const auto positive_list = [](const std::vector<int>& v, const char* name) {
        if (v.empty()) throw std::invalid_argument(std::string("config: ") + name + " is empty");
        for (int x : v)
            if (x < 1)
                throw std::invalid_argument(std::string("config: ") + name +
                                            " entries must be positive");
    };
    positive_list(config.feature_counts, "feature_counts");
    positive_list(config.train_sizes, "train_sizes");
    if (config.subpoints_per_coordinate < 1)
        throw std::invalid_argument("config: subpoints_per_coordinate must be >= 1");
    if (config.candidate_splits < config.subpoints_per_coordinate)
        throw std::invalid_argument("config: candidate_splits must cover subpoints_per_coordinate");
    if (config.test_size < 1) throw std::invalid_argument("config: test_size must be >= 1");
    if (config.shots < 1) throw std::invalid_argument("config: shots must be >= 1");
    if (config.feature_map_reps < 1) throw std::invalid_argument("config: reps must be >= 1");
    if (config.rbf_gamma < 0.0) throw std::invalid_argument("config: rbf_gamma must be >= 0");
    if (config.geodiff_lambda < 0.0)
        throw std::invalid_argument("config: geodiff_lambda must be >= 0");
    if (!(config.threshold_step > 0.0 && config.threshold_step < 1.0))
        throw std::invalid_argument("config: threshold_step must be in (0,1)");
    if (config.c_grid_count < 2) throw std::invalid_argument("config: c_grid count must be >= 2");
    if (!(config.c_grid_min > 0.0 && config.c_grid_max > config.c_grid_min))
        throw std::invalid_argument("config: need 0 < c_grid min < max");
    if (!(config.reference_c > 0.0))
        throw std::invalid_argument("config: reference_c must be positive");
    if (config.parallel < 0) throw std::invalid_argument("config: parallel must be >= 0");
    if (config.ranking.repetitions < 1)
        throw std::invalid_argument("config: ranking repetitions must be >= 1");
}

ConfigSpace config_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw io_error("config: malformed JSON");
    return config_from_json_object(j);
}

ConfigSpace config_from_json_file(const std::filesystem::path& path) {
    return config_from_json_object(detail::read_json_file(path));
}

std::string config_to_json(const ConfigSpace& config) {
    return config_json(config, false).dump(2) + "\n";
}

std::string config_hash(const ConfigSpace& config) {
    return hash_hex(fnv1a(config_json(config, true).dump()));
}

data::Dataset realize_dataset(const ConfigSpace& config) {
    if (!config.data.csv_path.empty()) return data::load_csv(config.data.csv_path);
    const SyntheticSource& s = config.data.synthetic;
    const std::uint64_t seed =
        s.seed ? *s.seed : derive_seed(config.master_seed, std::string_view("dataset"));
    return data::generate_synthetic(s.n, s.dim, s.class_prior, s.missing_from, s.missing_rate,
                                    s.difficulty, seed);
}

std::string item_name(const PlanItem& item) {
    return "f" + std::to_string(item.coordinate.feature_count) + "_t" +
           std::to_string(item.coordinate.train_size) + "_" +
           std::to_string(item.subpoint_index);
}

ExperimentPlan plan_experiment(const ConfigSpace& config, const data::Dataset& dataset,
                               const data::FeatureRanking& ranking, int threads) {
    validate(config);
    data::validate(dataset);
    const int max_fc = *std::max_element(config.feature_counts.begin(),
                                         config.feature_counts.end());
    if (ranking.order.size() < static_cast<std::size_t>(max_fc))
        throw std::invalid_argument("plan_experiment: ranking covers fewer features than needed");
    if (static_cast<std::size_t>(max_fc) > dataset.dim())
        throw std::invalid_argument("plan_experiment: feature count exceeds dataset width");

    ExperimentPlan plan;
    for (const int fc : config.feature_counts) {
        const std::vector<std::size_t> feature_set(ranking.order.begin(),
                                                   ranking.order.begin() + fc);
        const data::Dataset restricted = data::restrict_features(dataset, feature_set);
        for (const int ts : config.train_sizes) {
            const auto n_candidates = static_cast<std::size_t>(config.candidate_splits);
            std::vector<data::Subpoint> candidates(n_candidates);
            for (std::size_t ci = 0; ci < n_candidates; ++ci) {
                try {
                    candidates[ci] = data::stratified_split(
                        restricted, static_cast<std::size_t>(ts),
                        static_cast<std::size_t>(config.test_size),
                        derive_seed(config.master_seed, std::string_view("candidate"),
                                    static_cast<std::uint64_t>(fc), static_cast<std::uint64_t>(ts),
                                    static_cast<std::uint64_t>(ci)));
                } catch (const std::invalid_argument& e) {
                    throw std::invalid_argument("plan_experiment: coordinate f" +
                                                std::to_string(fc) + "_t" + std::to_string(ts) +
                                                ": " + e.what());
                }
            }

            std::vector<double> scores(n_candidates, 0.0);
            std::string first_error;
            const auto count = static_cast<std::int64_t>(n_candidates);
#pragma omp parallel for num_threads(std::max(1, threads)) schedule(dynamic)
            for (std::int64_t ci = 0; ci < count; ++ci) {
                try {
                    scores[static_cast<std::size_t>(ci)] = classical_candidate_score(
                        restricted, candidates[static_cast<std::size_t>(ci)], config.rbf_gamma,
                        config.reference_c);
                } catch (const std::exception& e) {
#pragma omp critical(ks_plan_error)
                    if (first_error.empty()) first_error = e.what();
                }
            }
            if (!first_error.empty())
                throw std::runtime_error("plan_experiment: candidate scoring failed: " +
                                         first_error);

            const std::vector<std::size_t> chosen = data::select_representative_indices(
                scores, static_cast<std::size_t>(config.subpoints_per_coordinate));
            for (std::size_t s = 0; s < chosen.size(); ++s) {
                PlanItem item;
                item.coordinate = {fc, ts};
                item.subpoint_index = static_cast<int>(s);
                item.seed = derive_seed(config.master_seed, std::string_view("subpoint"),
                                        static_cast<std::uint64_t>(fc),
                                        static_cast<std::uint64_t>(ts), s);
                item.split = candidates[chosen[s]];
                item.split.coordinate = {fc, ts};
                item.feature_set = feature_set;
                plan.items.push_back(std::move(item));
            }
        }
    }
    return plan;
}

SubpointResult run_subpoint(const ConfigSpace& config, const data::Dataset& dataset,
                            const PlanItem& item, int threads,
                            const std::filesystem::path& grams_dir) {
    validate(config);
    const int fc = item.coordinate.feature_count;
    if (item.feature_set.size() != static_cast<std::size_t>(fc))
        throw std::invalid_argument("run_subpoint: feature set does not match coordinate");

    const data::Dataset restricted = data::restrict_features(dataset, item.feature_set);
    const data::PreprocessModel pre = data::fit_preprocess(restricted, item.split.train_indices);
    const Mat x_tr = data::apply_preprocess(pre, restricted, item.split.train_indices);
    const Mat x_te = data::apply_preprocess(pre, restricted, item.split.test_indices);
    std::vector<int> y_tr(item.split.train_indices.size());
    std::vector<int> y_te(item.split.test_indices.size());
    for (std::size_t a = 0; a < y_tr.size(); ++a)
        y_tr[a] = restricted.labels[item.split.train_indices[a]];
    for (std::size_t a = 0; a < y_te.size(); ++a)
        y_te[a] = restricted.labels[item.split.test_indices[a]];

    const svm::HyperGrid grid =
        svm::HyperGrid::log_spaced(config.c_grid_count, config.c_grid_min, config.c_grid_max);
    const std::uint64_t calib_seed = derive_seed(item.seed, std::string_view("calibration"));

    // Classical arm.
    const double gamma =
        config.rbf_gamma > 0.0 ? config.rbf_gamma : 1.0 / static_cast<double>(fc);
    const kernels::KernelMatrix g_tr_c = kernels::rbf_gram_sym(x_tr, gamma, threads);
    const kernels::KernelMatrix g_te_c = kernels::rbf_gram(x_te, x_tr, gamma, threads);
    const svm::CGridEvaluation eval_c =
        svm::evaluate_c_grid(g_tr_c, y_tr, g_te_c, y_te, grid, calib_seed, threads);

    // Quantum arm: same splits, same preprocessing, same grid and machinery.
    qsim::FeatureMapSpec fmap;
    fmap.num_qubits = fc;
    fmap.reps = config.feature_map_reps;
    kernels::QuantumGramOptions qopts;
    qopts.mode = config.exact_kernel ? kernels::QuantumMode::Exact : kernels::QuantumMode::Sampled;
    qopts.shots = config.shots;
    qopts.threads = threads;
    qopts.seed = derive_seed(item.seed, std::string_view("qgram_train"));
    const kernels::KernelMatrix g_tr_q =
        kernels::psd_floor(kernels::quantum_gram_sym(fmap, x_tr, qopts));
    qopts.seed = derive_seed(item.seed, std::string_view("qgram_test"));
    const kernels::KernelMatrix g_te_q = kernels::quantum_gram(fmap, x_te, x_tr, qopts);
    const svm::CGridEvaluation eval_q =
        svm::evaluate_c_grid(g_tr_q, y_tr, g_te_q, y_te, grid, calib_seed, threads);

    SubpointResult result;
    result.coordinate = item.coordinate;
    result.subpoint_index = item.subpoint_index;
    result.seed = item.seed;
    for (int metric = 0; metric < 2; ++metric) {
        for (int mode = 0; mode < 2; ++mode) {
            const auto m = static_cast<svm::Metric>(metric);
            const auto md = static_cast<svm::PredictionMode>(mode);
            const svm::SelectedC best_c = svm::pick_best(eval_c, m, md);
            const svm::SelectedC best_q = svm::pick_best(eval_q, m, md);
            result.cells[0][metric][mode] = {best_c.value, best_c.c, best_c.threshold};
            result.cells[1][metric][mode] = {best_q.value, best_q.c, best_q.threshold};
        }
    }
    const kernels::GeoDiffResult geo = kernels::geometric_difference(
        g_tr_c, g_tr_q, config.geodiff_lambda, config.geodiff_variant);
    result.geodiff_g = geo.g;
    result.geodiff_lambda = geo.lambda;

    if (!grams_dir.empty()) {
        const std::string base = item_name(item);
        kernels::save_gram_csv(grams_dir / (base + "_classical_train.csv"), g_tr_c);
        kernels::save_gram_csv(grams_dir / (base + "_classical_test.csv"), g_te_c);
        kernels::save_gram_csv(grams_dir / (base + "_quantum_train.csv"), g_tr_q);
        kernels::save_gram_csv(grams_dir / (base + "_quantum_test.csv"), g_te_q);
    }
    return result;
}

LandscapeReport aggregate_landscape(const ConfigSpace& config,
                                    const std::vector<SubpointResult>& results) {
    validate(config);
    const std::size_t nf = config.feature_counts.size();
    const std::size_t nt = config.train_sizes.size();
    const auto spc = static_cast<std::size_t>(config.subpoints_per_coordinate);

    std::vector<const SubpointResult*> slot(nf * nt * spc, nullptr);
    const auto coord_index = [&](const data::SplitCoordinate& c) -> std::size_t {
        for (std::size_t i = 0; i < nf; ++i) {
            if (config.feature_counts[i] != c.feature_count) continue;
            for (std::size_t j = 0; j < nt; ++j)
                if (config.train_sizes[j] == c.train_size) return i * nt + j;
        }
        return nf * nt;
    };
    for (const SubpointResult& r : results) {
        if (r.failed)
            throw std::invalid_argument("aggregate_landscape: failed subpoint f" +
                                        std::to_string(r.coordinate.feature_count) + "_t" +
                                        std::to_string(r.coordinate.train_size) + "_" +
                                        std::to_string(r.subpoint_index) + ": " + r.error);
        const std::size_t ci = coord_index(r.coordinate);
        if (ci == nf * nt || r.subpoint_index < 0 ||
            static_cast<std::size_t>(r.subpoint_index) >= spc)
            throw std::invalid_argument("aggregate_landscape: result outside the configuration space");
        const std::size_t s = ci * spc + static_cast<std::size_t>(r.subpoint_index);
        if (slot[s]) throw std::invalid_argument("aggregate_landscape: duplicate subpoint result");
        slot[s] = &r;
    }
    std::string missing;
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            for (std::size_t s = 0; s < spc; ++s)
                if (!slot[(i * nt + j) * spc + s])
                    missing += " f" + std::to_string(config.feature_counts[i]) + "_t" +
                               std::to_string(config.train_sizes[j]) + "_" + std::to_string(s);
    if (!missing.empty())
        throw std::invalid_argument("aggregate_landscape: missing subpoint results:" + missing);

    LandscapeReport report;
    report.feature_counts = config.feature_counts;
    report.train_sizes = config.train_sizes;
    report.geodiff_lambda = config.geodiff_lambda;
    report.geodiff_grid = Mat(nf, nt);
    for (int arm = 0; arm < 2; ++arm)
        for (int metric = 0; metric < 2; ++metric)
            for (int mode = 0; mode < 2; ++mode) report.grids[arm][metric][mode] = Mat(nf, nt);

    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            double geo_sum = 0.0;
            for (int arm = 0; arm < 2; ++arm) {
                for (int metric = 0; metric < 2; ++metric) {
                    for (int mode = 0; mode < 2; ++mode) {
                        double sum = 0.0;
                        for (std::size_t s = 0; s < spc; ++s)
                            sum += slot[(i * nt + j) * spc + s]->cells[arm][metric][mode].value;
                        report.grids[arm][metric][mode](i, j) =
                            sum / static_cast<double>(spc);
                    }
                }
            }
            for (std::size_t s = 0; s < spc; ++s)
                geo_sum += slot[(i * nt + j) * spc + s]->geodiff_g;
            report.geodiff_grid(i, j) = geo_sum / static_cast<double>(spc);
        }
    }

    const auto as_grid = [&](const Mat& values) {
        metrics::LandscapeGrid grid;
        grid.values = values;
        grid.feature_counts = config.feature_counts;
        grid.train_sizes = config.train_sizes;
        return grid;
    };
    for (int arm = 0; arm < 2; ++arm)
        for (int metric = 0; metric < 2; ++metric)
            for (int mode = 0; mode < 2; ++mode)
                report.terrain[arm][metric][mode] =
                    metrics::ptri_global(as_grid(report.grids[arm][metric][mode]));
    for (int metric = 0; metric < 2; ++metric)
        for (int mode = 0; mode < 2; ++mode)
            report.eqa[metric][mode] = metrics::eqa_summary(
                as_grid(report.grids[1][metric][mode]), as_grid(report.grids[0][metric][mode]));
    return report;
}

void init_run_dir(const std::filesystem::path& dir, const ConfigSpace& config) {
    std::filesystem::create_directories(dir / "subpoints");
    std::filesystem::create_directories(dir / "report");
    if (config.save_grams) std::filesystem::create_directories(dir / "grams");

    const std::filesystem::path manifest = dir / "manifest.json";
    const std::string hash = config_hash(config);
    if (std::filesystem::exists(manifest)) {
        const json j = detail::read_json_file(manifest);
        if (!j.contains("config_hash") || j.at("config_hash").get<std::string>() != hash)
            throw io_error("init_run_dir: " + dir.string() +
                           " was created with a different configuration; refusing to mix runs");
        return;
    }
    json j;
    j["tool"] = "kernelscape";
    j["format_version"] = 1;
    j["config"] = config_json(config, false);
    j["config_hash"] = hash;
    j["decisions"] = {{"candidate_scoring_reference_c", config.reference_c},
                      {"ptri_boundary_policy", "zero-padded-all-cells"},
                      {"c_and_threshold_selection", "test-block"},
                      {"quantum_kernel_mode", config.exact_kernel ? "exact" : "sampled"}};
    detail::write_file_atomic(manifest, j.dump(2) + "\n");
}

void save_plan(const std::filesystem::path& dir, const ConfigSpace& config,
               const ExperimentPlan& plan) {
    json items = json::array();
    for (const PlanItem& item : plan.items) {
        json j;
        j["feature_count"] = item.coordinate.feature_count;
        j["train_size"] = item.coordinate.train_size;
        j["subpoint_index"] = item.subpoint_index;
        j["seed"] = item.seed;
        j["split_seed"] = item.split.seed;
        j["feature_set"] = item.feature_set;
        j["train_indices"] = item.split.train_indices;
        j["test_indices"] = item.split.test_indices;
        items.push_back(j);
    }
    json j;
    j["config_hash"] = config_hash(config);
    j["items"] = items;
    detail::write_file_atomic(dir / "plan.json", j.dump(2) + "\n");
}

std::optional<ExperimentPlan> try_load_plan(const std::filesystem::path& dir,
                                            const ConfigSpace& config) {
    const std::filesystem::path path = dir / "plan.json";
    if (!std::filesystem::exists(path)) return std::nullopt;
    const json j = detail::read_json_file(path);
    if (!j.contains("config_hash") ||
        j.at("config_hash").get<std::string>() != config_hash(config))
        throw io_error("plan.json was produced by a different configuration");
    ExperimentPlan plan;
    for (const json& ji : j.at("items")) {
        PlanItem item;
        item.coordinate.feature_count = ji.at("feature_count").get<int>();
        item.coordinate.train_size = ji.at("train_size").get<int>();
        item.subpoint_index = ji.at("subpoint_index").get<int>();
        item.seed = ji.at("seed").get<std::uint64_t>();
        item.split.seed = ji.at("split_seed").get<std::uint64_t>();
        item.split.coordinate = item.coordinate;
        item.feature_set = ji.at("feature_set").get<std::vector<std::size_t>>();
        item.split.train_indices = ji.at("train_indices").get<std::vector<std::size_t>>();
        item.split.test_indices = ji.at("test_indices").get<std::vector<std::size_t>>();
        plan.items.push_back(std::move(item));
    }
    return plan;
}

void save_subpoint_result(const std::filesystem::path& dir, const PlanItem& item,
                          const SubpointResult& result) {
    json j;
    if (result.failed) {
        j["failed"] = true;
        j["error"] = result.error;
        j["coordinate"] = {{"feature_count", result.coordinate.feature_count},
                           {"train_size", result.coordinate.train_size}};
        j["subpoint_index"] = result.subpoint_index;
    } else {
        j = result_payload(result);
        j["content_hash"] = hash_hex(fnv1a(result_payload(result).dump()));
    }
    detail::write_file_atomic(subpoint_path(dir, item), j.dump(2) + "\n");
}

ResumeScan scan_run_dir(const std::filesystem::path& dir, const ExperimentPlan& plan) {
    ResumeScan scan;
    for (const PlanItem& item : plan.items) {
        const std::filesystem::path path = subpoint_path(dir, item);
        if (!std::filesystem::exists(path)) {
            scan.remainder.push_back(item);
            continue;
        }
        try {
            json j = detail::read_json_file(path);
            if (j.value("failed", false)) {
                scan.notes.push_back(item_name(item) + ": previous run failed (" +
                                     j.value("error", std::string("unknown error")) +
                                     "); re-running");
                scan.remainder.push_back(item);
                continue;
            }
            const std::string stored = j.at("content_hash").get<std::string>();
            j.erase("content_hash");
            if (hash_hex(fnv1a(j.dump())) != stored)
                throw io_error("content hash mismatch");
            SubpointResult r = result_from_json(j);
            if (r.coordinate.feature_count != item.coordinate.feature_count ||
                r.coordinate.train_size != item.coordinate.train_size ||
                r.subpoint_index != item.subpoint_index)
                throw io_error("result does not match its plan item");
            scan.completed.push_back(std::move(r));
        } catch (const std::exception& e) {
            scan.notes.push_back(item_name(item) + ": corrupt result (" + e.what() +
                                 "); re-running");
            scan.remainder.push_back(item);
        }
    }
    return scan;
}

ConfigSpace load_manifest_config(const std::filesystem::path& dir) {
    const json j = detail::read_json_file(dir / "manifest.json");
    if (!j.contains("config")) throw io_error("manifest.json has no config section");
    return config_from_json_object(j.at("config"));
}

SweepOutcome execute_sweep(const std::filesystem::path& dir, const ConfigSpace& config,
                           int parallel) {
    validate(config);
    init_run_dir(dir, config);
    const data::Dataset dataset = realize_dataset(config);

    ExperimentPlan plan;
    if (auto loaded = try_load_plan(dir, config)) {
        plan = std::move(*loaded);
    } else {
        data::ProbeConfig probe;
        probe.c = config.ranking.probe_c;
        probe.gamma = config.ranking.gamma;
        probe.holdout_fraction = config.ranking.holdout_fraction;
        const data::FeatureRanking ranking =
            data::rank_features(dataset, probe, config.ranking.repetitions,
                                derive_seed(config.master_seed, std::string_view("ranking")));
        plan = plan_experiment(config, dataset, ranking, std::max(1, parallel));
        save_plan(dir, config, plan);
    }

    ResumeScan scan = scan_run_dir(dir, plan);
    SweepOutcome outcome;
    outcome.skipped = scan.completed.size();
    outcome.notes = std::move(scan.notes);

    const std::filesystem::path grams_dir = config.save_grams ? dir / "grams" : "";
    const auto n_rest = static_cast<std::int64_t>(scan.remainder.size());
    std::vector<SubpointResult> fresh(scan.remainder.size());
    if (n_rest > 0) {
        const int budget = std::max(1, parallel);
        const int outer = static_cast<int>(
            std::min<std::int64_t>(budget, n_rest));
        const int inner = std::max(1, budget / outer);
#ifdef _OPENMP
        omp_set_max_active_levels(2);
#endif
#pragma omp parallel for num_threads(outer) schedule(dynamic)
        for (std::int64_t t = 0; t < n_rest; ++t) {
            const PlanItem& item = scan.remainder[static_cast<std::size_t>(t)];
            SubpointResult& result = fresh[static_cast<std::size_t>(t)];
            try {
                result = run_subpoint(config, dataset, item, inner, grams_dir);
            } catch (const std::exception& e) {
                result.coordinate = item.coordinate;
                result.subpoint_index = item.subpoint_index;
                result.seed = item.seed;
                result.failed = true;
                result.error = e.what();
            }
            save_subpoint_result(dir, item, result);
        }
    }

    for (SubpointResult& r : fresh) (r.failed ? outcome.failed : outcome.completed)++;

    // Results in plan order: completed from disk plus fresh ones.
    for (const PlanItem& item : plan.items) {
        const auto match = [&](const SubpointResult& r) {
            return r.coordinate.feature_count == item.coordinate.feature_count &&
                   r.coordinate.train_size == item.coordinate.train_size &&
                   r.subpoint_index == item.subpoint_index;
        };
        bool found = false;
        for (SubpointResult& r : scan.completed) {
            if (match(r)) {
                outcome.results.push_back(std::move(r));
                found = true;
                break;
            }
        }
        if (found) continue;
        for (SubpointResult& r : fresh) {
            if (match(r)) {
                outcome.results.push_back(std::move(r));
                break;
            }
        }
    }
    return outcome;
}

std::vector<SubpointResult> load_all_results(const std::filesystem::path& dir,
                                             const ExperimentPlan& plan) {
    ResumeScan scan = scan_run_dir(dir, plan);
    if (!scan.remainder.empty()) {
        std::string missing;
        for (const PlanItem& item : scan.remainder) missing += " " + item_name(item);
        throw std::invalid_argument("run is incomplete; missing subpoints:" + missing);
    }
    // scan preserves plan order for completed results.
    return scan.completed;
}

}  // namespace ks::sweep
