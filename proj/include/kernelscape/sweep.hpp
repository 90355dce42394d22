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
#include <optional>
#include <string>
#include <vector>

#include "kernelscape/data.hpp"
#include "kernelscape/kernels.hpp"
#include "kernelscape/metrics.hpp"

namespace ks::sweep {

struct SyntheticSource {
    std::size_t n = 1000;
    std::size_t dim = 20;
    double class_prior = 0.52;
    std::size_t missing_from = 10;
    double missing_rate = 0.1;
    double difficulty = 1.0;
    // Dataset seed; when absent it derives from the master seed.
    std::optional<std::uint64_t> seed;
};

struct DataSource {
    std::string csv_path;  // empty selects the synthetic source
    SyntheticSource synthetic;
};

struct RankingConfig {
    std::size_t repetitions = 5;
    double probe_c = 1.0;
    double gamma = 0.0;  // 0 selects 1/D
    double holdout_fraction = 0.3;
};

struct ConfigSpace {
    DataSource data;
    RankingConfig ranking;
    std::vector<int> feature_counts = {5, 10, 15, 20};
    std::vector<int> train_sizes = {200, 250, 300};
    int subpoints_per_coordinate = 2;
    int candidate_splits = 200;
    int test_size = 150;
    int shots = 1024;
    bool exact_kernel = false;  // quantum arm: exact overlaps instead of shots
    int feature_map_reps = 2;
    double rbf_gamma = 0.0;  // 0 selects 1/D
    double geodiff_lambda = 1e-6;
    kernels::GeoDiffVariant geodiff_variant = kernels::GeoDiffVariant::Plain;
    double threshold_step = 0.01;
    std::size_t c_grid_count = 18;
    double c_grid_min = 0.006;
    double c_grid_max = 1024.0;
    double reference_c = 1.0;  // candidate-split scoring
    std::uint64_t master_seed = 0;
    bool save_grams = false;
    // Execution-only parameters; excluded from the config identity hash.
    int parallel = 0;  // 0 = resolve from environment, else 1
    std::string out_dir;
};

void validate(const ConfigSpace& config);

// JSON round-trip with unknown-key rejection (schema documented in
// docs/config_schema.json).
ConfigSpace config_from_json(const std::string& text);
ConfigSpace config_from_json_file(const std::filesystem::path& path);
std::string config_to_json(const ConfigSpace& config);

// Hash over the experiment-defining fields only; out_dir/parallel/save_grams
// do not participate, so resuming with different execution settings is legal.
std::string config_hash(const ConfigSpace& config);

data::Dataset realize_dataset(const ConfigSpace& config);

struct PlanItem {
    data::SplitCoordinate coordinate;
    int subpoint_index = 0;
    std::uint64_t seed = 0;
    data::Subpoint split;
    std::vector<std::size_t> feature_set;  // ranked order preserved
};

struct ExperimentPlan {
    std::vector<PlanItem> items;
};

// "f<feature_count>_t<train_size>_<subpoint_index>"
std::string item_name(const PlanItem& item);

ExperimentPlan plan_experiment(const ConfigSpace& config, const data::Dataset& dataset,
                               const data::FeatureRanking& ranking, int threads = 1);

struct CellScore {
    double value = 0.0;
    double best_c = 0.0;
    double threshold = 0.0;  // NaN in predict mode
};

inline constexpr const char* kArmNames[2] = {"classical", "quantum"};
inline constexpr const char* kMetricNames[2] = {"balanced_accuracy", "f1"};
inline constexpr const char* kModeNames[2] = {"predict", "probability"};

struct SubpointResult {
    data::SplitCoordinate coordinate;
    int subpoint_index = 0;
    std::uint64_t seed = 0;
    CellScore cells[2][2][2];  // [arm][metric][mode]
    double geodiff_g = 0.0;
    double geodiff_lambda = 0.0;
    bool failed = false;
    std::string error;
};

// Full two-arm evaluation of one planned subpoint. Pure given (config,
// dataset, item); `grams_dir` non-empty additionally dumps the four Gram
// matrices as CSV.
SubpointResult run_subpoint(const ConfigSpace& config, const data::Dataset& dataset,
                            const PlanItem& item, int threads = 1,
                            const std::filesystem::path& grams_dir = {});

struct LandscapeReport {
    std::vector<int> feature_counts;
    std::vector<int> train_sizes;
    Mat grids[2][2][2];  // [arm][metric][mode], mean over subpoints
    metrics::TerrainResult terrain[2][2][2];
    metrics::EqaSummary eqa[2][2];  // [metric][mode]: quantum minus classical
    Mat geodiff_grid;               // mean geometric difference per coordinate
    double geodiff_lambda = 0.0;
};

// Requires one successful result per planned subpoint.
LandscapeReport aggregate_landscape(const ConfigSpace& config,
                                    const std::vector<SubpointResult>& results);

// --- Run-directory persistence -------------------------------------------

// manifest.json; errors with io_error when an existing manifest carries a
// different config hash.
void init_run_dir(const std::filesystem::path& dir, const ConfigSpace& config);

void save_plan(const std::filesystem::path& dir, const ConfigSpace& config,
               const ExperimentPlan& plan);
std::optional<ExperimentPlan> try_load_plan(const std::filesystem::path& dir,
                                            const ConfigSpace& config);

void save_subpoint_result(const std::filesystem::path& dir, const PlanItem& item,
                          const SubpointResult& result);

struct ResumeScan {
    std::vector<PlanItem> remainder;
    std::vector<SubpointResult> completed;
    std::vector<std::string> notes;  // corrupt or failed files, re-planned
};

// Completed results are accepted only when their content hash verifies.
ResumeScan scan_run_dir(const std::filesystem::path& dir, const ExperimentPlan& plan);

ConfigSpace load_manifest_config(const std::filesystem::path& dir);

struct SweepOutcome {
    std::size_t completed = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    std::vector<SubpointResult> results;     // plan order; includes failures
    std::vector<std::string> notes;          // resume diagnostics worth surfacing
};

// Plans (or reloads the plan), runs the remainder with `parallel` total
// threads, persists every result. Does not aggregate.
SweepOutcome execute_sweep(const std::filesystem::path& dir, const ConfigSpace& config,
                           int parallel);

// Loads every persisted result for the plan; throws listing missing names.
std::vector<SubpointResult> load_all_results(const std::filesystem::path& dir,
                                             const ExperimentPlan& plan);

}  // namespace ks::sweep
