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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "kernelscape/errors.hpp"
#include "kernelscape/report.hpp"
#include "kernelscape/rng.hpp"
#include "kernelscape/sweep.hpp"

namespace {

namespace fs = std::filesystem;
using ks::sweep::ConfigSpace;
using ks::sweep::SubpointResult;

ConfigSpace mini_config() {
    ConfigSpace c;
    c.data.synthetic.n = 300;
    c.data.synthetic.dim = 5;
    c.data.synthetic.missing_from = 4;
    c.data.synthetic.missing_rate = 0.1;
    c.ranking.repetitions = 2;
    c.feature_counts = {2, 3};
    c.train_sizes = {24, 32};
    c.subpoints_per_coordinate = 1;
    c.candidate_splits = 6;
    c.test_size = 24;
    c.shots = 64;
    c.c_grid_count = 4;
    c.c_grid_min = 0.1;
    c.c_grid_max = 10.0;
    c.master_seed = 9;
    return c;
}

// Unique scratch directory, removed on scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("ks_sweep_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Four synthetic results covering mini_config's 2x2 space with one subpoint
// per coordinate and distinguishable values in every cell.
std::vector<SubpointResult> hand_results(const ConfigSpace& c) {
    std::vector<SubpointResult> out;
    for (std::size_t fi = 0; fi < 2; ++fi) {
        for (std::size_t ti = 0; ti < 2; ++ti) {
            SubpointResult r;
            r.coordinate.feature_count = c.feature_counts[fi];
            r.coordinate.train_size = c.train_sizes[ti];
            r.subpoint_index = 0;
            r.seed = 100 + fi * 2 + ti;
            for (int arm = 0; arm < 2; ++arm)
                for (int metric = 0; metric < 2; ++metric)
                    for (int mode = 0; mode < 2; ++mode) {
                        auto& cell = r.cells[arm][metric][mode];
                        // dyadic summands keep every value exact in binary
                        cell.value = 0.5 + 0.125 * fi + 0.0625 * ti + 0.03125 * arm +
                                     0.015625 * metric + 0.0078125 * mode;
                        cell.best_c = 1.5;
                        cell.threshold =
                            mode == 1 ? 0.5 : std::numeric_limits<double>::quiet_NaN();
                    }
            r.geodiff_g = 1.0 + 0.25 * (fi * 2 + ti);
            r.geodiff_lambda = c.geodiff_lambda;
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("config JSON applies defaults and round-trips") {
    const ConfigSpace defaults = ks::sweep::config_from_json("{}");
    CHECK(defaults.feature_counts == std::vector<int>{5, 10, 15, 20});
    CHECK(defaults.train_sizes == std::vector<int>{200, 250, 300});
    CHECK(defaults.subpoints_per_coordinate == 2);
    CHECK(defaults.candidate_splits == 200);
    CHECK(defaults.test_size == 150);
    CHECK(defaults.shots == 1024);
    CHECK(defaults.c_grid_count == 18);
    CHECK(defaults.c_grid_min == 0.006);
    CHECK(defaults.c_grid_max == 1024.0);

    const ConfigSpace c = mini_config();
    const ConfigSpace back = ks::sweep::config_from_json(ks::sweep::config_to_json(c));
    CHECK(ks::sweep::config_hash(back) == ks::sweep::config_hash(c));
    CHECK(back.feature_counts == c.feature_counts);
    CHECK(back.data.synthetic.n == c.data.synthetic.n);
    CHECK(back.master_seed == c.master_seed);
}

TEST_CASE("config parsing rejects unknown keys at every level") {
    CHECK_THROWS_WITH_AS(ks::sweep::config_from_json(R"({"shotz": 3})"),
                         doctest::Contains("shotz"), ks::io_error);
    CHECK_THROWS_WITH_AS(ks::sweep::config_from_json(R"({"data": {"cvs": "x"}})"),
                         doctest::Contains("cvs"), ks::io_error);
    CHECK_THROWS_AS(
        ks::sweep::config_from_json(R"({"data": {"synthetic": {"count": 3}}})"),
        ks::io_error);
    CHECK_THROWS_AS(ks::sweep::config_from_json(R"({"ranking": {"reps": 3}})"), ks::io_error);
    CHECK_THROWS_AS(ks::sweep::config_from_json(R"({"c_grid": {"steps": 3}})"), ks::io_error);
    CHECK_THROWS_AS(ks::sweep::config_from_json("[1,2]"), ks::io_error);
    CHECK_THROWS_AS(ks::sweep::config_from_json(R"({"shots": "many"})"), ks::io_error);
    CHECK_THROWS_AS(
        ks::sweep::config_from_json(R"({"data": {"csv": "a.csv", "synthetic": {}}})"),
        ks::io_error);
}

TEST_CASE("config hash ignores execution-only settings") {
    const ConfigSpace base = mini_config();
    const std::string h = ks::sweep::config_hash(base);

    ConfigSpace exec = base;
    exec.parallel = 8;
    exec.out_dir = "/somewhere/else";
    exec.save_grams = true;
    CHECK(ks::sweep::config_hash(exec) == h);

    ConfigSpace shots = base;
    shots.shots = 128;
    CHECK(ks::sweep::config_hash(shots) != h);
    ConfigSpace seed = base;
    seed.master_seed = 10;
    CHECK(ks::sweep::config_hash(seed) != h);
    ConfigSpace space = base;
    space.feature_counts = {2};
    CHECK(ks::sweep::config_hash(space) != h);
}

TEST_CASE("config validation pins the structural constraints") {
    ConfigSpace c = mini_config();
    CHECK_NOTHROW(ks::sweep::validate(c));

    SUBCASE("candidate splits must cover the subpoints") {
        c.candidate_splits = 1;
        c.subpoints_per_coordinate = 2;
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
    }
    SUBCASE("threshold step must sit in (0, 1)") {
        c.threshold_step = 0.0;
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
        c.threshold_step = 1.5;
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
    }
    SUBCASE("C grid needs two ordered positive endpoints") {
        c.c_grid_count = 1;
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
        c = mini_config();
        c.c_grid_min = 10.0;
        c.c_grid_max = 0.1;
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
        c = mini_config();
        c.c_grid_min = 0.0;
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
    }
    SUBCASE("axes must be nonempty") {
        c.feature_counts.clear();
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
        c = mini_config();
        c.train_sizes.clear();
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
    }
    SUBCASE("reference C must be positive") {
        c.reference_c = 0.0;
        CHECK_THROWS_AS(ks::sweep::validate(c), std::invalid_argument);
    }
}

TEST_CASE("experiment planning lays out the full configuration space") {
    const ConfigSpace c = mini_config();
    const ks::data::Dataset dataset = ks::sweep::realize_dataset(c);
    const ks::data::FeatureRanking ranking =
        ks::data::rank_features(dataset, ks::data::ProbeConfig{}, c.ranking.repetitions,
                                ks::derive_seed(c.master_seed, "ranking"));
    const ks::sweep::ExperimentPlan plan = ks::sweep::plan_experiment(c, dataset, ranking);
    REQUIRE(plan.items.size() == 4);  // 2 feature counts x 2 train sizes x 1 subpoint

    std::set<std::string> names;
    for (const auto& item : plan.items) names.insert(ks::sweep::item_name(item));
    CHECK(names == std::set<std::string>{"f2_t24_0", "f2_t32_0", "f3_t24_0", "f3_t32_0"});

    for (const auto& item : plan.items) {
        const std::size_t fc = static_cast<std::size_t>(item.coordinate.feature_count);
        REQUIRE(item.feature_set.size() == fc);
        // the feature set is the ranked prefix, order preserved
        for (std::size_t k = 0; k < fc; ++k) CHECK(item.feature_set[k] == ranking.order[k]);
        CHECK(item.split.train_indices.size() ==
              static_cast<std::size_t>(item.coordinate.train_size));
        CHECK(item.split.test_indices.size() == static_cast<std::size_t>(c.test_size));
    }

    SUBCASE("plan is deterministic and thread-count independent") {
        const ks::sweep::ExperimentPlan again = ks::sweep::plan_experiment(c, dataset, ranking);
        const ks::sweep::ExperimentPlan wide =
            ks::sweep::plan_experiment(c, dataset, ranking, 4);
        REQUIRE(again.items.size() == plan.items.size());
        REQUIRE(wide.items.size() == plan.items.size());
        for (std::size_t i = 0; i < plan.items.size(); ++i) {
            CHECK(again.items[i].seed == plan.items[i].seed);
            CHECK(again.items[i].split.train_indices == plan.items[i].split.train_indices);
            CHECK(wide.items[i].split.train_indices == plan.items[i].split.train_indices);
            CHECK(wide.items[i].split.test_indices == plan.items[i].split.test_indices);
        }
    }
    SUBCASE("subpoint seeds are pairwise distinct") {
        std::set<std::uint64_t> seeds;
        for (const auto& item : plan.items) seeds.insert(item.seed);
        CHECK(seeds.size() == plan.items.size());
    }
}

TEST_CASE("subpoint evaluation is deterministic across thread counts") {
    const ConfigSpace c = mini_config();
    const ks::data::Dataset dataset = ks::sweep::realize_dataset(c);
    const ks::data::FeatureRanking ranking =
        ks::data::rank_features(dataset, ks::data::ProbeConfig{}, c.ranking.repetitions,
                                ks::derive_seed(c.master_seed, "ranking"));
    const ks::sweep::ExperimentPlan plan = ks::sweep::plan_experiment(c, dataset, ranking);
    const SubpointResult serial = ks::sweep::run_subpoint(c, dataset, plan.items[0], 1);
    const SubpointResult wide = ks::sweep::run_subpoint(c, dataset, plan.items[0], 4);
    REQUIRE(!serial.failed);
    REQUIRE(!wide.failed);
    for (int arm = 0; arm < 2; ++arm)
        for (int metric = 0; metric < 2; ++metric)
            for (int mode = 0; mode < 2; ++mode) {
                const auto& a = serial.cells[arm][metric][mode];
                const auto& b = wide.cells[arm][metric][mode];
                CHECK(a.value == b.value);
                CHECK(a.best_c == b.best_c);
                // NaN threshold in predict mode on both sides
                CHECK((a.threshold == b.threshold ||
                       (std::isnan(a.threshold) && std::isnan(b.threshold))));
                CHECK(a.value >= 0.0);
                CHECK(a.value <= 1.0);
            }
    CHECK(serial.geodiff_g == wide.geodiff_g);
    CHECK(serial.geodiff_g > 0.0);
}

TEST_CASE("landscape aggregation averages subpoints per cell") {
    ConfigSpace c = mini_config();
    std::vector<SubpointResult> results = hand_results(c);
    const ks::sweep::LandscapeReport report = ks::sweep::aggregate_landscape(c, results);

    CHECK(report.feature_counts == c.feature_counts);
    CHECK(report.train_sizes == c.train_sizes);
    // single subpoint per coordinate: the mean equals the hand value
    CHECK(report.grids[0][0][0](0, 0) == 0.5);
    CHECK(report.grids[1][0][0](0, 0) == 0.53125);
    CHECK(report.grids[0][0][0](1, 1) == 0.6875);
    CHECK(report.geodiff_grid(0, 1) == 1.25);

    SUBCASE("advantage summary is quantum minus classical") {
        for (int metric = 0; metric < 2; ++metric)
            for (int mode = 0; mode < 2; ++mode) {
                const auto& eqa = report.eqa[metric][mode];
                for (std::size_t i = 0; i < 2; ++i)
                    for (std::size_t j = 0; j < 2; ++j)
                        CHECK(eqa.delta(i, j) ==
                              doctest::Approx(report.grids[1][metric][mode](i, j) -
                                              report.grids[0][metric][mode](i, j))
                                  .epsilon(1e-15));
                // quantum arm offset +0.03125 everywhere
                CHECK(eqa.fraction_positive == 1.0);
            }
    }
    SUBCASE("terrain is attached for every grid") {
        for (int arm = 0; arm < 2; ++arm)
            for (int metric = 0; metric < 2; ++metric)
                for (int mode = 0; mode < 2; ++mode) {
                    CHECK(report.terrain[arm][metric][mode].local.rows() == 2);
                    CHECK(report.terrain[arm][metric][mode].global > 0.0);
                }
    }
    SUBCASE("two subpoints at one coordinate are averaged") {
        c.subpoints_per_coordinate = 2;
        std::vector<SubpointResult> twice = hand_results(c);
        for (const SubpointResult& r : hand_results(c)) {
            SubpointResult shifted = r;
            shifted.subpoint_index = 1;
            for (int arm = 0; arm < 2; ++arm)
                for (int metric = 0; metric < 2; ++metric)
                    for (int mode = 0; mode < 2; ++mode)
                        shifted.cells[arm][metric][mode].value += 0.125;
            twice.push_back(shifted);
        }
        const ks::sweep::LandscapeReport avg = ks::sweep::aggregate_landscape(c, twice);
        CHECK(avg.grids[0][0][0](0, 0) == 0.5625);
    }
}

TEST_CASE("landscape aggregation rejects incomplete or inconsistent inputs") {
    const ConfigSpace c = mini_config();
    std::vector<SubpointResult> results = hand_results(c);

    SUBCASE("missing subpoint") {
        results.pop_back();
        CHECK_THROWS_WITH_AS(ks::sweep::aggregate_landscape(c, results),
                             doctest::Contains("f3_t32_0"), std::invalid_argument);
    }
    SUBCASE("failed subpoint") {
        results[1].failed = true;
        results[1].error = "boom";
        CHECK_THROWS_AS(ks::sweep::aggregate_landscape(c, results), std::invalid_argument);
    }
    SUBCASE("duplicate subpoint") {
        results.push_back(results[0]);
        CHECK_THROWS_AS(ks::sweep::aggregate_landscape(c, results), std::invalid_argument);
    }
    SUBCASE("coordinate outside the space") {
        results[0].coordinate.feature_count = 99;
        CHECK_THROWS_AS(ks::sweep::aggregate_landscape(c, results), std::invalid_argument);
    }
}

TEST_CASE("run directory persistence round-trips plans and results") {
    const TempDir dir("persist");
    ConfigSpace c = mini_config();
    c.out_dir = dir.path.string();
    ks::sweep::init_run_dir(dir.path, c);
    CHECK(fs::exists(dir.path / "manifest.json"));
    CHECK(fs::is_directory(dir.path / "subpoints"));

    const ks::data::Dataset dataset = ks::sweep::realize_dataset(c);
    const ks::data::FeatureRanking ranking =
        ks::data::rank_features(dataset, ks::data::ProbeConfig{}, c.ranking.repetitions,
                                ks::derive_seed(c.master_seed, "ranking"));
    const ks::sweep::ExperimentPlan plan = ks::sweep::plan_experiment(c, dataset, ranking);
    ks::sweep::save_plan(dir.path, c, plan);

    SUBCASE("plan reload preserves every item") {
        const auto loaded = ks::sweep::try_load_plan(dir.path, c);
        REQUIRE(loaded.has_value());
        REQUIRE(loaded->items.size() == plan.items.size());
        for (std::size_t i = 0; i < plan.items.size(); ++i) {
            CHECK(loaded->items[i].seed == plan.items[i].seed);
            CHECK(loaded->items[i].feature_set == plan.items[i].feature_set);
            CHECK(loaded->items[i].split.train_indices == plan.items[i].split.train_indices);
            CHECK(loaded->items[i].split.test_indices == plan.items[i].split.test_indices);
            CHECK(loaded->items[i].split.seed == plan.items[i].split.seed);
        }
    }
    SUBCASE("plan from a different configuration is refused") {
        ConfigSpace other = c;
        other.master_seed = 123;
        CHECK_THROWS_AS(ks::sweep::try_load_plan(dir.path, other), ks::io_error);
    }
    SUBCASE("manifest config reload and hash guard") {
        const ConfigSpace back = ks::sweep::load_manifest_config(dir.path);
        CHECK(ks::sweep::config_hash(back) == ks::sweep::config_hash(c));
        CHECK_NOTHROW(ks::sweep::init_run_dir(dir.path, c));  // idempotent
        ConfigSpace other = c;
        other.shots = 999;
        CHECK_THROWS_AS(ks::sweep::init_run_dir(dir.path, other), ks::io_error);
    }
    SUBCASE("result files verify their content hash") {
        const std::vector<SubpointResult> results = hand_results(c);
        for (std::size_t i = 0; i < plan.items.size(); ++i) {
            // hand_results orders coordinates the same way the plan does
            REQUIRE(results[i].coordinate.feature_count ==
                    plan.items[i].coordinate.feature_count);
            REQUIRE(results[i].coordinate.train_size == plan.items[i].coordinate.train_size);
            ks::sweep::save_subpoint_result(dir.path, plan.items[i], results[i]);
        }
        ks::sweep::ResumeScan scan = ks::sweep::scan_run_dir(dir.path, plan);
        CHECK(scan.remainder.empty());
        CHECK(scan.notes.empty());
        REQUIRE(scan.completed.size() == 4);
        CHECK(scan.completed[0].cells[0][0][0].value == results[0].cells[0][0][0].value);
        CHECK(std::isnan(scan.completed[0].cells[0][0][0].threshold));

        // flip one byte in a stored value: the hash no longer verifies
        const fs::path victim = dir.path / "subpoints" / "f2_t24_0.json";
        std::string text = slurp(victim);
        const auto pos = text.find("0.5");
        REQUIRE(pos != std::string::npos);
        text[pos + 2] = '6';
        std::ofstream(victim, std::ios::binary) << text;
        scan = ks::sweep::scan_run_dir(dir.path, plan);
        CHECK(scan.remainder.size() == 1);
        CHECK(scan.completed.size() == 3);
        REQUIRE(scan.notes.size() == 1);
        CHECK(scan.notes[0].find("f2_t24_0") != std::string::npos);

        // load_all_results refuses while any subpoint is unusable
        CHECK_THROWS_WITH_AS(ks::sweep::load_all_results(dir.path, plan),
                             doctest::Contains("f2_t24_0"), std::invalid_argument);
    }
    SUBCASE("failed results are noted and re-planned") {
        SubpointResult bad;
        bad.coordinate = plan.items[0].coordinate;
        bad.subpoint_index = plan.items[0].subpoint_index;
        bad.failed = true;
        bad.error = "synthetic failure";
        ks::sweep::save_subpoint_result(dir.path, plan.items[0], bad);
        const ks::sweep::ResumeScan scan = ks::sweep::scan_run_dir(dir.path, plan);
        CHECK(scan.remainder.size() == 4);  // 1 failed + 3 never run
        REQUIRE_FALSE(scan.notes.empty());
        CHECK(scan.notes[0].find("synthetic failure") != std::string::npos);
    }
}

TEST_CASE("sweep execution completes, resumes and reproduces bytes") {
    ConfigSpace c = mini_config();
    const TempDir dir("exec");

    const ks::sweep::SweepOutcome first = ks::sweep::execute_sweep(dir.path, c, 1);
    CHECK(first.completed == 4);
    CHECK(first.skipped == 0);
    CHECK(first.failed == 0);
    REQUIRE(first.results.size() == 4);

    SUBCASE("second run reuses every stored subpoint") {
        const ks::sweep::SweepOutcome second = ks::sweep::execute_sweep(dir.path, c, 1);
        CHECK(second.completed == 0);
        CHECK(second.skipped == 4);
        REQUIRE(second.results.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(second.results[i].seed == first.results[i].seed);
            CHECK(second.results[i].cells[1][0][0].value ==
                  first.results[i].cells[1][0][0].value);
        }
    }
    SUBCASE("deleting one file resumes exactly that subpoint") {
        fs::remove(dir.path / "subpoints" / "f3_t24_0.json");
        const ks::sweep::SweepOutcome resumed = ks::sweep::execute_sweep(dir.path, c, 1);
        CHECK(resumed.completed == 1);
        CHECK(resumed.skipped == 3);
        const auto report = ks::sweep::aggregate_landscape(c, resumed.results);
        CHECK(report.grids[0][0][0].rows() == 2);
    }
    SUBCASE("a parallel fresh run produces identical result files") {
        const TempDir dir2("exec_par");
        const ks::sweep::SweepOutcome wide = ks::sweep::execute_sweep(dir2.path, c, 8);
        CHECK(wide.completed == 4);
        for (const char* name : {"f2_t24_0", "f2_t32_0", "f3_t24_0", "f3_t32_0"}) {
            const fs::path rel = fs::path("subpoints") / (std::string(name) + ".json");
            CHECK(slurp(dir.path / rel) == slurp(dir2.path / rel));
        }
        CHECK(slurp(dir.path / "plan.json") == slurp(dir2.path / "plan.json"));
    }
}

TEST_CASE("landscape CSV is long-format and fully ordered") {
    const ConfigSpace c = mini_config();
    const ks::sweep::LandscapeReport report =
        ks::sweep::aggregate_landscape(c, hand_results(c));
    const std::string csv = ks::report::landscape_csv(report);

    std::vector<std::string> lines;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    REQUIRE(lines.size() == 33);  // header + 2*2 coordinates * 8 cells
    CHECK(lines[0] == "feature_count,train_size,arm,metric,mode,value");
    CHECK(lines[1] == "2,24,classical,balanced_accuracy,predict,0.5");
    CHECK(lines[2] == "2,24,classical,balanced_accuracy,probability,0.5078125");
    CHECK(lines[5] == "2,24,quantum,balanced_accuracy,predict,0.53125");
    // last row: largest coordinate, quantum arm, f1 metric, probability mode
    CHECK(lines[32].rfind("3,32,quantum,f1,probability,", 0) == 0);
}

TEST_CASE("advantage and terrain JSON reports parse back") {
    const ConfigSpace c = mini_config();
    const ks::sweep::LandscapeReport report =
        ks::sweep::aggregate_landscape(c, hand_results(c));

    const nlohmann::json eqa = nlohmann::json::parse(ks::report::eqa_json_text(report));
    CHECK(eqa.at("feature_counts") == nlohmann::json({2, 3}));
    CHECK(eqa.at("train_sizes") == nlohmann::json({24, 32}));
    for (const char* metric : {"balanced_accuracy", "f1"})
        for (const char* mode : {"predict", "probability"}) {
            const nlohmann::json& cell = eqa.at(metric).at(mode);
            CHECK(cell.at("fraction_positive").get<double>() == 1.0);
            CHECK(cell.at("delta").size() == 2);
            CHECK(cell.at("delta")[0].size() == 2);
            REQUIRE(cell.at("series").size() == 2);
            CHECK(cell.at("series")[0].at("train_size").get<int>() == 24);
            CHECK(cell.at("series")[0].at("deltas").size() == 2);
        }
    CHECK(eqa.at("geometric_difference").at("lambda").get<double>() == c.geodiff_lambda);
    CHECK(eqa.at("geometric_difference").at("grid")[0][1].get<double>() == 1.25);

    const nlohmann::json terrain = nlohmann::json::parse(ks::report::terrain_json_text(report));
    CHECK(terrain.at("boundary_policy").get<std::string>() == "zero-padded-all-cells");
    REQUIRE(terrain.at("grids").size() == 8);
    const nlohmann::json& g0 = terrain.at("grids")[0];
    CHECK(g0.at("arm").get<std::string>() == "classical");
    CHECK(g0.at("metric").get<std::string>() == "balanced_accuracy");
    CHECK(g0.at("mode").get<std::string>() == "predict");
    CHECK(g0.at("local").size() == 2);
    CHECK(g0.at("global").get<double>() == doctest::Approx(report.terrain[0][0][0].global));
}

TEST_CASE("heatmap SVG output is deterministic and validated") {
    ks::Mat values(2, 3);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            values(i, j) = 0.1 * static_cast<double>(i * 3 + j) - 0.1;
    const std::vector<int> fcs = {5, 10};
    const std::vector<int> tss = {100, 200, 300};

    const std::string a =
        ks::report::heatmap_svg(values, fcs, tss, "demo", ks::report::HeatmapStyle::Sequential);
    const std::string b =
        ks::report::heatmap_svg(values, fcs, tss, "demo", ks::report::HeatmapStyle::Sequential);
    CHECK(a == b);
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("demo") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    // one labeled rect per cell
    std::size_t rects = 0;
    for (std::size_t pos = a.find("<rect"); pos != std::string::npos;
         pos = a.find("<rect", pos + 1))
        ++rects;
    CHECK(rects >= 6);

    const std::string diverging =
        ks::report::heatmap_svg(values, fcs, tss, "demo", ks::report::HeatmapStyle::Diverging);
    CHECK(diverging != a);

    CHECK_THROWS_AS(
        ks::report::heatmap_svg(values, std::vector<int>{5}, tss, "demo",
                                ks::report::HeatmapStyle::Sequential),
        std::invalid_argument);
}

TEST_CASE("report emission writes a complete, reproducible inventory") {
    const ConfigSpace c = mini_config();
    const ks::sweep::LandscapeReport report =
        ks::sweep::aggregate_landscape(c, hand_results(c));
    const TempDir dir("report");
    const fs::path rdir = dir.path / "report";
    ks::report::emit_report(rdir, report);

    const std::vector<std::string> expected = {
        "landscape.csv", "eqa.json", "terrain.json", "geodiff.svg"};
    for (const std::string& name : expected) CHECK(fs::exists(rdir / name));
    std::size_t svg_count = 0;
    for (const auto& entry : fs::directory_iterator(rdir))
        if (entry.path().extension() == ".svg") ++svg_count;
    CHECK(svg_count == 21);  // 8 landscapes + 8 terrains + 4 deltas + geodiff
    for (const char* arm : {"classical", "quantum"})
        for (const char* metric : {"balanced_accuracy", "f1"})
            for (const char* mode : {"predict", "probability"}) {
                const std::string tail = std::string(arm) + "_" + metric + "_" + mode + ".svg";
                CHECK(fs::exists(rdir / ("landscape_" + tail)));
                CHECK(fs::exists(rdir / ("terrain_" + tail)));
            }

    SUBCASE("re-emission reproduces every byte") {
        std::map<std::string, std::string> before;
        for (const auto& entry : fs::directory_iterator(rdir))
            before[entry.path().filename().string()] = slurp(entry.path());
        ks::report::emit_report(rdir, report);
        for (const auto& [name, bytes] : before) CHECK(slurp(rdir / name) == bytes);
    }
}
