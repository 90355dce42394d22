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

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kernelscape/data.hpp"
#include "kernelscape/errors.hpp"
#include "kernelscape/kernels.hpp"
#include "kernelscape/metrics.hpp"
#include "kernelscape/report.hpp"
#include "kernelscape/rng.hpp"
#include "kernelscape/sweep.hpp"

namespace {

using nlohmann::json;

int resolve_parallel(bool flag_given, int flag_value, int config_value) {
    if (flag_given) return flag_value;
    if (config_value > 0) return config_value;
    if (const char* env = std::getenv("KERNELSCAPE_PARALLEL")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ks::io_error("KERNELSCAPE_PARALLEL must be a positive integer");
        return static_cast<int>(v);
    }
    return 1;
}

// Plain numeric matrix: comma-separated values, `#` comments, an optional
// non-numeric header row, `.` decimal separator.
ks::Mat load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ks::io_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        bool numeric = true;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::string cell =
                line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                numeric = false;
                break;
            }
            row.push_back(v);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!numeric) {
            if (first_data_line) {
                first_data_line = false;  // header row
                continue;
            }
            throw ks::io_error(path.string() + ":" + std::to_string(lineno) +
                               ": non-numeric cell");
        }
        first_data_line = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ks::io_error(path.string() + ":" + std::to_string(lineno) +
                               ": ragged row (expected " + std::to_string(rows.front().size()) +
                               " cells, got " + std::to_string(row.size()) + ")");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ks::io_error(path.string() + ": no numeric rows");
    ks::Mat m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

void run_and_report(const std::filesystem::path& dir, const ks::sweep::ConfigSpace& config,
                    int parallel) {
    const ks::sweep::SweepOutcome outcome = ks::sweep::execute_sweep(dir, config, parallel);
    for (const std::string& note : outcome.notes) std::cerr << "note: " << note << "\n";
    std::cerr << "subpoints: " << outcome.completed << " run, " << outcome.skipped
              << " reused, " << outcome.failed << " failed\n";
    if (outcome.failed > 0) {
        std::string msg = "failed subpoints:";
        for (const ks::sweep::SubpointResult& r : outcome.results) {
            if (!r.failed) continue;
            msg += " f" + std::to_string(r.coordinate.feature_count) + "_t" +
                   std::to_string(r.coordinate.train_size) + "_" +
                   std::to_string(r.subpoint_index) + " (" + r.error + ")";
        }
        throw std::runtime_error(msg);
    }
    const ks::sweep::LandscapeReport landscape =
        ks::sweep::aggregate_landscape(config, outcome.results);
    ks::report::emit_report(dir / "report", landscape);
    std::cerr << "report written to " << (dir / "report").string() << "\n";
}

void emit_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ks::io_error("cannot open " + out_path + " for writing");
    out << text;
    if (!out) throw ks::io_error("write failed: " + out_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark quantum fidelity kernels against classical RBF kernels over a "
                 "feature-count x train-size configuration space."};
    app.require_subcommand(1);

    // gen-data ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic binary-labelled dataset");
    std::string gen_out;
    ks::sweep::SyntheticSource gen_src;
    std::uint64_t gen_seed = 0;
    gen->add_option("--out", gen_out, "Output CSV path")->required();
    gen->add_option("--n", gen_src.n, "Number of rows");
    gen->add_option("--dim", gen_src.dim, "Number of features");
    gen->add_option("--prior", gen_src.class_prior, "Positive-class share");
    gen->add_option("--missing-from", gen_src.missing_from,
                    "First feature index with missing values");
    gen->add_option("--missing-rate", gen_src.missing_rate, "Missingness rate");
    gen->add_option("--difficulty", gen_src.difficulty, "Class-separation scale");
    gen->add_option("--seed", gen_seed, "Dataset seed");
    gen->callback([&] {
        const ks::data::Dataset dataset = ks::data::generate_synthetic(
            gen_src.n, gen_src.dim, gen_src.class_prior, gen_src.missing_from,
            gen_src.missing_rate, gen_src.difficulty, gen_seed);
        ks::data::save_csv(gen_out, dataset);
        std::cerr << "wrote " << dataset.n() << " rows x " << dataset.dim() << " features to "
                  << gen_out << "\n";
    });

    // rank ----------------------------------------------------------------
    auto* rank = app.add_subcommand("rank", "Rank features by permutation importance");
    std::string rank_config;
    std::string rank_csv;
    std::string rank_out;
    std::uint64_t rank_seed = 0;
    rank->add_option("--config", rank_config, "Run configuration JSON");
    rank->add_option("--csv", rank_csv, "Dataset CSV (overrides the config data source)");
    rank->add_option("--seed", rank_seed, "Ranking seed (overrides the config master seed)");
    rank->add_option("--out", rank_out, "Output path (default: standard output)");
    rank->callback([&] {
        ks::sweep::ConfigSpace config;
        if (!rank_config.empty()) config = ks::sweep::config_from_json_file(rank_config);
        if (!rank_csv.empty()) config.data.csv_path = rank_csv;
        if (rank->count("--seed") > 0) config.master_seed = rank_seed;
        if (config.data.csv_path.empty() && rank_config.empty())
            throw ks::io_error("rank: provide --csv or --config");
        const ks::data::Dataset dataset = ks::sweep::realize_dataset(config);
        ks::data::ProbeConfig probe;
        probe.c = config.ranking.probe_c;
        probe.gamma = config.ranking.gamma;
        probe.holdout_fraction = config.ranking.holdout_fraction;
        const ks::data::FeatureRanking ranking = ks::data::rank_features(
            dataset, probe, config.ranking.repetitions,
            ks::derive_seed(config.master_seed, std::string_view("ranking")));
        json j;
        j["order"] = ranking.order;
        j["scores"] = ranking.scores;
        emit_output(j.dump(2) + "\n", rank_out);
    });

    // sweep ---------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "Run the configuration-space experiment");
    std::string sweep_config_path;
    std::string sweep_out;
    std::uint64_t sweep_seed = 0;
    int sweep_shots = 0;
    bool sweep_exact = false;
    int sweep_parallel = 0;
    sweep->add_option("--config", sweep_config_path, "Run configuration JSON")->required();
    sweep->add_option("--out", sweep_out, "Run directory (overrides the config)");
    sweep->add_option("--seed", sweep_seed, "Master seed (overrides the config)");
    sweep->add_option("--shots", sweep_shots, "Shots per sampled kernel entry");
    sweep->add_flag("--exact", sweep_exact, "Exact quantum kernel instead of shot sampling");
    sweep->add_option("--parallel", sweep_parallel, "Total worker threads");
    sweep->callback([&] {
        ks::sweep::ConfigSpace config = ks::sweep::config_from_json_file(sweep_config_path);
        if (!sweep_out.empty()) config.out_dir = sweep_out;
        if (sweep->count("--seed") > 0) config.master_seed = sweep_seed;
        if (sweep->count("--shots") > 0) config.shots = sweep_shots;
        if (sweep_exact) config.exact_kernel = true;
        if (config.out_dir.empty())
            throw ks::io_error("sweep: no run directory (set `out` in the config or pass --out)");
        const int parallel =
            resolve_parallel(sweep->count("--parallel") > 0, sweep_parallel, config.parallel);
        run_and_report(config.out_dir, config, parallel);
    });

    // resume --------------------------------------------------------------
    auto* resume = app.add_subcommand("resume", "Finish an interrupted sweep from its directory");
    std::string resume_dir;
    int resume_parallel = 0;
    resume->add_option("--out", resume_dir, "Run directory")->required();
    resume->add_option("--parallel", resume_parallel, "Total worker threads");
    resume->callback([&] {
        ks::sweep::ConfigSpace config = ks::sweep::load_manifest_config(resume_dir);
        config.out_dir = resume_dir;
        const int parallel =
            resolve_parallel(resume->count("--parallel") > 0, resume_parallel, config.parallel);
        run_and_report(resume_dir, config, parallel);
    });

    // ptri ----------------------------------------------------------------
    auto* ptri = app.add_subcommand("ptri", "Terrain ruggedness of a landscape grid");
    std::string ptri_grid;
    std::string ptri_out;
    ptri->add_option("--grid", ptri_grid, "Landscape CSV (rows x columns of scores)")->required();
    ptri->add_option("--out", ptri_out, "Output path (default: standard output)");
    ptri->callback([&] {
        ks::metrics::LandscapeGrid grid;
        grid.values = load_matrix_csv(ptri_grid);
        grid.feature_counts.resize(grid.values.rows());
        grid.train_sizes.resize(grid.values.cols());
        for (std::size_t i = 0; i < grid.feature_counts.size(); ++i)
            grid.feature_counts[i] = static_cast<int>(i + 1);
        for (std::size_t j = 0; j < grid.train_sizes.size(); ++j)
            grid.train_sizes[j] = static_cast<int>(j + 1);
        const ks::metrics::TerrainResult terrain = ks::metrics::ptri_global(grid);
        json rows = json::array();
        for (std::size_t i = 0; i < terrain.local.rows(); ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < terrain.local.cols(); ++j)
                row.push_back(terrain.local(i, j));
            rows.push_back(row);
        }
        json j;
        j["global"] = terrain.global;
        j["local"] = rows;
        emit_output(j.dump(2) + "\n", ptri_out);
    });

    // geodiff -------------------------------------------------------------
    auto* geodiff = app.add_subcommand(
        "geodiff", "Geometric difference between a classical and a quantum kernel matrix");
    std::vector<std::string> geodiff_grids;
    double geodiff_lambda = 0.0;
    bool geodiff_sandwich = false;
    std::string geodiff_out;
    geodiff
        ->add_option("--grid", geodiff_grids,
                     "Kernel matrix CSV; pass twice: classical first, quantum second")
        ->expected(2)
        ->required();
    geodiff->add_option("--lambda", geodiff_lambda, "Regularization strength");
    geodiff->add_flag("--sandwich", geodiff_sandwich,
                      "Regularization-sandwich variant of the bound");
    geodiff->add_option("--out", geodiff_out, "Output path (default: standard output)");
    geodiff->callback([&] {
        const ks::kernels::KernelMatrix kc = ks::kernels::load_gram_csv(geodiff_grids[0]);
        const ks::kernels::KernelMatrix kq = ks::kernels::load_gram_csv(geodiff_grids[1]);
        const ks::kernels::GeoDiffResult result = ks::kernels::geometric_difference(
            kc, kq, geodiff_lambda,
            geodiff_sandwich ? ks::kernels::GeoDiffVariant::Sandwich
                             : ks::kernels::GeoDiffVariant::Plain);
        json j;
        j["g"] = result.g;
        j["lambda"] = result.lambda;
        emit_output(j.dump(2) + "\n", geodiff_out);
    });

    // report --------------------------------------------------------------
    auto* report = app.add_subcommand("report", "Re-emit reports from persisted run artifacts");
    std::string report_dir;
    report->add_option("--out", report_dir, "Run directory")->required();
    report->callback([&] {
        const ks::sweep::ConfigSpace config = ks::sweep::load_manifest_config(report_dir);
        const auto plan = ks::sweep::try_load_plan(report_dir, config);
        if (!plan) throw ks::io_error("report: " + report_dir + " has no plan.json");
        const std::vector<ks::sweep::SubpointResult> results =
            ks::sweep::load_all_results(report_dir, *plan);
        const ks::sweep::LandscapeReport landscape =
            ks::sweep::aggregate_landscape(config, results);
        ks::report::emit_report(std::filesystem::path(report_dir) / "report", landscape);
        std::cerr << "report written to " << (std::filesystem::path(report_dir) / "report").string()
                  << "\n";
    });

    if (argc <= 1) {
        std::cerr << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ks::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
