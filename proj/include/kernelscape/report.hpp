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

#include <filesystem>
#include <span>
#include <string>

#include "kernelscape/sweep.hpp"

namespace ks::report {

// Long format: header `feature_count,train_size,arm,metric,mode,value`, one
// row per coordinate x arm x metric x mode, ordered feature count, train
// size, arm, metric, mode.
std::string landscape_csv(const sweep::LandscapeReport& report);

// Deltas, fraction-positive and per-train-size series for each metric/mode,
// plus the geometric-difference grid.
std::string eqa_json_text(const sweep::LandscapeReport& report);

// Local and global terrain ruggedness for all eight landscape grids.
std::string terrain_json_text(const sweep::LandscapeReport& report);

enum class HeatmapStyle {
    Sequential,  // white to blue over [min, max]
    Diverging,   // blue below zero, white at zero, red above; symmetric range
};

// Handwritten rectangle heatmap; output depends only on the arguments.
std::string heatmap_svg(const Mat& values, std::span<const int> feature_counts,
                        std::span<const int> train_sizes, const std::string& title,
                        HeatmapStyle style);

// Writes landscape.csv, eqa.json, terrain.json and one SVG heatmap per grid
// (8 landscapes, 4 deltas, 8 terrains, 1 geometric difference) into
// `report_dir`, creating it if needed. Every file is written atomically and
// is byte-identical across re-emissions of the same report.
void emit_report(const std::filesystem::path& report_dir, const sweep::LandscapeReport& report);

}  // namespace ks::report
