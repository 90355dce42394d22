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

#include "kernelscape/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "jsonio.hpp"

namespace ks::report {
namespace {

using nlohmann::json;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

json matrix_rows(const Mat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

void check_report(const sweep::LandscapeReport& r) {
    const std::size_t nf = r.feature_counts.size();
    const std::size_t nt = r.train_sizes.size();
    if (nf == 0 || nt == 0)
        throw std::invalid_argument("report: empty configuration axes");
    for (const auto& per_arm : r.grids)
        for (const auto& per_metric : per_arm)
            for (const Mat& g : per_metric)
                if (g.rows() != nf || g.cols() != nt)
                    throw std::invalid_argument("report: grid shape mismatch");
    if (r.geodiff_grid.rows() != nf || r.geodiff_grid.cols() != nt)
        throw std::invalid_argument("report: geometric-difference grid shape mismatch");
}

struct Rgb {
    double r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

std::string rgb_attr(const Rgb& c) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", static_cast<int>(std::llround(c.r)),
                  static_cast<int>(std::llround(c.g)), static_cast<int>(std::llround(c.b)));
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace

std::string landscape_csv(const sweep::LandscapeReport& report) {
    check_report(report);
    std::string out = "feature_count,train_size,arm,metric,mode,value\n";
    char buf[128];
    for (std::size_t i = 0; i < report.feature_counts.size(); ++i) {
        for (std::size_t j = 0; j < report.train_sizes.size(); ++j) {
            for (int arm = 0; arm < 2; ++arm) {
                for (int metric = 0; metric < 2; ++metric) {
                    for (int mode = 0; mode < 2; ++mode) {
                        std::snprintf(buf, sizeof(buf), "%d,%d,%s,%s,%s,%.17g\n",
                                      report.feature_counts[i], report.train_sizes[j],
                                      sweep::kArmNames[arm], sweep::kMetricNames[metric],
                                      sweep::kModeNames[mode],
                                      report.grids[arm][metric][mode](i, j));
                        out += buf;
                    }
                }
            }
        }
    }
    return out;
}

std::string eqa_json_text(const sweep::LandscapeReport& report) {
    check_report(report);
    json j;
    j["feature_counts"] = report.feature_counts;
    j["train_sizes"] = report.train_sizes;
    for (int metric = 0; metric < 2; ++metric) {
        json per_metric;
        for (int mode = 0; mode < 2; ++mode) {
            const metrics::EqaSummary& eqa = report.eqa[metric][mode];
            json series = json::array();
            for (std::size_t t = 0; t < eqa.series.size(); ++t) {
                series.push_back({{"train_size", report.train_sizes[t]},
                                  {"deltas", eqa.series[t]}});
            }
            per_metric[sweep::kModeNames[mode]] = {{"delta", matrix_rows(eqa.delta)},
                                                   {"fraction_positive", eqa.fraction_positive},
                                                   {"series", series}};
        }
        j[sweep::kMetricNames[metric]] = per_metric;
    }
    j["geometric_difference"] = {{"lambda", report.geodiff_lambda},
                                 {"grid", matrix_rows(report.geodiff_grid)}};
    return j.dump(2) + "\n";
}

std::string terrain_json_text(const sweep::LandscapeReport& report) {
    check_report(report);
    json grids = json::array();
    for (int arm = 0; arm < 2; ++arm) {
        for (int metric = 0; metric < 2; ++metric) {
            for (int mode = 0; mode < 2; ++mode) {
                const metrics::TerrainResult& t = report.terrain[arm][metric][mode];
                grids.push_back({{"arm", sweep::kArmNames[arm]},
                                 {"metric", sweep::kMetricNames[metric]},
                                 {"mode", sweep::kModeNames[mode]},
                                 {"local", matrix_rows(t.local)},
                                 {"global", t.global}});
            }
        }
    }
    json j;
    j["feature_counts"] = report.feature_counts;
    j["train_sizes"] = report.train_sizes;
    j["boundary_policy"] = "zero-padded-all-cells";
    j["grids"] = grids;
    return j.dump(2) + "\n";
}

std::string heatmap_svg(const Mat& values, std::span<const int> feature_counts,
                        std::span<const int> train_sizes, const std::string& title,
                        HeatmapStyle style) {
    const std::size_t nf = feature_counts.size();
    const std::size_t nt = train_sizes.size();
    if (values.rows() != nf || values.cols() != nt)
        throw std::invalid_argument("heatmap_svg: value shape does not match the axes");

    constexpr int kCellW = 84;
    constexpr int kCellH = 44;
    constexpr int kLeft = 76;
    constexpr int kTop = 40;
    constexpr int kRight = 16;
    constexpr int kBottom = 44;
    const int width = kLeft + static_cast<int>(nt) * kCellW + kRight;
    const int height = kTop + static_cast<int>(nf) * kCellH + kBottom;

    double vmin = values(0, 0);
    double vmax = values(0, 0);
    double vabs = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            vmin = std::min(vmin, values(i, j));
            vmax = std::max(vmax, values(i, j));
            vabs = std::max(vabs, std::abs(values(i, j)));
        }
    }

    constexpr Rgb kWhite = {247.0, 251.0, 255.0};
    constexpr Rgb kBlueDeep = {8.0, 48.0, 107.0};
    constexpr Rgb kBlueNeg = {33.0, 102.0, 172.0};
    constexpr Rgb kRedPos = {178.0, 24.0, 43.0};
    const auto cell_color = [&](double v) -> Rgb {
        if (style == HeatmapStyle::Sequential) {
            const double span = vmax - vmin;
            const double t = span > 0.0 ? (v - vmin) / span : 0.5;
            return lerp(kWhite, kBlueDeep, t);
        }
        if (vabs == 0.0) return kWhite;
        const double t = v / vabs;
        return t < 0.0 ? lerp(kWhite, kBlueNeg, -t) : lerp(kWhite, kRedPos, t);
    };

    char buf[512];
    std::string svg;
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  width, height, width, height);
    svg += buf;
    svg += "<style>text{font-family:Helvetica,Arial,sans-serif;}</style>\n";
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"0\" y=\"0\" width=\"%d\" height=\"%d\" fill=\"white\"/>\n", width,
                  height);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"24\" font-size=\"15\" fill=\"#111111\">%s</text>\n", kLeft,
                  escape_xml(title).c_str());
    svg += buf;

    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const double v = values(i, j);
            const Rgb c = cell_color(v);
            const int x = kLeft + static_cast<int>(j) * kCellW;
            const int y = kTop + static_cast<int>(i) * kCellH;
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\" "
                          "stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
                          x, y, kCellW, kCellH, rgb_attr(c).c_str());
            svg += buf;
            const double luma = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\" "
                          "fill=\"%s\">%s</text>\n",
                          x + kCellW / 2, y + kCellH / 2 + 4,
                          luma < 140.0 ? "#ffffff" : "#111111", fmt("%.3f", v).c_str());
            svg += buf;
        }
    }

    for (std::size_t i = 0; i < nf; ++i) {
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"end\" "
                      "fill=\"#111111\">f=%d</text>\n",
                      kLeft - 8, kTop + static_cast<int>(i) * kCellH + kCellH / 2 + 4,
                      feature_counts[i]);
        svg += buf;
    }
    for (std::size_t j = 0; j < nt; ++j) {
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\" "
                      "fill=\"#111111\">%d</text>\n",
                      kLeft + static_cast<int>(j) * kCellW + kCellW / 2,
                      kTop + static_cast<int>(nf) * kCellH + 18, train_sizes[j]);
        svg += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\" "
                  "fill=\"#555555\">train size</text>\n",
                  kLeft + static_cast<int>(nt) * kCellW / 2,
                  kTop + static_cast<int>(nf) * kCellH + 36);
    svg += buf;
    svg += "</svg>\n";
    return svg;
}

void emit_report(const std::filesystem::path& report_dir, const sweep::LandscapeReport& report) {
    check_report(report);
    std::filesystem::create_directories(report_dir);
    detail::write_file_atomic(report_dir / "landscape.csv", landscape_csv(report));
    detail::write_file_atomic(report_dir / "eqa.json", eqa_json_text(report));
    detail::write_file_atomic(report_dir / "terrain.json", terrain_json_text(report));

    const auto name = [](const char* prefix, int arm, int metric, int mode) {
        std::string s = prefix;
        if (arm >= 0) s += std::string("_") + sweep::kArmNames[arm];
        s += std::string("_") + sweep::kMetricNames[metric] + "_" + sweep::kModeNames[mode];
        return s + ".svg";
    };
    const auto title = [](const char* what, int arm, int metric, int mode) {
        std::string s = what;
        if (arm >= 0) s += std::string(", ") + sweep::kArmNames[arm];
        s += std::string(", ") + sweep::kMetricNames[metric] + ", " + sweep::kModeNames[mode];
        return s;
    };
    for (int arm = 0; arm < 2; ++arm) {
        for (int metric = 0; metric < 2; ++metric) {
            for (int mode = 0; mode < 2; ++mode) {
                detail::write_file_atomic(
                    report_dir / name("landscape", arm, metric, mode),
                    heatmap_svg(report.grids[arm][metric][mode], report.feature_counts,
                                report.train_sizes, title("landscape", arm, metric, mode),
                                HeatmapStyle::Sequential));
                detail::write_file_atomic(
                    report_dir / name("terrain", arm, metric, mode),
                    heatmap_svg(report.terrain[arm][metric][mode].local, report.feature_counts,
                                report.train_sizes, title("terrain", arm, metric, mode),
                                HeatmapStyle::Sequential));
            }
        }
    }
    for (int metric = 0; metric < 2; ++metric) {
        for (int mode = 0; mode < 2; ++mode) {
            detail::write_file_atomic(
                report_dir / name("delta", -1, metric, mode),
                heatmap_svg(report.eqa[metric][mode].delta, report.feature_counts,
                            report.train_sizes, title("advantage delta", -1, metric, mode),
                            HeatmapStyle::Diverging));
        }
    }
    detail::write_file_atomic(
        report_dir / "geodiff.svg",
        heatmap_svg(report.geodiff_grid, report.feature_counts, report.train_sizes,
                    "geometric difference", HeatmapStyle::Sequential));
}

}  // namespace ks::report
