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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <doctest.h>

#include "kernelscape/data.hpp"
#include "kernelscape/errors.hpp"
#include "kernelscape/rng.hpp"

namespace {

using ks::Mat;
using ks::data::Dataset;

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

int count_positive(const Dataset& d) {
    return static_cast<int>(std::count(d.labels.begin(), d.labels.end(), 1));
}

// Labels driven by feature 0 alone; features 1..D-1 pure noise.
Dataset planted_dataset(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Dataset d;
    d.features = Mat(n, dim);
    d.missing_mask.assign(n * dim, 0);
    d.labels.resize(n);
    d.feature_names.resize(dim);
    for (std::size_t c = 0; c < dim; ++c) d.feature_names[c] = "f" + std::to_string(c);
    ks::Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        d.labels[i] = i % 2 == 0 ? 1 : -1;
        d.features(i, 0) = d.labels[i] * 1.5 + 0.3 * rng.next_normal();
        for (std::size_t c = 1; c < dim; ++c) d.features(i, c) = rng.next_normal();
    }
    return d;
}

}  // namespace

TEST_CASE("synthetic generation pins the label counts exactly") {
    const Dataset d = ks::data::generate_synthetic(1000, 20, 0.52, 10, 0.1, 1.0, 3);
    CHECK(d.n() == 1000);
    CHECK(d.dim() == 20);
    CHECK(count_positive(d) == 520);
    ks::data::validate(d);

    SUBCASE("rounding clamps away degenerate labelings") {
        const Dataset tiny = ks::data::generate_synthetic(10, 2, 0.99, 2, 0.0, 1.0, 4);
        CHECK(count_positive(tiny) == 9);  // llround(9.9) = 10, clamped to n-1
        const Dataset low = ks::data::generate_synthetic(10, 2, 0.001, 2, 0.0, 1.0, 4);
        CHECK(count_positive(low) == 1);
    }
}

TEST_CASE("synthetic generation is a pure function of the seed") {
    const Dataset a = ks::data::generate_synthetic(200, 6, 0.5, 3, 0.2, 1.0, 11);
    const Dataset b = ks::data::generate_synthetic(200, 6, 0.5, 3, 0.2, 1.0, 11);
    const Dataset c = ks::data::generate_synthetic(200, 6, 0.5, 3, 0.2, 1.0, 12);
    CHECK(a.labels == b.labels);
    CHECK(a.missing_mask == b.missing_mask);
    // cell-wise: missing cells hold NaN, which never compares equal to itself
    bool same = true;
    bool differs_from_c = false;
    for (std::size_t i = 0; i < a.n(); ++i)
        for (std::size_t k = 0; k < a.dim(); ++k) {
            if (!a.missing(i, k) && a.features(i, k) != b.features(i, k)) same = false;
            if (a.missing(i, k) != b.missing(i, k)) same = false;
            if (!a.missing(i, k) && !c.missing(i, k) &&
                a.features(i, k) != c.features(i, k))
                differs_from_c = true;
        }
    CHECK(same);
    CHECK(differs_from_c);
}

TEST_CASE("missingness is confined to the configured tail features") {
    const Dataset d = ks::data::generate_synthetic(1000, 20, 0.52, 10, 0.1, 1.0, 5);
    std::size_t tail_missing = 0;
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t c = 0; c < d.dim(); ++c) {
            if (c < 10) {
                CHECK(!d.missing(i, c));
            } else if (d.missing(i, c)) {
                ++tail_missing;
                CHECK(std::isnan(d.features(i, c)));
            }
        }
    }
    // 10000 tail cells at rate 0.1; allow 5 sigma.
    const double share = static_cast<double>(tail_missing) / 10000.0;
    CHECK(std::abs(share - 0.1) < 5.0 * std::sqrt(0.1 * 0.9 / 10000.0));
}

TEST_CASE("per-feature class separation decays with the feature index") {
    const Dataset d = ks::data::generate_synthetic(4000, 10, 0.5, 10, 0.0, 1.0, 6);
    const auto class_gap = [&](std::size_t c) {
        double pos = 0.0, neg = 0.0;
        int np = 0, nn = 0;
        for (std::size_t i = 0; i < d.n(); ++i) {
            if (d.labels[i] == 1) {
                pos += d.features(i, c);
                ++np;
            } else {
                neg += d.features(i, c);
                ++nn;
            }
        }
        return pos / np - neg / nn;
    };
    // halfgap_d = 0.5 * 0.75^d, so the gap at feature 0 is 1 and shrinks by
    // 0.75 per index; with n = 4000 the noise is ~0.03.
    CHECK(class_gap(0) == doctest::Approx(1.0).epsilon(0.15));
    CHECK(class_gap(4) == doctest::Approx(std::pow(0.75, 4)).epsilon(0.3));
    CHECK(class_gap(0) > class_gap(3));
    CHECK(class_gap(3) > class_gap(7));
}

TEST_CASE("dataset CSV round-trips") {
    const Dataset d = ks::data::generate_synthetic(80, 5, 0.4, 3, 0.25, 1.0, 7);
    const auto path = temp_file("ks_test_dataset_roundtrip.csv");
    ks::data::save_csv(path, d);
    const Dataset back = ks::data::load_csv(path);
    std::filesystem::remove(path);
    REQUIRE(back.n() == d.n());
    REQUIRE(back.dim() == d.dim());
    CHECK(back.labels == d.labels);
    CHECK(back.missing_mask == d.missing_mask);
    CHECK(back.feature_names == d.feature_names);
    for (std::size_t i = 0; i < d.n(); ++i)
        for (std::size_t c = 0; c < d.dim(); ++c)
            if (!d.missing(i, c)) CHECK(back.features(i, c) == d.features(i, c));
    CHECK(back.provenance == ks::data::Provenance::Csv);
}

TEST_CASE("CSV loader accepts flexible label placement and spellings") {
    const auto path = temp_file("ks_test_flexible.csv");
    write_text(path,
               "# comment line\n"
               "a,label,b\n"
               "0.5,+1,\n"
               "0.25,0,1.5\n"
               "0.125,-1,2.5\r\n");
    const Dataset d = ks::data::load_csv(path);
    std::filesystem::remove(path);
    REQUIRE(d.n() == 3);
    REQUIRE(d.dim() == 2);
    CHECK(d.labels == std::vector<int>{1, -1, -1});
    CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(d.missing(0, 1));
    CHECK(!d.missing(1, 1));
    CHECK(d.features(2, 1) == 2.5);
}

TEST_CASE("CSV loader reports the offending location") {
    const auto path = temp_file("ks_test_badcsv.csv");

    SUBCASE("no label column") {
        write_text(path, "a,b\n1,2\n");
        CHECK_THROWS_WITH_AS(ks::data::load_csv(path),
                             doctest::Contains("label"), ks::io_error);
    }
    SUBCASE("bad label token") {
        write_text(path, "a,label\n1,5\n");
        CHECK_THROWS_WITH_AS(ks::data::load_csv(path), doctest::Contains(":2"), ks::io_error);
    }
    SUBCASE("ragged row") {
        write_text(path, "a,b,label\n1,2,1\n3,1\n");
        CHECK_THROWS_WITH_AS(ks::data::load_csv(path), doctest::Contains(":3"), ks::io_error);
    }
    SUBCASE("non-numeric feature") {
        write_text(path, "a,label\nxyz,1\n");
        CHECK_THROWS_AS(ks::data::load_csv(path), ks::io_error);
    }
    SUBCASE("missing file") {
        std::filesystem::remove(path);
        CHECK_THROWS_AS(ks::data::load_csv(temp_file("ks_does_not_exist.csv")), ks::io_error);
    }
    std::filesystem::remove(path);
}

TEST_CASE("feature restriction preserves ranking order") {
    const Dataset d = ks::data::generate_synthetic(50, 6, 0.5, 6, 0.0, 1.0, 8);
    const std::vector<std::size_t> pick = {4, 1, 3};
    const Dataset r = ks::data::restrict_features(d, pick);
    REQUIRE(r.dim() == 3);
    CHECK(r.n() == d.n());
    CHECK(r.labels == d.labels);
    for (std::size_t i = 0; i < d.n(); ++i) {
        CHECK(r.features(i, 0) == d.features(i, 4));
        CHECK(r.features(i, 1) == d.features(i, 1));
        CHECK(r.features(i, 2) == d.features(i, 3));
    }
    CHECK(r.feature_names[0] == d.feature_names[4]);
    CHECK_THROWS_AS(ks::data::restrict_features(d, std::vector<std::size_t>{6}),
                    std::out_of_range);
}

TEST_CASE("preprocessing fits on the training block only") {
    Dataset d;
    d.features = Mat(4, 2);
    d.missing_mask.assign(8, 0);
    d.labels = {1, -1, 1, -1};
    d.feature_names = {"a", "b"};
    // Train rows 0 and 1; rows 2 and 3 are test and must not leak.
    d.features(0, 0) = 0.0;
    d.features(1, 0) = 2.0;
    d.features(2, 0) = 100.0;
    d.features(3, 0) = -50.0;
    d.features(0, 1) = 1.0;
    d.features(1, 1) = 1.0;  // constant on train
    d.features(2, 1) = 9.0;
    d.features(3, 1) = -9.0;
    const std::vector<std::size_t> train = {0, 1};
    const std::vector<std::size_t> test = {2, 3};
    const ks::data::PreprocessModel model = ks::data::fit_preprocess(d, train);

    const Mat xt = ks::data::apply_preprocess(model, d, train);
    CHECK(xt(0, 0) == 0.0);
    CHECK(xt(1, 0) == doctest::Approx(std::numbers::pi));
    CHECK(xt(0, 1) == 0.0);  // constant column maps to 0
    CHECK(xt(1, 1) == 0.0);

    const Mat xe = ks::data::apply_preprocess(model, d, test);
    CHECK(xe(0, 0) == doctest::Approx(std::numbers::pi));  // clamped above
    CHECK(xe(1, 0) == 0.0);                                // clamped below

    SUBCASE("test rows cannot influence the fit") {
        Dataset mutated = d;
        mutated.features(2, 0) = 1e6;
        mutated.features(3, 1) = -1e6;
        const ks::data::PreprocessModel again = ks::data::fit_preprocess(mutated, train);
        const Mat xt2 = ks::data::apply_preprocess(again, mutated, train);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t c = 0; c < 2; ++c) CHECK(xt2(i, c) == xt(i, c));
    }
}

TEST_CASE("preprocessing imputes missing cells with the training mean") {
    Dataset d;
    d.features = Mat(3, 1);
    d.missing_mask.assign(3, 0);
    d.labels = {1, -1, 1};
    d.feature_names = {"a"};
    d.features(0, 0) = 1.0;
    d.features(1, 0) = 3.0;
    d.features(2, 0) = std::numeric_limits<double>::quiet_NaN();
    d.missing_mask[2] = 1;
    const std::vector<std::size_t> all = {0, 1, 2};
    const ks::data::PreprocessModel model = ks::data::fit_preprocess(d, all);
    const Mat x = ks::data::apply_preprocess(model, d, all);
    // mean of present = 2; scaled position of 2 in [1,3] is pi/2
    CHECK(x(2, 0) == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));

    SUBCASE("a feature with no observed training values is an error") {
        d.missing_mask.assign(3, 1);
        for (std::size_t i = 0; i < 3; ++i)
            d.features(i, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(ks::data::fit_preprocess(d, all), std::invalid_argument);
    }
}

TEST_CASE("permutation importance finds the planted feature") {
    const Dataset d = planted_dataset(300, 5, 21);
    ks::data::ProbeConfig probe;
    const ks::data::FeatureRanking ranking = ks::data::rank_features(d, probe, 5, 31);
    REQUIRE(ranking.order.size() == 5);
    CHECK(ranking.order[0] == 0);
    CHECK(ranking.scores[0] > 0.05);
    for (std::size_t i = 1; i < ranking.scores.size(); ++i)
        CHECK(ranking.scores[i] <= ranking.scores[i - 1]);

    SUBCASE("deterministic in the seed") {
        const ks::data::FeatureRanking again = ks::data::rank_features(d, probe, 5, 31);
        CHECK(again.order == ranking.order);
        CHECK(again.scores == ranking.scores);
    }
}

TEST_CASE("stratified splits carry the class balance exactly") {
    const Dataset d = ks::data::generate_synthetic(1000, 4, 0.52, 4, 0.0, 1.0, 41);
    const ks::data::Subpoint s = ks::data::stratified_split(d, 200, 150, 77);
    REQUIRE(s.train_indices.size() == 200);
    REQUIRE(s.test_indices.size() == 150);

    const auto positives = [&](const std::vector<std::size_t>& idx) {
        int k = 0;
        for (const std::size_t i : idx) k += d.labels[i] == 1 ? 1 : 0;
        return k;
    };
    CHECK(positives(s.train_indices) == 104);  // llround(200 * 0.52)
    CHECK(positives(s.test_indices) == 78);    // llround(150 * 0.52)

    SUBCASE("train and test are disjoint and sorted") {
        CHECK(std::is_sorted(s.train_indices.begin(), s.train_indices.end()));
        CHECK(std::is_sorted(s.test_indices.begin(), s.test_indices.end()));
        std::vector<std::size_t> both = s.train_indices;
        both.insert(both.end(), s.test_indices.begin(), s.test_indices.end());
        std::sort(both.begin(), both.end());
        CHECK(std::adjacent_find(both.begin(), both.end()) == both.end());
    }
    SUBCASE("seed determinism") {
        const ks::data::Subpoint again = ks::data::stratified_split(d, 200, 150, 77);
        CHECK(again.train_indices == s.train_indices);
        CHECK(again.test_indices == s.test_indices);
        const ks::data::Subpoint other = ks::data::stratified_split(d, 200, 150, 78);
        CHECK(other.train_indices != s.train_indices);
    }
    SUBCASE("requesting more than available fails") {
        CHECK_THROWS_AS(ks::data::stratified_split(d, 900, 150, 1), std::invalid_argument);
    }
}

TEST_CASE("representative selection picks scores nearest the mean") {
    const std::vector<double> scores = {0.1, 0.2, 0.3, 0.4};
    // mean 0.25; 0.2 and 0.3 tie at distance 0.05, ascending index breaks it
    const std::vector<std::size_t> two = ks::data::select_representative_indices(scores, 2);
    CHECK(two == std::vector<std::size_t>{1, 2});
    const std::vector<std::size_t> one = ks::data::select_representative_indices(scores, 1);
    CHECK(one == std::vector<std::size_t>{1});
    CHECK_THROWS_AS(ks::data::select_representative_indices(scores, 5), std::invalid_argument);
}
