// SPDX-License-Identifier: Apache-2.0
//
// isacbench: OFDM ISAC radar simulation and peak-detection benchmark
// Copyright (C) 2026 The isacbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include "isacbench/cfar.hpp"

#include <set>
#include <sstream>

using namespace isac;
using Catch::Approx;

static Periodogram image(std::size_t rows, std::size_t cols, double fill = 0.0)
{
    return {RMatrix(rows, cols, fill), AxisInfo{}};
}

static Periodogram exponential_field(std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    auto s = image(n, n);
    for (auto& v : s.power.data())
        v = rng.exponential(1.0);
    return s;
}

// Three-sigma binomial interval check on an exceedance count.
static bool within_3_sigma(std::size_t count, std::size_t cells, double p)
{
    const double n = static_cast<double>(cells);
    return std::abs(static_cast<double>(count) - n * p) <= 3.0 * std::sqrt(n * p * (1.0 - p));
}

static CfarConfig geometry(std::size_t g, std::size_t w, double p_fa = 1e-4, std::size_t k = 0)
{
    CfarConfig c;
    c.p_fa = p_fa;
    c.guard_range = c.guard_doppler = g;
    c.reference_range = c.reference_doppler = w;
    c.num_subwindows = k;
    return c;
}

TEST_CASE("threshold_factor values and limits")
{
    CHECK(threshold_factor(1, 0.5) == Approx(1.0).margin(1e-15));
    CHECK(threshold_factor(16, 1e-4) == Approx(12.4525).margin(1e-3));
    CHECK(threshold_factor(1e6, 1e-4) == Approx(std::log(1e4)).margin(1e-3));
    CHECK(threshold_factor(48, 1e-3) == Approx(7.4296).margin(1e-3));
    CHECK_THROWS_AS(threshold_factor(0.5, 0.1), Error);
    CHECK_THROWS_AS(threshold_factor(10, 0.0), Error);
    CHECK_THROWS_AS(threshold_factor(10, 1.0), Error);
}

TEST_CASE("threshold_factor is decreasing in R and in p_fa")
{
    double prev = std::numeric_limits<double>::infinity();
    for (double r = 1; r <= 4096; r *= 2) {
        const double f = threshold_factor(r, 1e-4);
        CHECK(f < prev);
        CHECK(f > std::log(1e4));
        prev = f;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double p : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1}) {
        const double f = threshold_factor(144, p);
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("Order-statistic factor")
{
    // Smallest of R: p_fa = R / (R + T).
    CHECK(os_threshold_factor(20, 1, 1e-3) == Approx(20.0 * (1e3 - 1.0)).epsilon(1e-10));
    // Monte Carlo: median of 24 exponential cells.
    const std::size_t r = 24, rank = 12;
    const double t = os_threshold_factor(r, rank, 1e-2);
    Rng rng(1);
    std::vector<double> cells(r);
    std::size_t hits = 0;
    const std::size_t trials = 200000;
    for (std::size_t i = 0; i < trials; ++i) {
        for (auto& c : cells)
            c = rng.exponential(1.0);
        std::nth_element(cells.begin(), cells.begin() + rank - 1, cells.end());
        hits += rng.exponential(1.0) > t * cells[rank - 1];
    }
    CHECK(within_3_sigma(hits, trials, 1e-2));
}

TEST_CASE("Trimmed mean censors the strongest sample")
{
    std::vector<double> v{1, 1, 1, 1, 100, 1, 1, 1};
    CHECK(detail::trimmed_mean(v, 0, 1) == 1.0);
    std::vector<double> w{5, 1, 9, 3, 7};
    CHECK(detail::trimmed_mean(w, 1, 1) == Approx(5.0));
}

TEST_CASE("Global detector")
{
    CHECK(detect_global(image(32, 32), 1e-3, 1.0).empty());

    const auto s = exponential_field(512, 2);
    const auto m = global_map(s, 1e-3, 1.0);
    CHECK(std::abs(static_cast<double>(m.exceedances()) - 262.0) <= 50.0);

    auto one = image(16, 16, 1.0);
    one.power(5, 9) = 100.0;
    const auto d = detect_global(one, 1e-3, 1.0);
    REQUIRE(d.size() == 1);
    CHECK(d[0].row == 5);
    CHECK(d[0].col == 9);
    CHECK_THROWS_AS(detect_global(one, 1e-3, 0.0), Error);
}

TEST_CASE("CA-CFAR on hand-built images")
{
    CHECK(detect_ca(image(32, 32), geometry(2, 6)).empty());

    for (const auto& cfg : {geometry(0, 3, 1e-3), geometry(1, 3, 1e-3)}) {
        auto s = image(16, 16, 1.0);
        s.power(8, 8) = 50.0;
        const auto m = ca_map(s, cfg);
        const double r = static_cast<double>(cfg.reference_cells());
        // Far from the CUT the reference mean is exactly 1.
        CHECK(m.threshold(1, 1) == Approx(threshold_factor(r, 1e-3)).epsilon(1e-12));
        const auto d = detect_ca(s, cfg);
        REQUIRE(d.size() == 1);
        CHECK(d[0].row == 8);
        CHECK(d[0].col == 8);
        CHECK(d[0].power == 50.0);
    }
    CHECK(geometry(0, 3).reference_cells() == 48);
    CHECK(geometry(2, 6).reference_cells() == 144);

    CHECK_THROWS_AS(detect_ca(image(8, 8), geometry(2, 6)), Error);
    CHECK_THROWS_AS(geometry(3, 3).validate(), Error);
}

TEST_CASE("CA-CFAR holds its false-alarm rate on exponential noise")
{
    const auto s = exponential_field(512, 3);
    for (double p : {1e-2, 1e-3}) {
        const auto cfg = geometry(2, 6, p);
        const auto m = ca_map(s, cfg);
        CHECK(within_3_sigma(m.exceedances(), s.power.size(), p));
    }
}

TEST_CASE("CFAR detections are scale invariant")
{
    auto s = exponential_field(128, 4);
    s.power(40, 40) = 200.0;
    s.power(90, 17) = 60.0;
    auto big = s;
    for (auto& v : big.power.data())
        v *= 1e3;
    auto cs = geometry(2, 6, 1e-2, 8);
    cs.censor_strongest = 1;
    for (auto cfg : {geometry(2, 6, 1e-2), cs, geometry(2, 6, 1e-2).with_median()}) {
        const auto a = detect_robust(s, cfg);
        const auto b = detect_robust(big, cfg);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].row == b[i].row);
            CHECK(a[i].col == b[i].col);
        }
    }
}

TEST_CASE("Robust detector without censoring equals CA")
{
    const auto s = exponential_field(96, 5);
    const auto cfg = geometry(2, 6, 1e-2);
    const auto a = ca_map(s, cfg);
    const auto b = robust_map(s, cfg);
    CHECK(a.threshold == b.threshold);
    CHECK(detect_ca(s, cfg) == detect_robust(s, cfg));

    // Equal-size sub-windows: mean of sub-window means is the overall mean.
    const auto k8 = robust_map(s, geometry(2, 6, 1e-2, 8));
    for (std::size_t i = 0; i < s.power.size(); ++i)
        CHECK(k8.threshold.data()[i] == Approx(a.threshold.data()[i]).epsilon(1e-12));
    CHECK(k8.mask == a.mask);
}

TEST_CASE("Sub-windows partition the reference band into equal sectors")
{
    const auto cfg = geometry(2, 6, 1e-4, 8);
    const auto sectors = subwindow_offsets(cfg);
    REQUIRE(sectors.size() == 8);
    std::set<std::pair<int, int>> all;
    for (const auto& s : sectors) {
        CHECK(s.size() == 18);
        for (const auto& o : s)
            CHECK(all.insert({o.dr, o.dd}).second);
    }
    std::set<std::pair<int, int>> ref;
    for (const auto& o : reference_offsets(cfg))
        ref.insert({o.dr, o.dd});
    CHECK(all == ref);
    // The sector containing the +range axis is centered on it.
    const auto& first = sectors[0];
    CHECK(std::any_of(first.begin(), first.end(), [](const Offset& o) { return o.dr == 6 && o.dd == 0; }));

    auto bad = geometry(2, 6, 1e-4, 7);
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("Censoring unmasks a target next to a strong interferer")
{
    auto s = image(48, 48, 1.0);
    s.power(20, 20) = 1e4;
    s.power(20, 22) = 30.0;
    const auto ca = geometry(1, 3, 1e-4);
    auto cs = geometry(1, 3, 1e-4, 8);
    cs.censor_strongest = 1;
    auto cs_exact = geometry(1, 3, 1e-4);
    cs_exact.censor_strongest = 1;

    auto has = [](const DetectionList& d, std::size_t r, std::size_t c) {
        return std::any_of(d.begin(), d.end(), [&](const Detection& x) { return x.row == r && x.col == c; });
    };
    const auto a = detect_ca(s, ca);
    CHECK(has(a, 20, 20));
    CHECK_FALSE(has(a, 20, 22));
    for (const auto& cfg : {cs, cs_exact}) {
        const auto b = detect_robust(s, cfg);
        CHECK(has(b, 20, 20));
        CHECK(has(b, 20, 22));
    }
}

TEST_CASE("OS configuration picks the median")
{
    const auto os = geometry(2, 6, 1e-4, 8).with_median();
    CHECK(os.censor_weakest == 3);
    CHECK(os.censor_strongest == 4);
    CHECK(os.is_ordered_statistic());
    const auto exact = geometry(2, 6).with_median();
    CHECK(exact.censor_weakest + exact.censor_strongest == 143);
    CHECK_THROWS_AS(geometry(2, 6).with_os_rank(0), Error);

    const auto s = exponential_field(256, 6);
    const auto m = robust_map(s, geometry(2, 6, 1e-2).with_median());
    CHECK(within_3_sigma(m.exceedances(), s.power.size(), 1e-2));
}

TEST_CASE("extract_peaks conventions")
{
    auto s = image(8, 8, 1.0);
    Matrix<std::uint8_t> mask(8, 8, 0);
    CHECK(extract_peaks(mask, s).empty());

    mask(3, 3) = 1;
    s.power(3, 3) = 5.0;
    auto d = extract_peaks(mask, s);
    REQUIRE(d.size() == 1);
    CHECK(d[0].row == 3);

    // Plateau: the lexicographically smaller bin wins.
    s.power(3, 4) = 5.0;
    mask(3, 4) = 1;
    d = extract_peaks(mask, s);
    REQUIRE(d.size() == 1);
    CHECK(d[0].col == 3);

    // Doppler wraps: column 7 neighbors column 0.
    auto w = image(8, 8, 1.0);
    Matrix<std::uint8_t> wm(8, 8, 0);
    w.power(5, 0) = 4.0;
    w.power(5, 7) = 6.0;
    wm(5, 0) = wm(5, 7) = 1;
    d = extract_peaks(wm, w);
    REQUIRE(d.size() == 1);
    CHECK(d[0].col == 7);

    // Range does not wrap: rows 0 and 7 are independent.
    auto r = image(8, 8, 1.0);
    Matrix<std::uint8_t> rm(8, 8, 0);
    r.power(0, 2) = 4.0;
    r.power(7, 2) = 6.0;
    rm(0, 2) = rm(7, 2) = 1;
    CHECK(extract_peaks(rm, r).size() == 2);

    // Diagonal neighbors do not suppress each other.
    auto g = image(8, 8, 1.0);
    Matrix<std::uint8_t> gm(8, 8, 0);
    gm(2, 2) = gm(3, 3) = gm(2, 3) = gm(3, 2) = 1;
    g.power(2, 2) = 9.0;
    g.power(3, 3) = 7.0;
    g.power(2, 3) = g.power(3, 2) = 3.0;
    d = extract_peaks(gm, g);
    REQUIRE(d.size() == 2);
    CHECK((d[1].row == 3 && d[1].col == 3));

    s.axis = {0.5, 0.25, -1.0};
    d = extract_peaks(mask, s);
    CHECK(d[0].range_m == 1.5);
    CHECK(d[0].velocity_mps == Approx(-0.25));

    CHECK_THROWS_AS(extract_peaks(Matrix<std::uint8_t>(4, 4, 0), s), Error);
}

TEST_CASE("Detection CSV round trip")
{
    const DetectionList d{{1, 2, 3.5, 0.75, -1.25}, {10, 0, 1e-7, 12.0, 3.0}};
    std::stringstream ss;
    write_detections_csv(d, ss);
    CHECK(ss.str().rfind("row,col,power,range_m,velocity_mps\n", 0) == 0);
    const auto back = read_detections_csv(ss);
    CHECK(back == d);

    std::stringstream bad("row,col,power\n1,2,3\n");
    CHECK_THROWS_AS(read_detections_csv(bad), Error);
    std::stringstream junk("row,col,power,range_m,velocity_mps\n1;2;3;4;5\n");
    CHECK_THROWS_AS(read_detections_csv(junk), Error);
}
