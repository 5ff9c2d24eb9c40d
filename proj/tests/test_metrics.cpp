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

#include "isacbench/metrics.hpp"

#include <algorithm>

using namespace isac;
using Catch::Approx;

static Detection at(double r, double v) { return {0, 0, 1.0, r, v}; }

static AssociationGate unit_gate(double half = 1.0) { return {half, half, 1.0, 1.0}; }

TEST_CASE("Association basics")
{
    const std::vector<Target> ts{{10.0, 0.0, {}}, {20.0, 5.0, {}}, {30.0, -5.0, {}}};
    auto s = associate({}, ts, unit_gate());
    CHECK(s == TrialScore{0, 0, 3});
    CHECK(s.p_md() == 1.0);

    const std::vector<Detection> exact{at(10.0, 0.0)};
    s = associate(exact, std::span(ts.data(), 1), unit_gate());
    CHECK(s == TrialScore{1, 0, 0});
    CHECK(s.f1() == 1.0);

    // Superimposed targets share one detection.
    const std::vector<Target> twin{{10.0, 0.0, {}}, {10.0, 0.0, {}}};
    s = associate(exact, twin, unit_gate());
    CHECK(s.tp == 1);
    CHECK(s.fn == 1);
    CHECK(s.p_md() == 0.5);

    // Duplicates inside a gate are dropped, outliers are false alarms.
    const std::vector<Detection> mixed{at(10.2, 0.1), at(9.9, -0.3), at(50.0, 0.0), at(20.0, 7.0)};
    s = associate(mixed, ts, unit_gate());
    CHECK(s == TrialScore{1, 2, 2});

    CHECK(TrialScore{}.f1() == 1.0);
    CHECK(TrialScore{}.p_md() == 0.0);
}

TEST_CASE("Detection goes to the nearest gated target")
{
    const std::vector<Target> ts{{10.0, 0.0, {}}, {11.0, 0.0, {}}};
    const std::vector<Detection> d{at(10.8, 0.0)};
    auto s = associate(d, ts, unit_gate(2.0));
    CHECK(s.tp == 1);
    // Equidistant: lower index wins, so target 0 is the hit and target 1 missed.
    const std::vector<Detection> mid{at(10.5, 0.0)};
    s = associate(mid, ts, unit_gate(2.0));
    CHECK(s == TrialScore{1, 0, 1});
}

TEST_CASE("Association properties hold on random sets")
{
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Target> ts(static_cast<std::size_t>(rng.uniform_int(0, 6)));
        for (auto& t : ts)
            t = {rng.uniform(0.0, 20.0), rng.uniform(-5.0, 5.0), {}};
        std::vector<Detection> d(static_cast<std::size_t>(rng.uniform_int(0, 10)));
        for (auto& x : d)
            x = at(rng.uniform(0.0, 20.0), rng.uniform(-5.0, 5.0));

        const auto small = associate(d, ts, unit_gate(0.7));
        const auto large = associate(d, ts, unit_gate(1.5));
        CHECK(small.tp + small.fn == ts.size());
        CHECK(small.tp <= d.size());
        CHECK(small.fp <= d.size());
        CHECK(large.tp >= small.tp);
        CHECK(large.fp <= small.fp);
        CHECK(small.p_md() >= 0.0);
        CHECK(small.p_md() <= 1.0);
        CHECK(small.f1() >= 0.0);
        CHECK(small.f1() <= 1.0);

        auto shuffled = d;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(associate(shuffled, ts, unit_gate(0.7)) == small);
    }
}

TEST_CASE("Gate sizes follow the window main lobe")
{
    const auto radio = RadioConfig::table2();
    const auto rect = AssociationGate::for_window(radio, WindowKind::Rectangular);
    const auto cheb = AssociationGate::for_window(radio, WindowKind::Chebyshev);
    CHECK(rect.range_halfwidth_m == Approx(radio.range_resolution_m()));
    CHECK(cheb.velocity_halfwidth_mps == Approx(2.5 * radio.velocity_resolution_mps()));
    CHECK(gate_factor(WindowKind::Hann) == 2.0);
    CHECK(gate_factor(WindowKind::Dpss) == 2.0);
    CHECK_THROWS_AS(AssociationGate::scaled(radio, 0.0), Error);
}

TEST_CASE("score_curve aggregation")
{
    const std::vector<TrialScore> one{{2, 1, 1}};
    auto a = score_curve(one);
    CHECK(a.p_md.value == one[0].p_md());
    CHECK(a.f1.value == one[0].f1());
    CHECK(a.fa.value == 1.0);
    CHECK(a.trials == 1);

    const std::vector<TrialScore> two{{1, 0, 1}, {2, 0, 0}};
    a = score_curve(two);
    CHECK(a.p_md.value == Approx(0.25));
    CHECK(a.f1.value == Approx(6.0 / 7.0));
    const auto macro = score_curve(two, F1Averaging::Macro);
    CHECK(macro.f1.value == Approx(0.5 * (2.0 / 3.0 + 1.0)));

    const std::vector<TrialScore> perfect(1000, TrialScore{3, 0, 0});
    a = score_curve(perfect);
    CHECK(a.p_md.value == 0.0);
    CHECK(a.f1.value == 1.0);
    CHECK(a.p_md.ci == 0.0);
    CHECK(a.f1.ci == 0.0);

    CHECK_THROWS_AS(score_curve(std::vector<TrialScore>{}), Error);
}

TEST_CASE("Confidence half-width is 1.96 standard errors")
{
    const std::vector<double> v{0.0, 1.0, 0.0, 1.0};
    const auto e = mean_ci(v);
    CHECK(e.value == 0.5);
    CHECK(e.ci == Approx(1.96 * std::sqrt(1.0 / 3.0) / 2.0));
}
