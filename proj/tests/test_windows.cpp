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

#include "isacbench/fft.hpp"
#include "isacbench/windows.hpp"

#include <numeric>

using namespace isac;
using Catch::Approx;

/// Highest sidelobe of w in dB relative to the main-lobe peak, from a
/// 64x zero-padded spectrum; the main lobe ends at the first local minimum.
static double max_sidelobe_db(const std::vector<double>& w)
{
    const std::size_t n = fft::next_pow2(w.size()) * 64;
    std::vector<cd> x(n);
    for (std::size_t i = 0; i < w.size(); ++i)
        x[i] = w[i];
    fft::forward(x);
    std::vector<double> mag(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
        mag[k] = std::abs(x[k]);
    std::size_t k = 1;
    while (k + 1 < mag.size() && mag[k + 1] < mag[k])
        ++k;
    const double side = *std::max_element(mag.begin() + static_cast<std::ptrdiff_t>(k), mag.end());
    return 20.0 * std::log10(side / mag[0]);
}

TEST_CASE("Rectangular and Hann windows")
{
    for (double v : make_window(WindowSpec::rectangular(), 8))
        CHECK(v == 1.0);
    const auto h = make_window(WindowSpec::hann(), 4);
    REQUIRE(h.size() == 4);
    CHECK(h[0] == Approx(0.0).margin(1e-15));
    CHECK(h[1] == Approx(0.75));
    CHECK(h[2] == Approx(0.75));
    CHECK(h[3] == Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(make_window(WindowSpec::hann(), 1), Error);
}

TEST_CASE("Chebyshev taper matches reference values")
{
    // Reference values from an independent Dolph-Chebyshev implementation.
    const std::vector<double> even = {0.04533569787414433, 0.25052945892163125, 0.6460866198390105, 1.0,
                                      1.0, 0.6460866198390105, 0.25052945892163125, 0.04533569787414433};
    const std::vector<double> odd = {0.05186856359432414, 0.22712393362332253, 0.5379172015600897,
                                     0.8604844373949189,  1.0,                 0.8604844373949189,
                                     0.5379172015600897,  0.22712393362332253, 0.05186856359432414};
    const auto a = make_window(WindowSpec::chebyshev(80.0), 8);
    const auto b = make_window(WindowSpec::chebyshev(60.0), 9);
    for (std::size_t i = 0; i < even.size(); ++i)
        CHECK(a[i] == Approx(even[i]).margin(1e-12));
    for (std::size_t i = 0; i < odd.size(); ++i)
        CHECK(b[i] == Approx(odd[i]).margin(1e-12));
}

TEST_CASE("Chebyshev 80 dB sidelobes")
{
    for (std::size_t len : {64u, 256u, 1584u}) {
        const auto w = make_window(WindowSpec::chebyshev(80.0), len);
        CHECK(*std::max_element(w.begin(), w.end()) == Approx(1.0));
        for (std::size_t i = 0; i < len; ++i)
            CHECK(w[i] == Approx(w[len - 1 - i]).margin(1e-12));
        // Equiripple design: every sidelobe peak sits at -80 dB up to rounding.
        const double sl = max_sidelobe_db(w);
        CHECK(sl <= -80.0 + 1e-6);
        CHECK(sl >= -80.5);
    }
}

TEST_CASE("DPSS matches reference tapers")
{
    const std::vector<std::vector<double>> ref = {
        {0.00708272572601106, 0.02752052879314594, 0.06878098610509838, 0.13398202265528245, 0.218457103155104,
         0.3087595071574084, 0.3855714243047406, 0.4298711279295851, 0.4298711279295851, 0.38557142430474056,
         0.3087595071574083, 0.2184571031551039, 0.13398202265528233, 0.06878098610509831, 0.02752052879314592,
         0.00708272572601105},
        {0.03432151752287821, 0.10186197071862832, 0.20015865896396298, 0.3036170967692536, 0.3719850100349994,
         0.3667794238557183, 0.27077215312807673, 0.0999089074262943, -0.09990890742629416, -0.2707721531280766,
         -0.3667794238557183, -0.3719850100349995, -0.3036170967692536, -0.20015865896396298, -0.10186197071862833,
         -0.03432151752287822},
        {0.11087345837822496, 0.23776451344807062, 0.34584744789038635, 0.3707406300557184, 0.27640800564480006,
         0.08380556856577773, -0.13084462965621754, -0.27123968066750087, -0.27123968066750087, -0.13084462965621746,
         0.08380556856577784, 0.27640800564480017, 0.3707406300557184, 0.3458474478903863, 0.23776451344807065,
         0.11087345837822499}};
    for (std::size_t k = 0; k < ref.size(); ++k) {
        const auto v = dpss_unit(16, 2.5, k);
        for (std::size_t i = 0; i < 16; ++i)
            CHECK(v[i] == Approx(ref[k][i]).margin(1e-10));
    }
}

TEST_CASE("DPSS tapers are orthonormal before peak normalization")
{
    for (double nw : {2.5, 3.5, 4.5}) {
        for (std::size_t len : {64u, 256u}) {
            std::vector<std::vector<double>> v;
            for (std::size_t k = 0; k < 4; ++k)
                v.push_back(dpss_unit(len, nw, k));
            for (std::size_t a = 0; a < v.size(); ++a)
                for (std::size_t b = 0; b <= a; ++b) {
                    const double dot = std::inner_product(v[a].begin(), v[a].end(), v[b].begin(), 0.0);
                    CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-8);
                }
        }
    }
}

TEST_CASE("DPSS window is peak-normalized and symmetric")
{
    const auto w = make_window(WindowSpec::dpss(3.5), 64);
    CHECK(*std::max_element(w.begin(), w.end()) == Approx(1.0));
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(w[i] > 0.0);
        CHECK(w[i] == Approx(w[63 - i]).margin(1e-10));
    }
}

TEST_CASE("Window names round trip")
{
    for (const auto& spec : {WindowSpec::rectangular(), WindowSpec::hann(), WindowSpec::chebyshev(80.0),
                             WindowSpec::chebyshev(62.5), WindowSpec::dpss(2.5), WindowSpec::dpss(4.5, 1)})
        CHECK(window_from_string(to_string(spec)) == spec);
    CHECK(to_string(WindowSpec::chebyshev(80.0)) == "chebyshev80");
    CHECK_THROWS_AS(window_from_string("kaiser"), Error);
    CHECK_THROWS_AS(window_from_string("dpssx"), Error);
}
