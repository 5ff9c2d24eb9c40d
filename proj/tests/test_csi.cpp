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

#include "isacbench/csi.hpp"

#include <filesystem>

using namespace isac;
using Catch::Approx;

namespace fs = std::filesystem;

static CMatrix scaled(const CMatrix& x, cd a)
{
    CMatrix y = x;
    for (auto& v : y.data())
        v *= a;
    return y;
}

TEST_CASE("extract_csi divides element-wise")
{
    Rng rng(1);
    const auto radio = RadioConfig::desk();
    const Frame f = generate_frame(rng, radio);
    for (const auto& v : extract_csi(f.symbols, f, radio).values.data())
        CHECK(std::abs(v - cd{1.0, 0.0}) < 1e-15);
    for (const auto& v : extract_csi(scaled(f.symbols, {0.0, 2.0}), f, radio).values.data())
        CHECK(std::abs(v - cd{0.0, 2.0}) < 1e-14);

    Frame zero = f;
    zero.symbols(3, 4) = cd{};
    CHECK_THROWS_AS(extract_csi(f.symbols, zero, radio), Error);
    CHECK_THROWS_AS(extract_csi(CMatrix(2, 2), f, radio), Error);
}

TEST_CASE("synthesize_csi closed forms")
{
    Rng rng(2);
    const auto radio = RadioConfig::table2();
    const double inf = std::numeric_limits<double>::infinity();
    for (const auto& v : synthesize_csi({}, inf, radio, rng).values.data())
        CHECK(v == cd{});

    const Target origin{0.0, 0.0, cd{1.0, 0.0}};
    for (const auto& v : synthesize_csi(std::span(&origin, 1), inf, radio, rng).values.data())
        CHECK(v == cd{1.0, 0.0});

    const Target t{39.0, 0.0, cd{1.0, 0.0}};
    const auto h = synthesize_csi(std::span(&t, 1), inf, radio, rng);
    const cd step = std::polar(1.0, -kTwoPi * radio.subcarrier_spacing_hz * 2.0 * 39.0 / kSpeedOfLight);
    for (std::size_t n = 0; n + 1 < 50; ++n) {
        CHECK(std::abs(h.values(n, 7)) == Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(h.values(n + 1, 7) / h.values(n, 7) - step) < 1e-9);
    }
}

TEST_CASE("synthesize_csi Doppler advances with the total symbol time")
{
    Rng rng(3);
    const auto radio = RadioConfig::desk();
    const Target t{0.0, 5.0, cd{1.0, 0.0}};
    const auto h = synthesize_csi(std::span(&t, 1), std::numeric_limits<double>::infinity(), radio, rng);
    const double phase = kTwoPi * t.doppler_hz(radio.carrier_freq_hz) * radio.total_symbol_time_s();
    CHECK(std::abs(h.values(0, 1) - std::polar(1.0, phase)) < 1e-12);
    CHECK(std::abs(h.values(0, 10) - std::polar(1.0, 10.0 * phase)) < 1e-10);
}

TEST_CASE("synthesize_csi is linear and calibrates its noise")
{
    const auto radio = RadioConfig::desk();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Target> ts{{10.0, 3.0, cd{0.5, 0.1}}, {70.0, -12.0, cd{-0.2, 0.9}}};
    Rng rng(4);
    const auto both = synthesize_csi(ts, inf, radio, rng);
    const auto a = synthesize_csi(std::span(&ts[0], 1), inf, radio, rng);
    const auto b = synthesize_csi(std::span(&ts[1], 1), inf, radio, rng);
    for (std::size_t i = 0; i < both.values.size(); ++i)
        CHECK(std::abs(both.values.data()[i] - a.values.data()[i] - b.values.data()[i]) < 1e-12);

    Rng noise(5);
    const auto w = synthesize_csi({}, 10.0, radio, noise);
    double p = 0.0;
    for (const auto& v : w.values.data())
        p += std::norm(v);
    CHECK(p / static_cast<double>(w.values.size()) == Approx(0.1).epsilon(0.05));
}

TEST_CASE("Full chain: identity target gives unit CSI")
{
    Rng rng(6);
    const auto radio = RadioConfig::desk();
    const FullChain chain(radio, FrontendConfig{});
    const Target t{0.0, 0.0, cd{1.0, 0.0}};
    const auto h = chain.csi(std::span(&t, 1), std::numeric_limits<double>::infinity(), rng);
    CHECK(h.provenance == CsiProvenance::FullChain);
    // The truncated span-16 pulse is not exactly Nyquist: its folded spectrum
    // ripples by ~8e-4 and the tails leak across symbols, so the worst bin sits
    // just above 1e-3. Bound the RMS there and the peak with a longer span.
    double sq = 0.0;
    double worst = 0.0;
    for (const auto& v : h.values.data()) {
        sq += std::norm(v - cd{1.0, 0.0});
        worst = std::max(worst, std::abs(v - cd{1.0, 0.0}));
    }
    CHECK(std::sqrt(sq / static_cast<double>(h.values.size())) < 1e-3);
    CHECK(worst < 1.5e-3);

    FrontendConfig longer;
    longer.span_symbols = 24;
    const FullChain precise(radio, longer);
    const auto h24 = precise.csi(std::span(&t, 1), std::numeric_limits<double>::infinity(), rng);
    for (const auto& v : h24.values.data())
        REQUIRE(std::abs(v - cd{1.0, 0.0}) < 1e-3);
}

TEST_CASE("Full chain agrees with the linear model for on-grid static targets")
{
    Rng rng(7);
    const auto radio = RadioConfig::desk();
    const FullChain chain(radio, FrontendConfig{});
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t k : {1u, 17u, 48u}) {
        const Target t{static_cast<double>(k) * radio.range_resolution_m(), 0.0, std::polar(0.8, 1.1)};
        const auto full = chain.csi(std::span(&t, 1), inf, rng);
        const auto lin = synthesize_csi(std::span(&t, 1), inf, radio, rng);
        CHECK(nmse_db(full.values, lin.values) <= -30.0);
    }
}

TEST_CASE("Full chain places subcarrier n at n * subcarrier spacing")
{
    // Fractional-sample delays (on the upsampled grid, so the channel does not
    // round them) are where a wrong frequency mapping shows up.
    Rng rng(17);
    const auto radio = RadioConfig::desk();
    const FullChain chain(radio, FrontendConfig{});
    const double inf = std::numeric_limits<double>::infinity();
    for (double bins : {3.5, 16.375, 40.125}) {
        const Target t{bins * radio.range_resolution_m(), 0.0, std::polar(1.0, 0.3)};
        const auto full = chain.csi(std::span(&t, 1), inf, rng);
        const auto lin = synthesize_csi(std::span(&t, 1), inf, radio, rng);
        // Subcarriers inside the roll-off band alias onto each other, which
        // is exact only for whole-sample delays; compare the flat part.
        const std::size_t edge = 40;
        const std::size_t rows = radio.num_subcarriers - 2 * edge;
        CMatrix a(rows, radio.num_symbols), b(rows, radio.num_symbols);
        for (std::size_t n = 0; n < rows; ++n)
            for (std::size_t m = 0; m < radio.num_symbols; ++m) {
                a(n, m) = full.values(n + edge, m);
                b(n, m) = lin.values(n + edge, m);
            }
        INFO("delay " << bins << " bins: " << nmse_db(a, b) << " dB");
        CHECK(nmse_db(a, b) <= -30.0);
    }
}

TEST_CASE("Full chain noise is calibrated per base-rate sample")
{
    Rng rng(8);
    const auto radio = RadioConfig::desk();
    const FullChain chain(radio, FrontendConfig{});
    const Target t{0.0, 0.0, cd{1.0, 0.0}};
    const auto h = chain.csi(std::span(&t, 1), 10.0, rng);
    double err = 0.0;
    for (const auto& v : h.values.data())
        err += std::norm(v - cd{1.0, 0.0});
    // QPSK has |X| = 1, so the CSI error power is the noise power 0.1.
    CHECK(err / static_cast<double>(h.values.size()) == Approx(0.1).epsilon(0.05));
}

TEST_CASE("Impairments degrade the estimate")
{
    auto radio = RadioConfig::desk();
    radio.modulation = Modulation::Qam256;
    FrontendConfig fe;
    fe.tx_pa = fe.rx_pa = true;
    fe.quantizer = {1, true};
    const FullChain clean(radio, FrontendConfig{}), dirty(radio, fe);
    const Target t{10.0 * radio.range_resolution_m(), 0.0, cd{1.0, 0.0}};
    const double inf = std::numeric_limits<double>::infinity();
    Rng r1(9), r2(9);
    const auto a = clean.csi(std::span(&t, 1), inf, r1);
    const auto b = dirty.csi(std::span(&t, 1), inf, r2);
    Rng r3(10);
    const auto ref = synthesize_csi(std::span(&t, 1), inf, radio, r3);
    CHECK(nmse_db(a.values, ref.values) < -30.0);
    CHECK(nmse_db(b.values, ref.values) > -15.0);
}

TEST_CASE("CSI file round trip and layout")
{
    Rng rng(11);
    auto radio = RadioConfig::desk();
    radio.num_subcarriers = 12;
    radio.num_symbols = 5;
    radio.cp_len_samples = 2;
    const auto h = synthesize_csi({}, 0.0, radio, rng);
    const fs::path path = fs::temp_directory_path() / "isacbench_test_csi.bin";
    write_csi(h, path);
    CHECK(fs::file_size(path) == 16u + 8u * 12u * 5u);
    {
        std::ifstream is(path, std::ios::binary);
        char head[16];
        is.read(head, 16);
        CHECK(std::string(head, 8) == "ISACCSI1");
        CHECK(static_cast<unsigned char>(head[8]) == 12);
        CHECK(static_cast<unsigned char>(head[12]) == 5);
    }
    const auto back = read_csi(path, radio);
    REQUIRE(back.values.rows() == 12);
    REQUIRE(back.values.cols() == 5);
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        CHECK(back.values.data()[i].real() == static_cast<float>(h.values.data()[i].real()));
        CHECK(back.values.data()[i].imag() == static_cast<float>(h.values.data()[i].imag()));
    }
    {
        std::ofstream os(path, std::ios::binary | std::ios::app);
        os.put('x');
    }
    CHECK_THROWS_AS(read_csi(path, radio), Error);
    fs::remove(path);
}
