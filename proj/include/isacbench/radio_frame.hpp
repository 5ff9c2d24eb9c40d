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

#pragma once

#include "common.hpp"
#include "fft.hpp"

#include <array>
#include <string>
#include <string_view>

namespace isac {

enum class Modulation { Qpsk, Qam256 };

inline std::string to_string(Modulation m) { return m == Modulation::Qpsk ? "qpsk" : "qam256"; }

inline Modulation modulation_from_string(std::string_view s)
{
    if (s == "qpsk")
        return Modulation::Qpsk;
    if (s == "qam256" || s == "256qam")
        return Modulation::Qam256;
    throw Error("unsupported modulation '" + std::string(s) + "'");
}

/// OFDM radio parameters. The symbol time is always derived from the
/// subcarrier spacing, never stored.
struct RadioConfig {
    double carrier_freq_hz = 28.0e9;
    std::size_t num_subcarriers = 256;   // N
    double subcarrier_spacing_hz = 120e3; // Δf
    std::size_t num_symbols = 64;        // M
    std::size_t cp_len_samples = 64;     // base-rate samples
    std::size_t upsampling_factor = 8;   // L
    Modulation modulation = Modulation::Qpsk;

    /// Reduced grid used by the tests and the default benchmark campaigns.
    static RadioConfig desk() { return {}; }

    /// Full-size numerology: 1584 subcarriers at 120 kHz (190 MHz), 1120 symbols,
    /// 0.59 µs cyclic prefix.
    static RadioConfig table2()
    {
        RadioConfig c;
        c.num_subcarriers = 1584;
        c.num_symbols = 1120;
        c.cp_len_samples = 112;
        return c;
    }

    double symbol_time_s() const { return 1.0 / subcarrier_spacing_hz; }
    double bandwidth_hz() const { return static_cast<double>(num_subcarriers) * subcarrier_spacing_hz; }
    double base_rate_hz() const { return bandwidth_hz(); }
    double upsampled_rate_hz() const { return bandwidth_hz() * static_cast<double>(upsampling_factor); }
    double cp_time_s() const { return static_cast<double>(cp_len_samples) / base_rate_hz(); }
    double total_symbol_time_s() const { return symbol_time_s() + cp_time_s(); }
    std::size_t samples_per_symbol() const { return num_subcarriers + cp_len_samples; }
    std::size_t frame_samples() const { return num_symbols * samples_per_symbol(); }

    /// c0 / (2 N Δf)
    double range_resolution_m() const { return kSpeedOfLight / (2.0 * bandwidth_hz()); }
    /// c0 / (2 f_c M (T + T_CP))
    double velocity_resolution_mps() const
    {
        return kSpeedOfLight / (2.0 * carrier_freq_hz * static_cast<double>(num_symbols) * total_symbol_time_s());
    }

    void validate() const
    {
        require(num_subcarriers >= 1, "RadioConfig: need at least one subcarrier");
        require(num_symbols >= 1, "RadioConfig: need at least one OFDM symbol");
        require(upsampling_factor >= 1, "RadioConfig: upsampling factor must be >= 1");
        require(cp_len_samples < num_subcarriers, "RadioConfig: cyclic prefix must be shorter than N");
        require(subcarrier_spacing_hz > 0.0 && carrier_freq_hz > 0.0, "RadioConfig: frequencies must be positive");
    }

    bool operator==(const RadioConfig&) const = default;
};

/// Transmitted resource grid X (N subcarriers x M symbols).
struct Frame {
    CMatrix symbols;
    Modulation modulation = Modulation::Qpsk;
    std::uint64_t seed = 0;
};

enum class SampleRate { Base, Upsampled };

struct BasebandSignal {
    std::vector<cd> samples;
    double sample_rate_hz = 0.0;
    SampleRate origin = SampleRate::Base;
};

// ---------------------------------------------------------------------------
// Constellations
// ---------------------------------------------------------------------------

inline const std::vector<cd>& constellation(Modulation mod)
{
    static const std::vector<cd> qpsk = [] {
        const double a = 1.0 / std::sqrt(2.0);
        return std::vector<cd>{{a, a}, {-a, a}, {-a, -a}, {a, -a}};
    }();
    // Square 256-QAM on odd integer levels, mean energy 2 * 85 = 170.
    static const std::vector<cd> qam256 = [] {
        std::vector<cd> pts;
        pts.reserve(256);
        const double scale = 1.0 / std::sqrt(170.0);
        for (int i = -15; i <= 15; i += 2)
            for (int q = -15; q <= 15; q += 2)
                pts.emplace_back(i * scale, q * scale);
        return pts;
    }();
    switch (mod) {
    case Modulation::Qpsk:
        return qpsk;
    case Modulation::Qam256:
        return qam256;
    }
    throw Error("unsupported modulation");
}

/// Fill an N x M grid with i.i.d. uniformly drawn constellation points.
inline Frame generate_frame(Rng& rng, const RadioConfig& cfg)
{
    cfg.validate();
    const auto& alphabet = constellation(cfg.modulation);
    Frame f;
    f.modulation = cfg.modulation;
    f.seed = rng.key();
    f.symbols = CMatrix(cfg.num_subcarriers, cfg.num_symbols);
    const auto last = static_cast<std::int64_t>(alphabet.size()) - 1;
    for (auto& x : f.symbols.data())
        x = alphabet[static_cast<std::size_t>(rng.uniform_int(0, last))];
    return f;
}

// ---------------------------------------------------------------------------
// OFDM modulation
// ---------------------------------------------------------------------------

/// Per symbol: length-N IDFT scaled by 1/N, prefixed with its last cp samples.
/// The output is the base-rate frame of M (N + cp) samples.
inline BasebandSignal ofdm_modulate(const Frame& frame, const RadioConfig& cfg)
{
    cfg.validate();
    const std::size_t n = cfg.num_subcarriers;
    const std::size_t cp = cfg.cp_len_samples;
    require(frame.symbols.rows() == n && frame.symbols.cols() == cfg.num_symbols,
            "ofdm_modulate: frame dimensions do not match the radio configuration");

    BasebandSignal out;
    out.sample_rate_hz = cfg.base_rate_hz();
    out.origin = SampleRate::Base;
    out.samples.resize(cfg.frame_samples());

    std::vector<cd> body(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t m = 0; m < cfg.num_symbols; ++m) {
        for (std::size_t k = 0; k < n; ++k)
            body[k] = frame.symbols(k, m);
        fft::backward(body);
        cd* dst = out.samples.data() + m * (n + cp);
        for (std::size_t k = 0; k < cp; ++k)
            dst[k] = body[n - cp + k] * inv_n;
        for (std::size_t k = 0; k < n; ++k)
            dst[cp + k] = body[k] * inv_n;
    }
    return out;
}

/// Inverse of ofdm_modulate: drop each cyclic prefix and apply an unscaled
/// length-N DFT, so an ideal channel returns X unchanged.
inline CMatrix ofdm_demodulate(const BasebandSignal& y, const RadioConfig& cfg)
{
    cfg.validate();
    const std::size_t n = cfg.num_subcarriers;
    const std::size_t cp = cfg.cp_len_samples;
    require(y.samples.size() == cfg.frame_samples(),
            "ofdm_demodulate: expected " + std::to_string(cfg.frame_samples()) + " base-rate samples, got " +
                std::to_string(y.samples.size()));

    CMatrix out(n, cfg.num_symbols);
    std::vector<cd> body(n);
    for (std::size_t m = 0; m < cfg.num_symbols; ++m) {
        const cd* src = y.samples.data() + m * (n + cp) + cp;
        std::copy(src, src + n, body.begin());
        fft::forward(body);
        for (std::size_t k = 0; k < n; ++k)
            out(k, m) = body[k];
    }
    return out;
}

} // namespace isac
