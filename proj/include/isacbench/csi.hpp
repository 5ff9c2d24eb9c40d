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

#include "analog_frontend.hpp"
#include "binary_io.hpp"
#include "channel.hpp"
#include "common.hpp"
#include "radio_frame.hpp"

#include <filesystem>

namespace isac {

enum class CsiProvenance { FullChain, Linear, External };

/// Channel estimate H (N subcarriers x M symbols).
struct CsiMatrix {
    CMatrix values;
    RadioConfig radio;
    CsiProvenance provenance = CsiProvenance::Linear;
};

inline CsiMatrix extract_csi(const CMatrix& received, const Frame& frame, const RadioConfig& radio)
{
    require(received.rows() == frame.symbols.rows() && received.cols() == frame.symbols.cols(),
            "extract_csi: received and transmitted frames differ in shape");
    CsiMatrix h{CMatrix(received.rows(), received.cols()), radio, CsiProvenance::FullChain};
    const auto& x = frame.symbols.data();
    const auto& y = received.data();
    auto& out = h.values.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(x[i] != cd{}, "extract_csi: zero transmitted symbol");
        out[i] = y[i] / x[i];
    }
    return h;
}

/// Frequency-domain channel on the OFDM grid, without hardware effects:
/// H[n, m] = sum_p a_p exp(-j2π n Δf τ_p) exp(j2π f_D,p m (T + T_CP)) + w[n, m],
/// with E|w|^2 = 10^(-snr/10), i.e. SNR per unit-magnitude target.
inline CsiMatrix synthesize_csi(std::span<const Target> targets, double snr_db, const RadioConfig& radio, Rng& rng)
{
    radio.validate();
    const std::size_t n = radio.num_subcarriers;
    const std::size_t m = radio.num_symbols;
    CsiMatrix h{CMatrix(n, m), radio, CsiProvenance::Linear};

    std::vector<cd> along_rows(n);
    std::vector<cd> along_cols(m);
    for (const auto& t : targets) {
        const double range_phase = -kTwoPi * radio.subcarrier_spacing_hz * t.delay_s();
        const double doppler_phase = kTwoPi * t.doppler_hz(radio.carrier_freq_hz) * radio.total_symbol_time_s();
        for (std::size_t k = 0; k < n; ++k)
            along_rows[k] = t.alpha * std::polar(1.0, range_phase * static_cast<double>(k));
        for (std::size_t l = 0; l < m; ++l)
            along_cols[l] = std::polar(1.0, doppler_phase * static_cast<double>(l));
        for (std::size_t k = 0; k < n; ++k) {
            auto row = h.values.row(k);
            for (std::size_t l = 0; l < m; ++l)
                row[l] += along_rows[k] * along_cols[l];
        }
    }
    if (!(std::isinf(snr_db) && snr_db > 0.0)) {
        const double variance = db_to_linear(-snr_db);
        for (auto& v : h.values.data())
            v += rng.complex_normal(variance);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Time-domain chain
// ---------------------------------------------------------------------------

struct FrontendConfig {
    double rolloff = 0.25;
    std::size_t span_symbols = 16;
    bool tx_pa = false;
    bool rx_pa = false;
    double tx_pa_ibo_db = 0.0;
    double rx_pa_ibo_db = 0.0;
    QuantizerConfig quantizer{64, false};

    bool operator==(const FrontendConfig&) const = default;
};

/// Transmit a random frame through pulse shaping, TX PA, the target channel,
/// AWGN, RX PA, matched filtering, quantization and OFDM demodulation, then
/// divide out the known symbols.
///
/// The base-rate IDFT puts subcarriers n >= N/2 at negative frequencies. The
/// chain centers the band before shaping and moves it up by N/2 Δf afterwards,
/// so subcarrier n really sits at n Δf, as in the linear model. Without this,
/// a fractional-sample delay leaves a phase step at n = N/2 and splits every
/// range peak in two.
class FullChain {
public:
    FullChain(const RadioConfig& radio, const FrontendConfig& fe)
        : radio_(radio), fe_(fe), filter_(srrc_taps(fe.rolloff, fe.span_symbols, radio.upsampling_factor))
    {
        radio_.validate();
    }

    const SrrcFilter& filter() const { return filter_; }

    /// Received resource grid Y for a given frame.
    CMatrix receive(const Frame& frame, std::span<const Target> targets, double snr_db, Rng& rng) const
    {
        const auto L = static_cast<double>(radio_.upsampling_factor);
        const auto origin = static_cast<double>(filter_.group_delay());
        BasebandSignal s = frequency_shift(ofdm_modulate(frame, radio_), -0.5);
        BasebandSignal x = frequency_shift(pulse_shape(s, filter_), 0.5 / L, origin);
        if (fe_.tx_pa)
            x = pa_apply(x, PaModel::from_backoff(fe_.tx_pa_ibo_db, mean_power(x.samples)));
        BasebandSignal r = apply_channel(x, targets, radio_);
        r = add_awgn(r, snr_db, rng, static_cast<double>(radio_.upsampling_factor));
        if (fe_.rx_pa) {
            const double p = mean_power(r.samples);
            if (p > 0.0)
                r = pa_apply(r, PaModel::from_backoff(fe_.rx_pa_ibo_db, p));
        }
        BasebandSignal y = matched_filter_downsample(frequency_shift(r, -0.5 / L, origin), filter_);
        y.samples.resize(radio_.frame_samples());
        y = frequency_shift(y, 0.5);
        y = quantize(y, fe_.quantizer);
        return ofdm_demodulate(y, radio_);
    }

    CsiMatrix csi(const Frame& frame, std::span<const Target> targets, double snr_db, Rng& rng) const
    {
        return extract_csi(receive(frame, targets, snr_db, rng), frame, radio_);
    }

    /// Draws the frame from rng first, then the noise.
    CsiMatrix csi(std::span<const Target> targets, double snr_db, Rng& rng) const
    {
        const Frame frame = generate_frame(rng, radio_);
        return csi(frame, targets, snr_db, rng);
    }

private:
    RadioConfig radio_;
    FrontendConfig fe_;
    SrrcFilter filter_;
};

/// Normalized mean squared error 10 log10(|a - b|^2 / |b|^2).
inline double nmse_db(const CMatrix& a, const CMatrix& b)
{
    require(a.size() == b.size(), "nmse_db: size mismatch");
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        err += std::norm(a.data()[i] - b.data()[i]);
        ref += std::norm(b.data()[i]);
    }
    return linear_to_db(err / ref);
}

// ---------------------------------------------------------------------------
// File format: "ISACCSI1", u32 N, u32 M, then N*M (float32 re, float32 im)
// row-major over subcarriers. Little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsiMagic = "ISACCSI1";

inline void write_csi(const CsiMatrix& h, const std::filesystem::path& path)
{
    io::Writer w(path);
    w.magic(kCsiMagic);
    w.u32(static_cast<std::uint32_t>(h.values.rows()));
    w.u32(static_cast<std::uint32_t>(h.values.cols()));
    for (const auto& v : h.values.data()) {
        w.f32(static_cast<float>(v.real()));
        w.f32(static_cast<float>(v.imag()));
    }
    w.finish();
}

/// The radio configuration is not part of the file; the caller supplies it.
inline CsiMatrix read_csi(const std::filesystem::path& path, const RadioConfig& radio = RadioConfig::desk())
{
    io::Reader r(path);
    r.expect_magic(kCsiMagic);
    const std::uint32_t n = r.u32();
    const std::uint32_t m = r.u32();
    CsiMatrix h{CMatrix(n, m), radio, CsiProvenance::External};
    h.radio.num_subcarriers = n;
    h.radio.num_symbols = m;
    for (auto& v : h.values.data()) {
        const float re = r.f32();
        const float im = r.f32();
        v = {re, im};
    }
    r.expect_end();
    return h;
}

} // namespace isac
