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
#include "radio_frame.hpp"

#include <algorithm>

namespace isac {

/// Square-root raised cosine interpolation filter, sampled at L samples per
/// base-rate period and normalized to unit energy.
struct SrrcFilter {
    double rolloff = 0.25;
    std::size_t span_symbols = 16; // one-sided
    std::size_t upsampling_factor = 8;
    std::vector<double> taps;

    std::size_t group_delay() const { return span_symbols * upsampling_factor; }
};

/// Continuous SRRC impulse response at t (in base-rate periods), unnormalized.
inline double srrc_response(double t, double beta)
{
    constexpr double eps = 1e-9;
    if (std::abs(t) < eps)
        return 1.0 - beta + 4.0 * beta / kPi;
    if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < eps) {
        const double a = kPi / (4.0 * beta);
        return beta / std::sqrt(2.0) * ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
    const double den = kPi * t * (1.0 - 16.0 * beta * beta * t * t);
    return num / den;
}

inline SrrcFilter srrc_taps(double rolloff, std::size_t span_symbols, std::size_t upsampling_factor)
{
    require(rolloff > 0.0 && rolloff <= 1.0, "srrc_taps: roll-off must lie in (0, 1]");
    require(span_symbols >= 4, "srrc_taps: span must be at least 4 symbols");
    require(upsampling_factor >= 1, "srrc_taps: upsampling factor must be >= 1");

    SrrcFilter f{rolloff, span_symbols, upsampling_factor, {}};
    const std::size_t len = 2 * span_symbols * upsampling_factor + 1;
    const auto center = static_cast<double>(span_symbols * upsampling_factor);
    f.taps.resize(len);
    double energy = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double t = (static_cast<double>(i) - center) / static_cast<double>(upsampling_factor);
        f.taps[i] = srrc_response(t, rolloff);
        energy += f.taps[i] * f.taps[i];
    }
    const double g = 1.0 / std::sqrt(energy);
    for (auto& v : f.taps)
        v *= g;
    // Enforce exact symmetry against rounding in the two halves.
    for (std::size_t i = 0; i < len / 2; ++i) {
        const double avg = 0.5 * (f.taps[i] + f.taps[len - 1 - i]);
        f.taps[i] = f.taps[len - 1 - i] = avg;
    }
    return f;
}

/// Zero-stuff by L and filter. The √L gain keeps the per-sample power of the
/// upsampled stream equal to the base-rate power. Output length is
/// (n - 1) L + taps.size(); sample i corresponds to base time (i - span L) / L.
inline BasebandSignal pulse_shape(const BasebandSignal& s, const SrrcFilter& f)
{
    require(s.origin == SampleRate::Base, "pulse_shape: input must be at the base rate");
    require(!f.taps.empty(), "pulse_shape: empty filter");
    const std::size_t L = f.upsampling_factor;
    const std::size_t len = f.taps.size();

    BasebandSignal out;
    out.origin = SampleRate::Upsampled;
    out.sample_rate_hz = s.sample_rate_hz * static_cast<double>(L);
    if (s.samples.empty())
        return out;
    out.samples.assign((s.samples.size() - 1) * L + len, cd{});

    const double gain = std::sqrt(static_cast<double>(L));
    for (std::size_t k = 0; k < s.samples.size(); ++k) {
        const cd a = s.samples[k] * gain;
        if (a == cd{})
            continue;
        cd* dst = out.samples.data() + k * L;
        for (std::size_t j = 0; j < len; ++j)
            dst[j] += a * f.taps[j];
    }
    return out;
}

/// Receive filter matched to pulse_shape: correlate with the (real, even) taps,
/// skip the combined 2 span L group delay and keep every L-th sample. The 1/√L
/// gain undoes the transmit-side scaling.
inline BasebandSignal matched_filter_downsample(const BasebandSignal& r, const SrrcFilter& f)
{
    require(r.origin == SampleRate::Upsampled, "matched_filter_downsample: input must be upsampled");
    const std::size_t L = f.upsampling_factor;
    const std::size_t len = f.taps.size();
    const std::size_t delay = 2 * f.group_delay();
    require(r.samples.size() >= delay + 1, "matched_filter_downsample: input shorter than the filter transient");

    const std::size_t count = (r.samples.size() - delay - 1) / L + 1;
    BasebandSignal out;
    out.origin = SampleRate::Base;
    out.sample_rate_hz = r.sample_rate_hz / static_cast<double>(L);
    out.samples.resize(count);

    const double gain = 1.0 / std::sqrt(static_cast<double>(L));
    const std::size_t n_in = r.samples.size();
    for (std::size_t k = 0; k < count; ++k) {
        // y[i] = sum_j r[j] taps[i - j], i = delay + k L, j in [i - len + 1, i]
        const std::size_t i = delay + k * L;
        const std::size_t j0 = i + 1 - len; // delay + 1 >= len, never negative
        const std::size_t j1 = std::min(i, n_in - 1);
        cd acc{};
        for (std::size_t j = j0; j <= j1; ++j)
            acc += r.samples[j] * f.taps[i - j];
        out.samples[k] = acc * gain;
    }
    return out;
}

/// Multiply sample i by exp(j2π f (i - origin)), f in cycles per sample.
inline BasebandSignal frequency_shift(const BasebandSignal& x, double cycles_per_sample, double origin = 0.0)
{
    BasebandSignal y = x;
    for (std::size_t i = 0; i < y.samples.size(); ++i)
        y.samples[i] *= std::polar(1.0, kTwoPi * cycles_per_sample * (static_cast<double>(i) - origin));
    return y;
}

// ---------------------------------------------------------------------------
// Power amplifier
// ---------------------------------------------------------------------------

/// Memoryless soft limiter: |y| = A tanh(|x| / A), phase untouched.
struct PaModel {
    double saturation_amplitude = 1.0;
    bool enabled = true;

    /// Saturation level placed ibo_db above the mean input power.
    static PaModel from_backoff(double ibo_db, double input_power)
    {
        require(input_power > 0.0, "PaModel: input power must be positive");
        return {std::sqrt(input_power * db_to_linear(ibo_db)), true};
    }
};

inline cd pa_sample(cd x, double a_sat)
{
    const double mag = std::abs(x);
    if (mag == 0.0)
        return x;
    return x * (a_sat * std::tanh(mag / a_sat) / mag);
}

inline BasebandSignal pa_apply(const BasebandSignal& x, const PaModel& pa)
{
    if (!pa.enabled)
        return x;
    require(pa.saturation_amplitude > 0.0, "pa_apply: saturation amplitude must be positive");
    BasebandSignal y = x;
    for (auto& v : y.samples)
        v = pa_sample(v, pa.saturation_amplitude);
    return y;
}

// ---------------------------------------------------------------------------
// Quantizer
// ---------------------------------------------------------------------------

struct QuantizerConfig {
    int bits = 64;
    bool enabled = true;
};

/// Uniform mid-rise quantizer with 2^Q levels per real component over
/// [-F, F]. step = 2F / 2^Q, reconstruction at level centers.
inline double quantize_component(double v, double full_scale, int bits)
{
    const double levels = std::ldexp(1.0, bits);
    const double step = 2.0 * full_scale / levels;
    const double half = levels / 2.0;
    const double idx = std::clamp(std::floor(v / step), -half, half - 1.0);
    return (idx + 0.5) * step;
}

/// Per-frame full scale F = max(|re|, |im|) over the block (ideal AGC).
inline BasebandSignal quantize(const BasebandSignal& y, const QuantizerConfig& q)
{
    require(q.bits >= 1 && q.bits <= 64, "quantize: bits must lie in [1, 64]");
    if (!q.enabled || q.bits >= 64)
        return y;
    double full_scale = 0.0;
    for (const auto& v : y.samples)
        full_scale = std::max({full_scale, std::abs(v.real()), std::abs(v.imag())});
    if (full_scale == 0.0)
        return y;
    BasebandSignal out = y;
    for (auto& v : out.samples)
        v = {quantize_component(v.real(), full_scale, q.bits), quantize_component(v.imag(), full_scale, q.bits)};
    return out;
}

} // namespace isac
