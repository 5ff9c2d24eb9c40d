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

namespace isac {

/// Point scatterer. Delay and Doppler are derived on demand so they can never
/// drift out of sync with range and velocity.
struct Target {
    double range_m = 0.0;
    double velocity_mps = 0.0;
    cd alpha{1.0, 0.0};

    double delay_s() const { return 2.0 * range_m / kSpeedOfLight; }
    double doppler_hz(double carrier_freq_hz) const { return 2.0 * velocity_mps * carrier_freq_hz / kSpeedOfLight; }

    bool operator==(const Target&) const = default;
};

enum class MagnitudeLaw { Rice, Unit };

struct TargetSamplingSpec {
    std::size_t count_min = 1; // P ~ U{count_min, ..., count_max}
    std::size_t count_max = 15;
    double range_min_m = 0.0;
    double range_max_m = 78.0;
    double velocity_min_mps = -19.0;
    double velocity_max_mps = 19.0;
    MagnitudeLaw magnitude = MagnitudeLaw::Rice;
    double rice_k = 3.0;
    double rice_omega = 1.0;
    // Two targets conflict when they are closer than both spacings at once.
    double min_range_spacing_m = 2.0;
    double min_velocity_spacing_mps = 2.0;
    bool enforce_min_spacing = true;
    std::size_t retry_budget = 1000;

    static TargetSamplingSpec fixed(std::size_t count)
    {
        TargetSamplingSpec s;
        s.count_min = s.count_max = count;
        return s;
    }

    /// The full-size placement box and spacings re-expressed in resolution
    /// cells of `radio`: 48 range cells, +-16 velocity cells, spacings scaled by
    /// the ratio of 2 m (2 m/s) to the full-size resolution.
    static TargetSamplingSpec scaled_to(const RadioConfig& radio)
    {
        const RadioConfig ref = RadioConfig::table2();
        const double dr = radio.range_resolution_m();
        const double dv = radio.velocity_resolution_mps();
        TargetSamplingSpec s;
        s.range_max_m = 48.0 * dr;
        s.velocity_min_mps = -16.0 * dv;
        s.velocity_max_mps = 16.0 * dv;
        s.min_range_spacing_m = 2.0 / ref.range_resolution_m() * dr;
        s.min_velocity_spacing_mps = 2.0 / ref.velocity_resolution_mps() * dv;
        return s;
    }

    void validate() const
    {
        require(count_min <= count_max, "TargetSamplingSpec: count bounds out of order");
        require(range_min_m >= 0.0 && range_min_m <= range_max_m, "TargetSamplingSpec: bad range bounds");
        require(velocity_min_mps <= velocity_max_mps, "TargetSamplingSpec: bad velocity bounds");
        require(rice_k >= 0.0 && rice_omega > 0.0, "TargetSamplingSpec: Rice K must be >= 0 and Omega > 0");
    }

    bool operator==(const TargetSamplingSpec&) const = default;
};

/// Rice amplitude with shape K and mean-square Omega.
inline double sample_rice(Rng& rng, double k, double omega)
{
    const double los = std::sqrt(k * omega / (k + 1.0));
    const double diffuse = omega / (k + 1.0);
    return std::abs(cd{los, 0.0} + rng.complex_normal(diffuse));
}

inline bool too_close(const Target& a, const Target& b, const TargetSamplingSpec& spec)
{
    return std::abs(a.range_m - b.range_m) < spec.min_range_spacing_m &&
           std::abs(a.velocity_mps - b.velocity_mps) < spec.min_velocity_spacing_mps;
}

/// Uniform placement in the box with sequential rejection of conflicting
/// positions, then i.i.d. magnitudes and uniform phases. No path loss.
inline std::vector<Target> sample_targets(Rng& rng, const TargetSamplingSpec& spec)
{
    spec.validate();
    const auto count = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(spec.count_min),
                                                                static_cast<std::int64_t>(spec.count_max)));
    std::vector<Target> targets;
    targets.reserve(count);
    std::size_t rejections = 0;
    while (targets.size() < count) {
        Target t;
        t.range_m = rng.uniform(spec.range_min_m, spec.range_max_m);
        t.velocity_mps = rng.uniform(spec.velocity_min_mps, spec.velocity_max_mps);
        bool ok = true;
        if (spec.enforce_min_spacing) {
            for (const auto& other : targets)
                if (too_close(t, other, spec)) {
                    ok = false;
                    break;
                }
        }
        if (!ok) {
            if (++rejections > spec.retry_budget)
                throw Error("sample_targets: retry budget exhausted, placement box too crowded");
            continue;
        }
        targets.push_back(t);
    }
    for (auto& t : targets) {
        const double mag = spec.magnitude == MagnitudeLaw::Rice ? sample_rice(rng, spec.rice_k, spec.rice_omega) : 1.0;
        t.alpha = std::polar(mag, rng.uniform(0.0, kTwoPi));
    }
    return targets;
}

/// Sum of delayed, Doppler-rotated, scaled copies of x. Delays are rounded to
/// the nearest sample of x; the Doppler phasor runs at the sample rate of x
/// with t = 0 at its first sample. The output keeps the input length.
inline BasebandSignal apply_channel(const BasebandSignal& x, std::span<const Target> targets, const RadioConfig& cfg)
{
    require(x.origin == SampleRate::Upsampled, "apply_channel: input must be at the upsampled rate");
    require(x.sample_rate_hz > 0.0, "apply_channel: sample rate not set");
    BasebandSignal out;
    out.origin = x.origin;
    out.sample_rate_hz = x.sample_rate_hz;
    out.samples.assign(x.samples.size(), cd{});
    const std::size_t n = x.samples.size();

    for (const auto& t : targets) {
        const double tau_samples = t.delay_s() * x.sample_rate_hz;
        require(tau_samples >= 0.0, "apply_channel: negative delay");
        const auto d = static_cast<std::size_t>(std::llround(tau_samples));
        require(d < n || n == 0, "apply_channel: target delay exceeds the signal duration");
        const double w = kTwoPi * t.doppler_hz(cfg.carrier_freq_hz) / x.sample_rate_hz;
        const cd step = std::polar(1.0, w);
        constexpr std::size_t kRenorm = 1024;
        cd phasor = std::polar(1.0, w * static_cast<double>(d));
        for (std::size_t i = d; i < n; ++i) {
            if ((i - d) % kRenorm == 0)
                phasor = std::polar(1.0, w * static_cast<double>(i));
            out.samples[i] += t.alpha * x.samples[i - d] * phasor;
            phasor *= step;
        }
    }
    return out;
}

/// Add circular complex Gaussian noise at the requested SNR. Signal power is
/// measured on r; `oversampling` lifts the per-sample noise variance so that
/// after an energy-normalized matched filter and decimation by that factor the
/// SNR refers to one base-rate complex sample. snr_db = +inf leaves r intact.
inline BasebandSignal add_awgn(const BasebandSignal& r, double snr_db, Rng& rng, double oversampling = 1.0)
{
    if (std::isinf(snr_db) && snr_db > 0.0)
        return r;
    const double ps = mean_power(r.samples);
    require(ps > 0.0, "add_awgn: zero-power input with finite SNR");
    const double variance = oversampling * ps * db_to_linear(-snr_db);
    BasebandSignal out = r;
    for (auto& v : out.samples)
        v += rng.complex_normal(variance);
    return out;
}

} // namespace isac
