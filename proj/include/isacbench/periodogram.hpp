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

#include "binary_io.hpp"
#include "common.hpp"
#include "csi.hpp"
#include "fft.hpp"
#include "windows.hpp"

#include <array>
#include <filesystem>

namespace isac {

/// Physical mapping of periodogram bins: row r is range r * range_per_bin_m,
/// column c is velocity velocity_offset_mps + c * velocity_per_bin_mps.
struct AxisInfo {
    double range_per_bin_m = 1.0;
    double velocity_per_bin_mps = 1.0;
    double velocity_offset_mps = 0.0;

    double range_of(double row) const { return row * range_per_bin_m; }
    double velocity_of(double col) const { return velocity_offset_mps + col * velocity_per_bin_mps; }
    double row_of(double range_m) const { return range_m / range_per_bin_m; }
    double col_of(double velocity_mps) const { return (velocity_mps - velocity_offset_mps) / velocity_per_bin_mps; }

    bool operator==(const AxisInfo&) const = default;
};

/// Range/Doppler power image: rows are range bins, columns Doppler bins with
/// zero velocity at column M'/2.
struct Periodogram {
    RMatrix power;
    AxisInfo axis;

    std::size_t rows() const { return power.rows(); }
    std::size_t cols() const { return power.cols(); }
};

inline AxisInfo axis_for(const RadioConfig& radio, std::size_t padded_rows, std::size_t padded_cols)
{
    AxisInfo a;
    a.range_per_bin_m = kSpeedOfLight / (2.0 * radio.subcarrier_spacing_hz * static_cast<double>(padded_rows));
    a.velocity_per_bin_mps = kSpeedOfLight / (2.0 * radio.carrier_freq_hz * radio.total_symbol_time_s() *
                                              static_cast<double>(padded_cols));
    a.velocity_offset_mps = -static_cast<double>(padded_cols / 2) * a.velocity_per_bin_mps;
    return a;
}

/// Separable 2D window: H'[n, m] = H[n, m] w_rows[n] w_cols[m].
inline CsiMatrix apply_window(const CsiMatrix& h, std::span<const double> w_rows, std::span<const double> w_cols)
{
    require(w_rows.size() == h.values.rows() && w_cols.size() == h.values.cols(),
            "apply_window: window lengths do not match the CSI dimensions");
    CsiMatrix out = h;
    for (std::size_t n = 0; n < out.values.rows(); ++n) {
        auto row = out.values.row(n);
        for (std::size_t m = 0; m < row.size(); ++m)
            row[m] *= w_rows[n] * w_cols[m];
    }
    return out;
}

inline CsiMatrix apply_window(const CsiMatrix& h, const WindowSpec& spec)
{
    const auto wr = make_window(spec, h.values.rows());
    const auto wc = make_window(spec, h.values.cols());
    return apply_window(h, wr, wc);
}

/// Zero-pad to powers of two, DFT over symbols, IDFT over subcarriers, take
/// |.|^2 / (N' M') and center zero Doppler.
inline Periodogram compute_periodogram(const CsiMatrix& hw)
{
    const std::size_t n = hw.values.rows();
    const std::size_t m = hw.values.cols();
    const std::size_t np = fft::next_pow2(std::max<std::size_t>(n, 1));
    const std::size_t mp = fft::next_pow2(std::max<std::size_t>(m, 1));

    CMatrix grid(np, mp);
    for (std::size_t r = 0; r < n; ++r) {
        auto src = hw.values.row(r);
        auto dst = grid.row(r);
        std::copy(src.begin(), src.end(), dst.begin());
        fft::forward(dst);
    }
    fft::transform_columns(grid, fft::Direction::Backward);

    Periodogram s;
    s.power = RMatrix(np, mp);
    s.axis = axis_for(hw.radio, np, mp);
    const double scale = 1.0 / (static_cast<double>(np) * static_cast<double>(mp));
    const std::size_t shift = mp / 2;
    for (std::size_t r = 0; r < np; ++r)
        for (std::size_t c = 0; c < mp; ++c)
            s.power(r, (c + shift) % mp) = std::norm(grid(r, c)) * scale;
    return s;
}

inline Periodogram compute_periodogram(const CsiMatrix& h, const WindowSpec& spec)
{
    return compute_periodogram(apply_window(h, spec));
}

/// Mean periodogram level produced by white CSI noise of variance sigma2
/// after windowing with `spec`.
inline double windowed_noise_level(double sigma2, const WindowSpec& spec, std::size_t n, std::size_t m)
{
    const auto wr = make_window(spec, n);
    const auto wc = make_window(spec, m);
    const double np = static_cast<double>(fft::next_pow2(n));
    const double mp = static_cast<double>(fft::next_pow2(m));
    return sigma2 * sum_of_squares(wr) * sum_of_squares(wc) / (np * mp);
}

inline std::array<WindowSpec, 5> default_stack_windows()
{
    return {WindowSpec::rectangular(), WindowSpec::hann(), WindowSpec::dpss(2.5), WindowSpec::dpss(3.5),
            WindowSpec::dpss(4.5)};
}

/// Five-channel image stack (rectangular, Hann, three DPSS) for learned
/// detectors that compare sidelobe structure across tapers.
inline std::vector<Periodogram> multi_window_stack(const CsiMatrix& h,
                                                   const std::array<WindowSpec, 5>& windows = default_stack_windows())
{
    std::vector<Periodogram> out;
    out.reserve(windows.size());
    for (const auto& w : windows)
        out.push_back(compute_periodogram(h, w));
    return out;
}

inline double median_power(const Periodogram& s)
{
    std::vector<double> v = s.power.data();
    require(!v.empty(), "median_power: empty image");
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

/// Noise floor of an image relative to its mean power, in dB. Invariant to
/// the overall gain of the receive chain.
inline double relative_noise_floor_db(const Periodogram& s)
{
    double total = 0.0;
    for (double v : s.power.data())
        total += v;
    const double mean = total / static_cast<double>(s.power.size());
    return linear_to_db(median_power(s) / mean);
}

// ---------------------------------------------------------------------------
// File format: "ISACPER1", u32 N', u32 M', N'*M' float32 row-major, then
// float64 range_per_bin, velocity_per_bin, velocity_offset. Little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kPeriodogramMagic = "ISACPER1";

inline void write_periodogram(const Periodogram& s, const std::filesystem::path& path)
{
    io::Writer w(path);
    w.magic(kPeriodogramMagic);
    w.u32(static_cast<std::uint32_t>(s.rows()));
    w.u32(static_cast<std::uint32_t>(s.cols()));
    for (double v : s.power.data())
        w.f32(static_cast<float>(v));
    w.f64(s.axis.range_per_bin_m);
    w.f64(s.axis.velocity_per_bin_mps);
    w.f64(s.axis.velocity_offset_mps);
    w.finish();
}

inline Periodogram read_periodogram(const std::filesystem::path& path)
{
    io::Reader r(path);
    r.expect_magic(kPeriodogramMagic);
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    Periodogram s;
    s.power = RMatrix(rows, cols);
    for (auto& v : s.power.data())
        v = r.f32();
    s.axis.range_per_bin_m = r.f64();
    s.axis.velocity_per_bin_mps = r.f64();
    s.axis.velocity_offset_mps = r.f64();
    r.expect_end();
    return s;
}

} // namespace isac
