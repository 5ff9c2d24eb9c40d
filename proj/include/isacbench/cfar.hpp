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
#include "periodogram.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace isac {

/// Sliding-window geometry and censoring for the CFAR family. The reference
/// band is the (2w+1) box minus the (2g+1) guard box around the cell under
/// test; R counts its cells.
struct CfarConfig {
    double p_fa = 1e-4;
    std::size_t guard_range = 2;
    std::size_t guard_doppler = 2;
    std::size_t reference_range = 6;
    std::size_t reference_doppler = 6;
    // Censoring counts apply to reference cells when num_subwindows == 0 and to
    // sub-window means otherwise.
    std::size_t censor_strongest = 0;
    std::size_t censor_weakest = 0;
    std::size_t num_subwindows = 8; // 0: exact per-cell sorting

    std::size_t reference_cells() const
    {
        return (2 * reference_range + 1) * (2 * reference_doppler + 1) - (2 * guard_range + 1) * (2 * guard_doppler + 1);
    }

    /// Number of samples that censoring operates on.
    std::size_t censor_population() const { return num_subwindows == 0 ? reference_cells() : num_subwindows; }

    bool is_ordered_statistic() const { return censor_strongest + censor_weakest + 1 == censor_population(); }

    /// Keep only the rank-th smallest (1-based) of the censoring population.
    CfarConfig with_os_rank(std::size_t rank) const
    {
        const std::size_t n = censor_population();
        require(rank >= 1 && rank <= n, "CfarConfig: OS rank out of range");
        CfarConfig c = *this;
        c.censor_weakest = rank - 1;
        c.censor_strongest = n - rank;
        return c;
    }

    /// Median order statistic, rank floor((n + 1) / 2).
    CfarConfig with_median() const { return with_os_rank((censor_population() + 1) / 2); }

    void validate() const
    {
        require(p_fa > 0.0 && p_fa < 1.0, "CfarConfig: p_fa must lie in (0, 1)");
        require(reference_range > guard_range && reference_doppler > guard_doppler,
                "CfarConfig: reference extent must exceed the guard extent on both axes");
        const std::size_t r = reference_cells();
        require(num_subwindows == 0 || r % num_subwindows == 0,
                "CfarConfig: reference cell count must be divisible by the number of sub-windows");
        require(censor_strongest + censor_weakest < censor_population(), "CfarConfig: censoring removes every sample");
    }

    bool operator==(const CfarConfig&) const = default;
};

struct Detection {
    std::size_t row = 0;
    std::size_t col = 0;
    double power = 0.0;
    double range_m = 0.0;
    double velocity_mps = 0.0;

    bool operator==(const Detection&) const = default;
};

using DetectionList = std::vector<Detection>;

/// Eq. for cell averaging over R exponential cells: R (p_fa^{-1/R} - 1).
inline double threshold_factor(double reference_count, double p_fa)
{
    require(reference_count >= 1.0, "threshold_factor: need at least one reference cell");
    require(p_fa > 0.0 && p_fa < 1.0, "threshold_factor: p_fa must lie in (0, 1)");
    return reference_count * std::expm1(-std::log(p_fa) / reference_count);
}

/// Scale T for an ordered-statistic detector keeping the k-th smallest of R
/// exponential cells: p_fa = prod_{i<k} (R - i) / (R - i + T), solved by
/// bisection.
inline double os_threshold_factor(std::size_t reference_count, std::size_t rank, double p_fa)
{
    require(rank >= 1 && rank <= reference_count, "os_threshold_factor: rank out of range");
    require(p_fa > 0.0 && p_fa < 1.0, "os_threshold_factor: p_fa must lie in (0, 1)");
    const auto log_pfa = [&](double t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rank; ++i) {
            const double ri = static_cast<double>(reference_count - i);
            acc += std::log(ri) - std::log(ri + t);
        }
        return acc;
    };
    const double target = std::log(p_fa);
    double lo = 0.0, hi = 1.0;
    while (log_pfa(hi) > target)
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (log_pfa(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Window masks and the sliding sums
// ---------------------------------------------------------------------------

struct Offset {
    int dr = 0;
    int dd = 0;
};

/// Offsets of the reference band, row-major.
inline std::vector<Offset> reference_offsets(const CfarConfig& cfg)
{
    const int wr = static_cast<int>(cfg.reference_range), wd = static_cast<int>(cfg.reference_doppler);
    const int gr = static_cast<int>(cfg.guard_range), gd = static_cast<int>(cfg.guard_doppler);
    std::vector<Offset> out;
    for (int a = -wr; a <= wr; ++a)
        for (int b = -wd; b <= wd; ++b)
            if (std::abs(a) > gr || std::abs(b) > gd)
                out.push_back({a, b});
    return out;
}

/// Partition the reference band into K equal-sized contiguous angular sectors
/// around the CUT. Sector 0 is centered on the +range axis, so with K = 8 the
/// sectors alternate between side bands and corner blocks.
inline std::vector<std::vector<Offset>> subwindow_offsets(const CfarConfig& cfg)
{
    auto cells = reference_offsets(cfg);
    const std::size_t k = cfg.num_subwindows;
    require(k >= 1 && cells.size() % k == 0, "subwindow_offsets: R must be divisible by K");
    const double start = -kPi / static_cast<double>(k);
    auto angle = [&](const Offset& o) {
        double a = std::atan2(static_cast<double>(o.dd), static_cast<double>(o.dr)) - start;
        while (a < 0.0)
            a += kTwoPi;
        while (a >= kTwoPi)
            a -= kTwoPi;
        return a;
    };
    std::stable_sort(cells.begin(), cells.end(), [&](const Offset& x, const Offset& y) {
        const double ax = angle(x), ay = angle(y);
        if (ax != ay)
            return ax < ay;
        return x.dr * x.dr + x.dd * x.dd < y.dr * y.dr + y.dd * y.dd;
    });
    const std::size_t per = cells.size() / k;
    std::vector<std::vector<Offset>> out(k);
    for (std::size_t i = 0; i < k; ++i)
        out[i].assign(cells.begin() + static_cast<std::ptrdiff_t>(i * per),
                      cells.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
    return out;
}

namespace detail {

// Edge policy: circular on the Doppler axis, clamped replication on range.
inline std::size_t clamp_row(std::ptrdiff_t r, std::size_t rows)
{
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r, 0, static_cast<std::ptrdiff_t>(rows) - 1));
}

inline std::size_t wrap_col(std::ptrdiff_t c, std::size_t cols)
{
    const auto m = static_cast<std::ptrdiff_t>(cols);
    return static_cast<std::size_t>(((c % m) + m) % m);
}

inline void check_fits(const RMatrix& s, const CfarConfig& cfg)
{
    require(2 * cfg.reference_range + 1 <= s.rows() && 2 * cfg.reference_doppler + 1 <= s.cols(),
            "CFAR window exceeds the image");
}

} // namespace detail

/// 2D correlation of the image with a binary kernel given by its offsets:
/// out[r, c] = sum_{o in mask} S[r + o.dr, c + o.dd].
inline RMatrix mask_sum(const RMatrix& s, std::span<const Offset> mask)
{
    const std::size_t rows = s.rows(), cols = s.cols();
    RMatrix out(rows, cols, 0.0);
    std::vector<std::size_t> col_map(cols);
    for (const auto& o : mask) {
        for (std::size_t c = 0; c < cols; ++c)
            col_map[c] = detail::wrap_col(static_cast<std::ptrdiff_t>(c) + o.dd, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto src = s.row(detail::clamp_row(static_cast<std::ptrdiff_t>(r) + o.dr, rows));
            auto dst = out.row(r);
            for (std::size_t c = 0; c < cols; ++c)
                dst[c] += src[col_map[c]];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Peak extraction
// ---------------------------------------------------------------------------

/// Keep masked bins that dominate their four axial neighbors; ties go to the
/// lexicographically smallest (row, col). Range neighbors stop at the image
/// edge, Doppler neighbors wrap. Separable window responses have a single
/// axial maximum per target, and diagonal bins are left out so that two
/// targets one bin apart in both range and Doppler both survive.
inline DetectionList extract_peaks(const Matrix<std::uint8_t>& mask, const Periodogram& s)
{
    require(mask.rows() == s.rows() && mask.cols() == s.cols(), "extract_peaks: mask and image differ in shape");
    DetectionList out;
    const std::size_t rows = s.rows(), cols = s.cols();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (!mask(r, c))
                continue;
            const double v = s.power(r, c);
            bool peak = true;
            for (int dr = -1; dr <= 1 && peak; ++dr) {
                const auto rr = static_cast<std::ptrdiff_t>(r) + dr;
                if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(rows))
                    continue;
                for (int dd = -1; dd <= 1; ++dd) {
                    if (dr != 0 && dd != 0)
                        continue;
                    const std::size_t cc = detail::wrap_col(static_cast<std::ptrdiff_t>(c) + dd, cols);
                    const auto nr = static_cast<std::size_t>(rr);
                    if (nr == r && cc == c)
                        continue;
                    const double u = s.power(nr, cc);
                    if (u > v || (u == v && std::pair(nr, cc) < std::pair(r, c))) {
                        peak = false;
                        break;
                    }
                }
            }
            if (peak)
                out.push_back({r, c, v, s.axis.range_of(static_cast<double>(r)),
                               s.axis.velocity_of(static_cast<double>(c))});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Detectors
// ---------------------------------------------------------------------------

/// Per-cell threshold and the resulting exceedance mask, before peak
/// extraction.
struct CfarMap {
    RMatrix threshold;
    Matrix<std::uint8_t> mask;

    std::size_t exceedances() const
    {
        return static_cast<std::size_t>(std::count(mask.data().begin(), mask.data().end(), std::uint8_t{1}));
    }
};

inline Matrix<std::uint8_t> exceed(const RMatrix& s, const RMatrix& threshold)
{
    Matrix<std::uint8_t> m(s.rows(), s.cols(), 0);
    for (std::size_t i = 0; i < s.size(); ++i)
        m.data()[i] = s.data()[i] > threshold.data()[i] ? 1 : 0;
    return m;
}

/// Fixed threshold noise_power ln(1/p_fa) over the whole image.
inline CfarMap global_map(const Periodogram& s, double p_fa, double noise_power)
{
    require(noise_power > 0.0, "detect_global: noise power must be positive");
    require(p_fa > 0.0 && p_fa < 1.0, "detect_global: p_fa must lie in (0, 1)");
    CfarMap m;
    m.threshold = RMatrix(s.rows(), s.cols(), noise_power * std::log(1.0 / p_fa));
    m.mask = exceed(s.power, m.threshold);
    return m;
}

inline DetectionList detect_global(const Periodogram& s, double p_fa, double noise_power)
{
    return extract_peaks(global_map(s, p_fa, noise_power).mask, s);
}

/// Cell averaging: one pass of the reference mask gives sigma_N^2 for every
/// cell, threshold = threshold_factor(R) * sigma_N^2.
inline CfarMap ca_map(const Periodogram& s, const CfarConfig& cfg)
{
    cfg.validate();
    detail::check_fits(s.power, cfg);
    const auto offsets = reference_offsets(cfg);
    const auto r = static_cast<double>(offsets.size());
    CfarMap m;
    m.threshold = mask_sum(s.power, offsets);
    const double scale = threshold_factor(r, cfg.p_fa) / r;
    for (auto& v : m.threshold.data())
        v *= scale;
    m.mask = exceed(s.power, m.threshold);
    return m;
}

inline DetectionList detect_ca(const Periodogram& s, const CfarConfig& cfg)
{
    return extract_peaks(ca_map(s, cfg).mask, s);
}

namespace detail {

// Trimmed mean of v after dropping the `weak` smallest and `strong` largest.
inline double trimmed_mean(std::span<double> v, std::size_t weak, std::size_t strong)
{
    auto first = v.begin() + static_cast<std::ptrdiff_t>(weak);
    auto last = v.end() - static_cast<std::ptrdiff_t>(strong);
    if (weak > 0)
        std::nth_element(v.begin(), first, v.end());
    if (strong > 0)
        std::nth_element(first, last, v.end());
    double acc = 0.0;
    for (auto it = first; it != last; ++it)
        acc += *it;
    return acc / static_cast<double>(last - first);
}

} // namespace detail

/// Censored cell averaging. With num_subwindows == 0 every reference cell is
/// ranked per CUT; otherwise K sub-window means are computed by K mask sums
/// and only those are ranked. Without censoring this is cell averaging.
inline CfarMap robust_map(const Periodogram& s, const CfarConfig& cfg)
{
    cfg.validate();
    detail::check_fits(s.power, cfg);
    if (cfg.censor_strongest == 0 && cfg.censor_weakest == 0 && cfg.num_subwindows == 0)
        return ca_map(s, cfg);

    const std::size_t rows = s.rows(), cols = s.cols();
    const std::size_t r_total = cfg.reference_cells();
    const std::size_t weak = cfg.censor_weakest, strong = cfg.censor_strongest;
    CfarMap m;
    m.threshold = RMatrix(rows, cols);

    if (cfg.num_subwindows == 0) {
        const auto offsets = reference_offsets(cfg);
        const std::size_t kept = r_total - weak - strong;
        // A single retained sample is an order statistic and gets its exact
        // scaling; trimmed means use the cell-averaging law with R_eff cells.
        const double factor = kept == 1 ? os_threshold_factor(r_total, weak + 1, cfg.p_fa)
                                        : threshold_factor(static_cast<double>(kept), cfg.p_fa);
        std::vector<double> samples(offsets.size());
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                for (std::size_t i = 0; i < offsets.size(); ++i) {
                    const auto& o = offsets[i];
                    samples[i] = s.power(detail::clamp_row(static_cast<std::ptrdiff_t>(r) + o.dr, rows),
                                         detail::wrap_col(static_cast<std::ptrdiff_t>(c) + o.dd, cols));
                }
                m.threshold(r, c) = factor * detail::trimmed_mean(samples, weak, strong);
            }
        }
    } else {
        const auto sectors = subwindow_offsets(cfg);
        const std::size_t k = sectors.size();
        const std::size_t per = r_total / k;
        std::vector<RMatrix> sums;
        sums.reserve(k);
        for (const auto& sec : sectors)
            sums.push_back(mask_sum(s.power, sec));
        const std::size_t kept = k - weak - strong;
        const double factor = threshold_factor(static_cast<double>(kept * per), cfg.p_fa);
        const double inv_per = 1.0 / static_cast<double>(per);
        std::vector<double> means(k);
        for (std::size_t i = 0; i < rows * cols; ++i) {
            for (std::size_t j = 0; j < k; ++j)
                means[j] = sums[j].data()[i] * inv_per;
            m.threshold.data()[i] = factor * detail::trimmed_mean(means, weak, strong);
        }
    }
    m.mask = exceed(s.power, m.threshold);
    return m;
}

inline DetectionList detect_robust(const Periodogram& s, const CfarConfig& cfg)
{
    return extract_peaks(robust_map(s, cfg).mask, s);
}

/// Noise level estimate from the image median of exponential cells.
inline double estimate_noise_power(const Periodogram& s) { return median_power(s) / std::log(2.0); }

// ---------------------------------------------------------------------------
// CSV: header row, then row,col,power,range_m,velocity_mps
// ---------------------------------------------------------------------------

inline constexpr std::string_view kDetectionCsvHeader = "row,col,power,range_m,velocity_mps";

inline void write_detections_csv(const DetectionList& dets, std::ostream& os)
{
    os << kDetectionCsvHeader << '\n';
    char buf[160];
    for (const auto& d : dets) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.9g,%.9g,%.9g\n", d.row, d.col, d.power, d.range_m, d.velocity_mps);
        os << buf;
    }
}

inline void write_detections_csv(const DetectionList& dets, const std::filesystem::path& path)
{
    std::ofstream os(path);
    require(os.good(), "cannot open '" + path.string() + "' for writing");
    write_detections_csv(dets, os);
    require(os.good(), "write to '" + path.string() + "' failed");
}

inline DetectionList read_detections_csv(std::istream& is, const std::string& name = "<stream>")
{
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), name + ": missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    require(line == kDetectionCsvHeader, name + ": expected header '" + std::string(kDetectionCsvHeader) + "'");
    DetectionList out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream ss(line);
        Detection d;
        char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
        ss >> d.row >> c1 >> d.col >> c2 >> d.power >> c3 >> d.range_m >> c4 >> d.velocity_mps;
        require(!ss.fail() && c1 == ',' && c2 == ',' && c3 == ',' && c4 == ',',
                name + ": malformed line " + std::to_string(lineno));
        out.push_back(d);
    }
    return out;
}

inline DetectionList read_detections_csv(const std::filesystem::path& path)
{
    std::ifstream is(path);
    require(is.good(), "cannot open '" + path.string() + "'");
    return read_detections_csv(is, path.string());
}

} // namespace isac
