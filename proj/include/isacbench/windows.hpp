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

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>
#include <string_view>

namespace isac {

enum class WindowKind { Rectangular, Hann, Chebyshev, Dpss };

struct WindowSpec {
    WindowKind kind = WindowKind::Rectangular;
    double attenuation_db = 80.0;     // Chebyshev sidelobe level
    double time_halfbandwidth = 2.5;  // DPSS NW
    std::size_t order = 0;            // DPSS taper index

    static WindowSpec rectangular() { return {}; }
    static WindowSpec hann() { return {WindowKind::Hann}; }
    static WindowSpec chebyshev(double attenuation_db) { return {WindowKind::Chebyshev, attenuation_db}; }
    static WindowSpec dpss(double nw, std::size_t order = 0) { return {WindowKind::Dpss, 80.0, nw, order}; }

    void validate() const
    {
        require(kind != WindowKind::Chebyshev || attenuation_db > 0.0, "WindowSpec: attenuation must be positive");
        require(kind != WindowKind::Dpss || time_halfbandwidth > 0.0, "WindowSpec: NW must be positive");
    }

    bool operator==(const WindowSpec&) const = default;
};

/// Short tag: rect, hann, chebyshev80, dpss2.5 or dpss2.5k1.
inline std::string to_string(const WindowSpec& w)
{
    char buf[64];
    switch (w.kind) {
    case WindowKind::Rectangular:
        return "rect";
    case WindowKind::Hann:
        return "hann";
    case WindowKind::Chebyshev:
        std::snprintf(buf, sizeof buf, "chebyshev%g", w.attenuation_db);
        return buf;
    case WindowKind::Dpss:
        if (w.order == 0)
            std::snprintf(buf, sizeof buf, "dpss%g", w.time_halfbandwidth);
        else
            std::snprintf(buf, sizeof buf, "dpss%gk%zu", w.time_halfbandwidth, w.order);
        return buf;
    }
    return "?";
}

inline WindowSpec window_from_string(std::string_view s)
{
    auto number = [&](std::string_view t) {
        std::string tmp(t);
        char* end = nullptr;
        const double v = std::strtod(tmp.c_str(), &end);
        require(end != tmp.c_str() && *end == '\0', "bad window parameter in '" + std::string(s) + "'");
        return v;
    };
    if (s == "rect" || s == "rectangular")
        return WindowSpec::rectangular();
    if (s == "hann")
        return WindowSpec::hann();
    if (s.starts_with("chebyshev"))
        return WindowSpec::chebyshev(s.size() > 9 ? number(s.substr(9)) : 80.0);
    if (s.starts_with("dpss")) {
        auto rest = s.substr(4);
        std::size_t order = 0;
        if (auto k = rest.find('k'); k != std::string_view::npos) {
            order = static_cast<std::size_t>(number(rest.substr(k + 1)));
            rest = rest.substr(0, k);
        }
        return WindowSpec::dpss(rest.empty() ? 2.5 : number(rest), order);
    }
    throw Error("unsupported window '" + std::string(s) + "'");
}

namespace detail {

// Dolph-Chebyshev taper from its sampled frequency response
// T_{L-1}(x0 cos(πk/L)), inverse-transformed and peak-normalized.
inline std::vector<double> chebyshev_window(std::size_t len, double attenuation_db)
{
    const double order = static_cast<double>(len) - 1.0;
    const double x0 = std::cosh(std::acosh(std::pow(10.0, attenuation_db / 20.0)) / order);
    std::vector<cd> p(len);
    const auto n = static_cast<double>(len);
    const bool odd = len % 2 == 1;
    for (std::size_t k = 0; k < len; ++k) {
        const double x = x0 * std::cos(kPi * static_cast<double>(k) / n);
        double v;
        if (x > 1.0)
            v = std::cosh(order * std::acosh(x));
        else if (x < -1.0)
            v = (odd ? 1.0 : -1.0) * std::cosh(order * std::acosh(-x));
        else
            v = std::cos(order * std::acos(x));
        p[k] = odd ? cd{v, 0.0} : v * std::polar(1.0, kPi / n * static_cast<double>(k));
    }
    fft::forward(p);
    std::vector<double> w(len);
    if (odd) {
        const std::size_t h = (len + 1) / 2;
        for (std::size_t i = 0; i < h; ++i) {
            w[h - 1 + i] = p[i].real();
            w[h - 1 - i] = p[i].real();
        }
    } else {
        const std::size_t h = len / 2 + 1;
        // w = [p[h-1..1], p[1..h-1]]
        for (std::size_t i = 1; i < h; ++i) {
            w[h - 1 - i] = p[i].real();
            w[h - 2 + i] = p[i].real();
        }
    }
    const double peak = *std::max_element(w.begin(), w.end());
    for (auto& v : w)
        v /= peak;
    return w;
}

// Number of eigenvalues of the symmetric tridiagonal (d, e) below x.
inline std::size_t sturm_count(std::span<const double> d, std::span<const double> e, double x)
{
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
        q = d[i] - x - (i == 0 ? 0.0 : off / q);
        if (q == 0.0)
            q = -1e-300;
        if (q < 0.0)
            ++count;
    }
    return count;
}

// Solve (T - shift I) y = b for tridiagonal T by Gaussian elimination with
// partial pivoting (the dgtsv scheme). Zero pivots are nudged, as inverse
// iteration deliberately works with a nearly singular system.
inline std::vector<double> tridiagonal_solve(std::span<const double> diag, std::span<const double> off, double shift,
                                             std::vector<double> b)
{
    const std::size_t n = diag.size();
    constexpr double tiny = 1e-300;
    std::vector<double> d(n), du(off.begin(), off.end()), dl(off.begin(), off.end());
    for (std::size_t i = 0; i < n; ++i)
        d[i] = diag[i] - shift;
    if (n == 1) {
        b[0] /= d[0] == 0.0 ? tiny : d[0];
        return b;
    }
    // After elimination dl[i] holds the second superdiagonal of row i.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const bool last = i + 2 == n;
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0)
                d[i] = tiny;
            const double f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            const double f = d[i] / dl[i];
            d[i] = dl[i];
            const double t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            if (!last) {
                dl[i] = du[i + 1];
                du[i + 1] = -f * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = t;
            const double tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - f * b[i + 1];
        }
    }
    if (d[n - 1] == 0.0)
        d[n - 1] = tiny;
    b[n - 1] /= d[n - 1];
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;)
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    return b;
}

} // namespace detail

/// The standard Slepian tridiagonal matrix for length L and half-bandwidth W =
/// NW / L: diagonal ((L-1-2i)/2)^2 cos(2πW), off-diagonal i(L-i)/2.
inline std::pair<std::vector<double>, std::vector<double>> slepian_tridiagonal(std::size_t len, double nw)
{
    const double w = nw / static_cast<double>(len);
    const double c = std::cos(kTwoPi * w);
    std::vector<double> d(len), e(len > 0 ? len - 1 : 0);
    for (std::size_t i = 0; i < len; ++i) {
        const double h = (static_cast<double>(len) - 1.0 - 2.0 * static_cast<double>(i)) / 2.0;
        d[i] = h * h * c;
        if (i + 1 < len)
            e[i] = static_cast<double>(i + 1) * static_cast<double>(len - i - 1) / 2.0;
    }
    return {d, e};
}

/// Unit-norm DPSS taper of the given order (0 = most concentrated), via
/// bisection for the eigenvalue and inverse iteration for the eigenvector.
/// Sign convention: even orders have positive sum, odd orders are positive at
/// the left end (negative first moment about the center).
inline std::vector<double> dpss_unit(std::size_t len, double nw, std::size_t order)
{
    require(len >= 2, "dpss: length must be >= 2");
    require(nw > 0.0, "dpss: NW must be positive");
    require(order < len, "dpss: order must be below the length");
    const auto [d, e] = slepian_tridiagonal(len, nw);

    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < len ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    // order-th largest == (len - 1 - order)-th smallest
    const std::size_t target = len - 1 - order;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(std::abs(lo), std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::sturm_count(d, e, mid) > target)
            hi = mid;
        else
            lo = mid;
    }
    const double lambda = 0.5 * (lo + hi);

    std::vector<double> v(len);
    Rng start(0x51E9ULL + order);
    for (auto& x : v)
        x = start.uniform(-1.0, 1.0);
    for (int it = 0; it < 4; ++it) {
        v = detail::tridiagonal_solve(d, e, lambda, std::move(v));
        const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        for (auto& x : v)
            x /= norm;
    }
    double orient = 0.0;
    const double center = (static_cast<double>(len) - 1.0) / 2.0;
    for (std::size_t i = 0; i < len; ++i)
        orient += order % 2 == 0 ? v[i] : (center - static_cast<double>(i)) * v[i];
    if (orient < 0.0)
        for (auto& x : v)
            x = -x;
    return v;
}

/// Symmetric taper of the given length. Rectangular, Hann and Chebyshev peak
/// at 1; DPSS tapers are peak-normalized in magnitude.
inline std::vector<double> make_window(const WindowSpec& spec, std::size_t len)
{
    spec.validate();
    require(len >= 2, "make_window: length must be >= 2");
    std::vector<double> w(len, 1.0);
    switch (spec.kind) {
    case WindowKind::Rectangular:
        break;
    case WindowKind::Hann:
        for (std::size_t i = 0; i < len; ++i)
            w[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(len - 1)));
        break;
    case WindowKind::Chebyshev:
        w = detail::chebyshev_window(len, spec.attenuation_db);
        break;
    case WindowKind::Dpss: {
        w = dpss_unit(len, spec.time_halfbandwidth, spec.order);
        double peak = 0.0;
        for (double x : w)
            peak = std::max(peak, std::abs(x));
        for (auto& x : w)
            x /= peak;
        break;
    }
    }
    return w;
}

inline double sum_of_squares(std::span<const double> w)
{
    return std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
}

} // namespace isac
