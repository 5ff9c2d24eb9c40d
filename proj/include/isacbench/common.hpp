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

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using cd = std::complex<double>;

inline constexpr double kSpeedOfLight = 2.99792458e8; // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised for violated preconditions and malformed inputs.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        throw Error(what);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Dense row-major matrix. Rows and columns follow the radar convention used
/// throughout: rows are subcarriers / range bins, columns are OFDM symbols /
/// Doppler bins.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<T>& data() & { return data_; }
    const std::vector<T>& data() const& { return data_; }
    // Rvalue access moves the storage out, so range-for over a temporary's
    // data() stays valid.
    std::vector<T> data() && { return std::move(data_); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using CMatrix = Matrix<cd>;
using RMatrix = Matrix<double>;

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: output i is a bijective mix of (key, i), so a
/// stream is fully identified by its key and streams can be split by hashing
/// an index tuple into a new key. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key = 0) : key_(key) {}

    /// Independent stream for the tuple (key, a, b).
    static Rng keyed(std::uint64_t key, std::uint64_t a, std::uint64_t b = 0)
    {
        std::uint64_t k = splitmix64(key ^ 0x6A09E667F3BCC909ULL);
        k = splitmix64(k ^ splitmix64(a + 0x3C6EF372FE94F82BULL));
        k = splitmix64(k ^ splitmix64(b + 0xA54FF53A5F1D36F1ULL));
        return Rng(k);
    }

    Rng split(std::uint64_t stream) const { return keyed(key_, stream, counter_); }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        ++counter_;
        return splitmix64(key_ + counter_ * 0xD1B54A32D192ED03ULL);
    }

    std::uint64_t key() const { return key_; }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] (inclusive), rejection-free for small spans.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        // Lemire's multiply-shift; bias below 2^-64 * span is irrelevant here.
        __extension__ using u128 = unsigned __int128;
        const auto x = static_cast<u128>((*this)()) * span;
        return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(x >> 64));
    }

    /// Standard normal via Box-Muller; the second deviate is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    /// Circular complex Gaussian with E|z|^2 = variance.
    cd complex_normal(double variance)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline double mean_power(std::span<const cd> x)
{
    if (x.empty())
        return 0.0;
    double acc = 0.0;
    for (const auto& v : x)
        acc += std::norm(v);
    return acc / static_cast<double>(x.size());
}

} // namespace isac
