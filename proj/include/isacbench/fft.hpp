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

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace isac::fft {

enum class Direction : int { Forward = FFTW_FORWARD, Backward = FFTW_BACKWARD };

namespace detail {

// FFTW planning is not thread-safe, execution on distinct arrays is. Plans are
// created once per (length, direction), in-place and unaligned so that they can
// be reused on any buffer through the new-array execute interface.
class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n, Direction dir)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, static_cast<int>(dir));
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        std::vector<cd> scratch(static_cast<std::size_t>(n));
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_1d(n, p, p, static_cast<int>(dir), FFTW_ESTIMATE | FFTW_UNALIGNED);
        require(plan != nullptr, "FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

} // namespace detail

/// Unnormalized in-place DFT. Forward uses e^{-j2πkn/N}, Backward e^{+j2πkn/N}.
inline void transform(std::span<cd> x, Direction dir)
{
    if (x.size() <= 1)
        return;
    fftw_plan plan = detail::PlanCache::instance().get(static_cast<int>(x.size()), dir);
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(plan, p, p);
}

inline void forward(std::span<cd> x) { transform(x, Direction::Forward); }
inline void backward(std::span<cd> x) { transform(x, Direction::Backward); }

/// Transform every column of a row-major matrix.
inline void transform_columns(CMatrix& m, Direction dir)
{
    std::vector<cd> buf(m.rows());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        for (std::size_t r = 0; r < m.rows(); ++r)
            buf[r] = m(r, c);
        transform(buf, dir);
        for (std::size_t r = 0; r < m.rows(); ++r)
            m(r, c) = buf[r];
    }
}

inline void transform_rows(CMatrix& m, Direction dir)
{
    for (std::size_t r = 0; r < m.rows(); ++r)
        transform(m.row(r), dir);
}

inline std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

} // namespace isac::fft
