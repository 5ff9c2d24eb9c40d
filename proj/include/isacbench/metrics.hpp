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

#include "cfar.hpp"
#include "channel.hpp"
#include "common.hpp"
#include "radio_frame.hpp"
#include "windows.hpp"

#include <numeric>

namespace isac {

/// Main-lobe half-widths, in resolution cells, inside which a detection is
/// attributed to a target.
inline double gate_factor(WindowKind kind)
{
    switch (kind) {
    case WindowKind::Rectangular:
        return 1.0;
    case WindowKind::Hann:
        return 2.0;
    case WindowKind::Chebyshev:
        return 2.5;
    case WindowKind::Dpss:
        return 2.0;
    }
    throw Error("gate_factor: unknown window kind");
}

struct AssociationGate {
    double range_halfwidth_m = 1.0;
    double velocity_halfwidth_mps = 1.0;
    // Resolution cells used for the nearest-target distance.
    double range_unit_m = 1.0;
    double velocity_unit_mps = 1.0;

    static AssociationGate for_window(const RadioConfig& radio, WindowKind kind)
    {
        return scaled(radio, gate_factor(kind));
    }

    static AssociationGate scaled(const RadioConfig& radio, double kappa)
    {
        require(kappa > 0.0, "AssociationGate: factor must be positive");
        const double dr = radio.range_resolution_m();
        const double dv = radio.velocity_resolution_mps();
        return {kappa * dr, kappa * dv, dr, dv};
    }

    void validate() const
    {
        require(range_halfwidth_m > 0.0 && velocity_halfwidth_mps > 0.0, "AssociationGate: half-widths must be positive");
        require(range_unit_m > 0.0 && velocity_unit_mps > 0.0, "AssociationGate: units must be positive");
    }

    bool operator==(const AssociationGate&) const = default;
};

struct TrialScore {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    double p_md() const { return tp + fn == 0 ? 0.0 : static_cast<double>(fn) / static_cast<double>(tp + fn); }
    double f1() const
    {
        const std::size_t den = 2 * tp + fp + fn;
        return den == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(den);
    }

    bool operator==(const TrialScore&) const = default;
};

/// Gate each detection to its nearest target (normalized distance, ties to the
/// lower target index). Targets with at least one gated detection are hits;
/// further in-gate detections are dropped. Detections outside every gate are
/// false alarms.
inline TrialScore associate(std::span<const Detection> dets, std::span<const Target> targets,
                            const AssociationGate& gate)
{
    gate.validate();
    std::vector<bool> hit(targets.size(), false);
    TrialScore s;
    for (const auto& d : dets) {
        std::size_t best = targets.size();
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < targets.size(); ++p) {
            const double er = d.range_m - targets[p].range_m;
            const double ev = d.velocity_mps - targets[p].velocity_mps;
            if (std::abs(er) > gate.range_halfwidth_m || std::abs(ev) > gate.velocity_halfwidth_mps)
                continue;
            const double dist = std::hypot(er / gate.range_unit_m, ev / gate.velocity_unit_mps);
            if (dist < best_dist) {
                best_dist = dist;
                best = p;
            }
        }
        if (best == targets.size())
            ++s.fp;
        else
            hit[best] = true;
    }
    s.tp = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true));
    s.fn = targets.size() - s.tp;
    return s;
}

/// Mean with the half-width of a 95 % normal-approximation interval.
struct Estimate {
    double value = 0.0;
    double ci = 0.0;

    bool operator==(const Estimate&) const = default;
};

inline Estimate mean_ci(std::span<const double> v)
{
    require(!v.empty(), "mean_ci: empty sample");
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return {mean, 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

enum class F1Averaging { Micro, Macro };

struct Aggregate {
    Estimate p_md;
    Estimate fa;
    Estimate f1; // value per the averaging mode; ci from the per-trial spread
    std::size_t trials = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    bool operator==(const Aggregate&) const = default;
};

inline Aggregate score_curve(std::span<const TrialScore> scores, F1Averaging mode = F1Averaging::Micro)
{
    require(!scores.empty(), "score_curve: no trials");
    std::vector<double> pmd, fa, f1;
    pmd.reserve(scores.size());
    fa.reserve(scores.size());
    f1.reserve(scores.size());
    Aggregate a;
    a.trials = scores.size();
    for (const auto& s : scores) {
        pmd.push_back(s.p_md());
        fa.push_back(static_cast<double>(s.fp));
        f1.push_back(s.f1());
        a.tp += s.tp;
        a.fp += s.fp;
        a.fn += s.fn;
    }
    a.p_md = mean_ci(pmd);
    a.fa = mean_ci(fa);
    a.f1 = mean_ci(f1);
    if (mode == F1Averaging::Micro)
        a.f1.value = TrialScore{a.tp, a.fp, a.fn}.f1();
    return a;
}

} // namespace isac
