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
#include "csi.hpp"
#include "metrics.hpp"
#include "periodogram.hpp"
#include "radio_frame.hpp"
#include "windows.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace isac {

enum class ScenarioKind { NoiseLimited, ResolutionLimited };
enum class Pipeline { Linear, Full };
enum class DetectorKind { Global, Ca, Cs, Os };
// How the global detector learns the noise level: analytic from the synthetic
// noise variance (linear path only) or estimated from the image median.
enum class NoiseEstimate { Auto, Known, Median };

inline std::string to_string(ScenarioKind k) { return k == ScenarioKind::NoiseLimited ? "noise-limited" : "resolution-limited"; }
inline std::string to_string(Pipeline p) { return p == Pipeline::Linear ? "linear" : "full"; }

inline std::string to_string(DetectorKind k)
{
    switch (k) {
    case DetectorKind::Global:
        return "global";
    case DetectorKind::Ca:
        return "ca";
    case DetectorKind::Cs:
        return "cs";
    case DetectorKind::Os:
        return "os";
    }
    return "?";
}

inline std::string to_string(NoiseEstimate n)
{
    switch (n) {
    case NoiseEstimate::Auto:
        return "auto";
    case NoiseEstimate::Known:
        return "known";
    case NoiseEstimate::Median:
        return "median";
    }
    return "?";
}

inline ScenarioKind scenario_kind_from_string(std::string_view s)
{
    if (s == "noise-limited")
        return ScenarioKind::NoiseLimited;
    if (s == "resolution-limited")
        return ScenarioKind::ResolutionLimited;
    throw Error("unknown scenario kind '" + std::string(s) + "'");
}

inline Pipeline pipeline_from_string(std::string_view s)
{
    if (s == "linear")
        return Pipeline::Linear;
    if (s == "full")
        return Pipeline::Full;
    throw Error("unknown pipeline '" + std::string(s) + "'");
}

inline DetectorKind detector_kind_from_string(std::string_view s)
{
    for (auto k : {DetectorKind::Global, DetectorKind::Ca, DetectorKind::Cs, DetectorKind::Os})
        if (s == to_string(k))
            return k;
    throw Error("unknown detector '" + std::string(s) + "'");
}

inline NoiseEstimate noise_estimate_from_string(std::string_view s)
{
    for (auto k : {NoiseEstimate::Auto, NoiseEstimate::Known, NoiseEstimate::Median})
        if (s == to_string(k))
            return k;
    throw Error("unknown noise estimate '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Detectors and impairment profiles
// ---------------------------------------------------------------------------

struct DetectorSpec {
    DetectorKind kind = DetectorKind::Ca;
    CfarConfig cfar;
    std::string label; // defaults to the kind name

    std::string name() const { return label.empty() ? to_string(kind) : label; }

    /// Library defaults: CS censors the strongest of 8 sub-window means, OS
    /// keeps their median.
    static DetectorSpec make(DetectorKind kind, CfarConfig base = {})
    {
        DetectorSpec d{kind, base, {}};
        d.cfar.censor_strongest = 0;
        d.cfar.censor_weakest = 0;
        if (kind == DetectorKind::Ca)
            d.cfar.num_subwindows = 0;
        else if (kind == DetectorKind::Cs)
            d.cfar.censor_strongest = 1;
        else if (kind == DetectorKind::Os)
            d.cfar = d.cfar.with_median();
        return d;
    }

    void validate() const
    {
        cfar.validate();
        if (kind == DetectorKind::Ca)
            require(cfar.censor_strongest == 0 && cfar.censor_weakest == 0, "ca detector does not censor");
    }

    bool operator==(const DetectorSpec&) const = default;
};

inline DetectionList run_detector(const DetectorSpec& d, const Periodogram& s, double noise_power)
{
    switch (d.kind) {
    case DetectorKind::Global:
        return detect_global(s, d.cfar.p_fa, noise_power);
    case DetectorKind::Ca:
        return d.cfar.num_subwindows == 0 ? detect_ca(s, d.cfar) : detect_robust(s, d.cfar);
    case DetectorKind::Cs:
    case DetectorKind::Os:
        return detect_robust(s, d.cfar);
    }
    throw Error("run_detector: unknown detector");
}

struct ImpairmentProfile {
    std::string name = "clean";
    bool tx_pa = false;
    bool rx_pa = false;
    double tx_pa_ibo_db = 0.0;
    double rx_pa_ibo_db = 0.0;
    int quantizer_bits = 64; // 64: no quantization
    Modulation modulation = Modulation::Qpsk;

    static ImpairmentProfile clean() { return {}; }
    static ImpairmentProfile impaired() { return {"impaired", true, true, 0.0, 0.0, 1, Modulation::Qam256}; }

    bool is_clean() const { return !tx_pa && !rx_pa && quantizer_bits >= 64; }

    FrontendConfig frontend(double rolloff, std::size_t span) const
    {
        FrontendConfig fe;
        fe.rolloff = rolloff;
        fe.span_symbols = span;
        fe.tx_pa = tx_pa;
        fe.rx_pa = rx_pa;
        fe.tx_pa_ibo_db = tx_pa_ibo_db;
        fe.rx_pa_ibo_db = rx_pa_ibo_db;
        fe.quantizer = {quantizer_bits, quantizer_bits < 64};
        return fe;
    }

    bool operator==(const ImpairmentProfile&) const = default;
};

struct WindowEntry {
    WindowSpec spec;
    std::optional<double> gate_factor; // overrides gate_factor(spec.kind)

    double kappa() const { return gate_factor.value_or(isac::gate_factor(spec.kind)); }

    bool operator==(const WindowEntry&) const = default;
};

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

inline std::vector<double> linear_grid(double start, double stop, double step)
{
    require(step > 0.0 && stop >= start, "linear_grid: bad bounds");
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i)
        g.push_back(start + static_cast<double>(i) * step);
    return g;
}

struct ScenarioConfig {
    std::string name = "scenario";
    ScenarioKind kind = ScenarioKind::NoiseLimited;
    Pipeline pipeline = Pipeline::Linear;
    RadioConfig radio = RadioConfig::desk();
    double rolloff = 0.25;
    std::size_t span_symbols = 16;
    std::vector<double> snr_grid_db = linear_grid(-40.0, 40.0, 5.0);
    std::vector<double> spacing_grid = linear_grid(0.0, 3.0, 0.25);
    double resolution_snr_db = 20.0;
    std::size_t trials_per_point = 1000;
    TargetSamplingSpec targets = TargetSamplingSpec::scaled_to(RadioConfig::desk());
    std::size_t placement_budget = 1000;
    std::vector<ImpairmentProfile> profiles{ImpairmentProfile::clean()};
    std::vector<WindowEntry> windows{{WindowSpec::rectangular(), {}}, {WindowSpec::chebyshev(80.0), {}}};
    std::vector<DetectorSpec> detectors{DetectorSpec::make(DetectorKind::Global), DetectorSpec::make(DetectorKind::Ca),
                                        DetectorSpec::make(DetectorKind::Cs), DetectorSpec::make(DetectorKind::Os)};
    NoiseEstimate noise_estimate = NoiseEstimate::Auto;
    F1Averaging f1_averaging = F1Averaging::Micro;
    std::uint64_t base_seed = 1;
    std::size_t workers = 1;

    static ScenarioConfig noise_limited()
    {
        return {};
    }

    static ScenarioConfig resolution_limited()
    {
        ScenarioConfig c;
        c.name = "resolution";
        c.kind = ScenarioKind::ResolutionLimited;
        return c;
    }

    const std::vector<double>& grid() const { return kind == ScenarioKind::NoiseLimited ? snr_grid_db : spacing_grid; }

    void validate() const
    {
        radio.validate();
        targets.validate();
        require(!grid().empty(), "ScenarioConfig: empty grid");
        require(std::is_sorted(grid().begin(), grid().end()), "ScenarioConfig: grid must be ordered");
        require(trials_per_point >= 1, "ScenarioConfig: trials_per_point must be >= 1");
        require(!profiles.empty() && !windows.empty() && !detectors.empty(),
                "ScenarioConfig: need at least one profile, window and detector");
        std::set<std::string> names;
        for (const auto& p : profiles) {
            require(names.insert(p.name).second, "ScenarioConfig: duplicate profile '" + p.name + "'");
            require(pipeline == Pipeline::Full || p.is_clean(),
                    "ScenarioConfig: profile '" + p.name + "' has impairments and needs the full pipeline");
        }
        names.clear();
        for (const auto& w : windows) {
            w.spec.validate();
            require(w.kappa() > 0.0, "ScenarioConfig: gate factor must be positive");
            require(names.insert(to_string(w.spec)).second, "ScenarioConfig: duplicate window");
        }
        names.clear();
        for (const auto& d : detectors) {
            d.validate();
            require(names.insert(d.name()).second, "ScenarioConfig: duplicate detector '" + d.name() + "'");
        }
        if (kind == ScenarioKind::ResolutionLimited)
            for (double d : spacing_grid)
                require(d >= 0.0, "ScenarioConfig: spacing must be non-negative");
        require(workers >= 1, "ScenarioConfig: workers must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// JSON (de)serialization. Missing keys keep their defaults, unknown keys are
// rejected so that typos do not silently fall back to defaults.
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        require(j.is_object(), where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out)
    {
        seen_.insert(key);
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                out = it->template get<T>();
            } catch (const json::exception& e) {
                throw Error(where_ + "." + key + ": " + e.what());
            }
        }
    }

    const json* find(const char* key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            require(seen_.contains(it.key()), where_ + ": unknown key '" + it.key() + "'");
    }

    const std::string& where() const { return where_; }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline std::vector<double> grid_from_json(const json& j, const std::string& where)
{
    if (j.is_array())
        return j.get<std::vector<double>>();
    ObjectReader r(j, where);
    double start = 0.0, stop = 0.0, step = 1.0;
    r.get("start", start);
    r.get("stop", stop);
    r.get("step", step);
    r.finish();
    return linear_grid(start, stop, step);
}

} // namespace detail

inline nlohmann::json to_json(const RadioConfig& r)
{
    return {{"carrier_freq_hz", r.carrier_freq_hz},   {"num_subcarriers", r.num_subcarriers},
            {"subcarrier_spacing_hz", r.subcarrier_spacing_hz}, {"num_symbols", r.num_symbols},
            {"cp_len_samples", r.cp_len_samples},     {"upsampling_factor", r.upsampling_factor},
            {"modulation", to_string(r.modulation)}};
}

inline RadioConfig radio_from_json(const nlohmann::json& j)
{
    detail::ObjectReader r(j, "radio");
    RadioConfig c;
    std::string preset = "desk";
    r.get("preset", preset);
    if (preset == "table2")
        c = RadioConfig::table2();
    else
        require(preset == "desk", "radio.preset: expected desk or table2");
    r.get("carrier_freq_hz", c.carrier_freq_hz);
    r.get("num_subcarriers", c.num_subcarriers);
    r.get("subcarrier_spacing_hz", c.subcarrier_spacing_hz);
    r.get("num_symbols", c.num_symbols);
    r.get("cp_len_samples", c.cp_len_samples);
    r.get("upsampling_factor", c.upsampling_factor);
    std::string mod = to_string(c.modulation);
    r.get("modulation", mod);
    c.modulation = modulation_from_string(mod);
    r.finish();
    return c;
}

inline nlohmann::json to_json(const TargetSamplingSpec& t)
{
    return {{"count_min", t.count_min},
            {"count_max", t.count_max},
            {"range_min_m", t.range_min_m},
            {"range_max_m", t.range_max_m},
            {"velocity_min_mps", t.velocity_min_mps},
            {"velocity_max_mps", t.velocity_max_mps},
            {"magnitude", t.magnitude == MagnitudeLaw::Rice ? "rice" : "unit"},
            {"rice_k", t.rice_k},
            {"rice_omega", t.rice_omega},
            {"min_range_spacing_m", t.min_range_spacing_m},
            {"min_velocity_spacing_mps", t.min_velocity_spacing_mps},
            {"enforce_min_spacing", t.enforce_min_spacing},
            {"retry_budget", t.retry_budget}};
}

/// "preset": "scaled" (the default) re-expresses the full-size box in cells of
/// `radio`; "table2" keeps the metric box unchanged.
inline TargetSamplingSpec targets_from_json(const nlohmann::json& j, const RadioConfig& radio)
{
    detail::ObjectReader r(j, "targets");
    std::string preset = "scaled";
    r.get("preset", preset);
    TargetSamplingSpec t;
    if (preset == "scaled")
        t = TargetSamplingSpec::scaled_to(radio);
    else
        require(preset == "table2", "targets.preset: expected scaled or table2");
    r.get("count_min", t.count_min);
    r.get("count_max", t.count_max);
    r.get("range_min_m", t.range_min_m);
    r.get("range_max_m", t.range_max_m);
    r.get("velocity_min_mps", t.velocity_min_mps);
    r.get("velocity_max_mps", t.velocity_max_mps);
    std::string mag = t.magnitude == MagnitudeLaw::Rice ? "rice" : "unit";
    r.get("magnitude", mag);
    require(mag == "rice" || mag == "unit", "targets.magnitude: expected rice or unit");
    t.magnitude = mag == "rice" ? MagnitudeLaw::Rice : MagnitudeLaw::Unit;
    r.get("rice_k", t.rice_k);
    r.get("rice_omega", t.rice_omega);
    r.get("min_range_spacing_m", t.min_range_spacing_m);
    r.get("min_velocity_spacing_mps", t.min_velocity_spacing_mps);
    r.get("enforce_min_spacing", t.enforce_min_spacing);
    r.get("retry_budget", t.retry_budget);
    r.finish();
    return t;
}

inline nlohmann::json to_json(const ImpairmentProfile& p)
{
    return {{"name", p.name},
            {"tx_pa", p.tx_pa},
            {"rx_pa", p.rx_pa},
            {"tx_pa_ibo_db", p.tx_pa_ibo_db},
            {"rx_pa_ibo_db", p.rx_pa_ibo_db},
            {"quantizer_bits", p.quantizer_bits},
            {"modulation", to_string(p.modulation)}};
}

/// Either "clean", "impaired", or an object; "pa" sets both PAs and "pa_ibo_db"
/// both back-offs.
inline ImpairmentProfile profile_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "clean")
            return ImpairmentProfile::clean();
        if (s == "impaired")
            return ImpairmentProfile::impaired();
        throw Error("profiles: unknown preset '" + s + "'");
    }
    detail::ObjectReader r(j, "profiles[]");
    ImpairmentProfile p;
    std::string preset = "clean";
    r.get("preset", preset);
    if (preset == "impaired")
        p = ImpairmentProfile::impaired();
    else
        require(preset == "clean", "profiles[].preset: expected clean or impaired");
    r.get("name", p.name);
    bool pa = false;
    if (r.find("pa")) {
        r.get("pa", pa);
        p.tx_pa = p.rx_pa = pa;
    }
    if (r.find("pa_ibo_db")) {
        double ibo = 0.0;
        r.get("pa_ibo_db", ibo);
        p.tx_pa_ibo_db = p.rx_pa_ibo_db = ibo;
    }
    r.get("tx_pa", p.tx_pa);
    r.get("rx_pa", p.rx_pa);
    r.get("tx_pa_ibo_db", p.tx_pa_ibo_db);
    r.get("rx_pa_ibo_db", p.rx_pa_ibo_db);
    r.get("quantizer_bits", p.quantizer_bits);
    std::string mod = to_string(p.modulation);
    r.get("modulation", mod);
    p.modulation = modulation_from_string(mod);
    r.finish();
    require(p.quantizer_bits >= 1 && p.quantizer_bits <= 64, "profiles[].quantizer_bits must lie in [1, 64]");
    return p;
}

inline nlohmann::json to_json(const WindowEntry& w)
{
    nlohmann::json j = {{"window", to_string(w.spec)}, {"gate_factor", w.kappa()}};
    return j;
}

inline WindowEntry window_entry_from_json(const nlohmann::json& j)
{
    if (j.is_string())
        return {window_from_string(j.get<std::string>()), {}};
    detail::ObjectReader r(j, "windows[]");
    std::string name = "rect";
    r.get("window", name);
    WindowEntry w{window_from_string(name), {}};
    if (r.find("gate_factor")) {
        double g = 0.0;
        r.get("gate_factor", g);
        w.gate_factor = g;
    }
    r.finish();
    return w;
}

inline nlohmann::json to_json(const CfarConfig& c)
{
    return {{"p_fa", c.p_fa},
            {"guard", {c.guard_range, c.guard_doppler}},
            {"reference", {c.reference_range, c.reference_doppler}},
            {"censor_strongest", c.censor_strongest},
            {"censor_weakest", c.censor_weakest},
            {"subwindows", c.num_subwindows}};
}

namespace detail {

inline void read_cfar_fields(ObjectReader& r, CfarConfig& c)
{
    r.get("p_fa", c.p_fa);
    std::array<std::size_t, 2> pair{};
    if (r.find("guard")) {
        pair = {c.guard_range, c.guard_doppler};
        r.get("guard", pair);
        c.guard_range = pair[0];
        c.guard_doppler = pair[1];
    }
    if (r.find("reference")) {
        pair = {c.reference_range, c.reference_doppler};
        r.get("reference", pair);
        c.reference_range = pair[0];
        c.reference_doppler = pair[1];
    }
    r.get("subwindows", c.num_subwindows);
}

} // namespace detail

inline nlohmann::json to_json(const DetectorSpec& d)
{
    nlohmann::json j = to_json(d.cfar);
    j["kind"] = to_string(d.kind);
    j["label"] = d.name();
    return j;
}

/// A detector is a kind name or an object with "kind" plus CFAR overrides.
/// `shared` carries the scenario-wide CFAR geometry. For OS an "os_rank" picks
/// the order statistic (1-based); the median is the default.
inline DetectorSpec detector_from_json(const nlohmann::json& j, const CfarConfig& shared)
{
    if (j.is_string())
        return DetectorSpec::make(detector_kind_from_string(j.get<std::string>()), shared);
    detail::ObjectReader r(j, "detectors[]");
    std::string kind;
    r.get("kind", kind);
    require(!kind.empty(), "detectors[]: missing kind");
    CfarConfig base = shared;
    detail::read_cfar_fields(r, base);
    DetectorSpec d = DetectorSpec::make(detector_kind_from_string(kind), base);
    r.get("label", d.label);
    r.get("censor_strongest", d.cfar.censor_strongest);
    r.get("censor_weakest", d.cfar.censor_weakest);
    if (const auto* rank = r.find("os_rank")) {
        require(d.kind == DetectorKind::Os, "detectors[]: os_rank only applies to os");
        d.cfar = d.cfar.with_os_rank(rank->get<std::size_t>());
    }
    r.finish();
    if (d.label == to_string(d.kind))
        d.label.clear();
    return d;
}

inline nlohmann::json to_json(const ScenarioConfig& c)
{
    nlohmann::json j;
    j["name"] = c.name;
    j["kind"] = to_string(c.kind);
    j["pipeline"] = to_string(c.pipeline);
    j["radio"] = to_json(c.radio);
    j["frontend"] = {{"rolloff", c.rolloff}, {"span_symbols", c.span_symbols}};
    j["snr_grid_db"] = c.snr_grid_db;
    j["spacing_grid"] = c.spacing_grid;
    j["resolution_snr_db"] = c.resolution_snr_db;
    j["trials_per_point"] = c.trials_per_point;
    j["targets"] = to_json(c.targets);
    j["placement_budget"] = c.placement_budget;
    j["profiles"] = nlohmann::json::array();
    for (const auto& p : c.profiles)
        j["profiles"].push_back(to_json(p));
    j["windows"] = nlohmann::json::array();
    for (const auto& w : c.windows)
        j["windows"].push_back(to_json(w));
    j["detectors"] = nlohmann::json::array();
    for (const auto& d : c.detectors)
        j["detectors"].push_back(to_json(d));
    j["noise_estimate"] = to_string(c.noise_estimate);
    j["f1_averaging"] = c.f1_averaging == F1Averaging::Micro ? "micro" : "macro";
    j["base_seed"] = c.base_seed;
    j["workers"] = c.workers;
    return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j)
{
    detail::ObjectReader r(j, "config");
    std::string kind = "noise-limited";
    r.get("kind", kind);
    ScenarioConfig c = scenario_kind_from_string(kind) == ScenarioKind::NoiseLimited ? ScenarioConfig::noise_limited()
                                                                                      : ScenarioConfig::resolution_limited();
    r.get("name", c.name);
    std::string pipeline = to_string(c.pipeline);
    r.get("pipeline", pipeline);
    c.pipeline = pipeline_from_string(pipeline);
    if (const auto* radio = r.find("radio"))
        c.radio = radio_from_json(*radio);
    if (const auto* fe = r.find("frontend")) {
        detail::ObjectReader f(*fe, "frontend");
        f.get("rolloff", c.rolloff);
        f.get("span_symbols", c.span_symbols);
        f.finish();
    }
    if (const auto* g = r.find("snr_grid_db"))
        c.snr_grid_db = detail::grid_from_json(*g, "snr_grid_db");
    if (const auto* g = r.find("spacing_grid"))
        c.spacing_grid = detail::grid_from_json(*g, "spacing_grid");
    r.get("resolution_snr_db", c.resolution_snr_db);
    r.get("trials_per_point", c.trials_per_point);
    c.targets = TargetSamplingSpec::scaled_to(c.radio);
    if (const auto* t = r.find("targets"))
        c.targets = targets_from_json(*t, c.radio);
    r.get("placement_budget", c.placement_budget);
    if (const auto* p = r.find("profiles")) {
        require(p->is_array(), "profiles: expected an array");
        c.profiles.clear();
        for (const auto& e : *p)
            c.profiles.push_back(profile_from_json(e));
    }
    if (const auto* w = r.find("windows")) {
        require(w->is_array(), "windows: expected an array");
        c.windows.clear();
        for (const auto& e : *w)
            c.windows.push_back(window_entry_from_json(e));
    }
    CfarConfig shared;
    if (const auto* cf = r.find("cfar")) {
        detail::ObjectReader cr(*cf, "cfar");
        detail::read_cfar_fields(cr, shared);
        cr.finish();
    }
    if (const auto* list = r.find("detectors")) {
        require(list->is_array(), "detectors: expected an array");
        c.detectors.clear();
        for (const auto& e : *list)
            c.detectors.push_back(detector_from_json(e, shared));
    } else {
        for (auto& d : c.detectors)
            d = DetectorSpec::make(d.kind, shared);
    }
    std::string noise = to_string(c.noise_estimate);
    r.get("noise_estimate", noise);
    c.noise_estimate = noise_estimate_from_string(noise);
    std::string f1 = "micro";
    r.get("f1_averaging", f1);
    require(f1 == "micro" || f1 == "macro", "f1_averaging: expected micro or macro");
    c.f1_averaging = f1 == "micro" ? F1Averaging::Micro : F1Averaging::Macro;
    r.get("base_seed", c.base_seed);
    r.get("workers", c.workers);
    r.finish();
    c.validate();
    return c;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream is(path);
    require(is.good(), "cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

/// FNV-1a 64 over the canonical JSON dump, excluding the worker count (which
/// never changes results).
inline std::string config_hash(const ScenarioConfig& c)
{
    nlohmann::json j = to_json(c);
    j.erase("workers");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

/// Second target of a resolution pair: (r + d Δr sin θ, v + d Δv cos θ).
inline Target offset_target(const Target& a, double d, double theta, const RadioConfig& radio)
{
    Target b = a;
    b.range_m = a.range_m + d * radio.range_resolution_m() * std::sin(theta);
    b.velocity_mps = a.velocity_mps + d * radio.velocity_resolution_mps() * std::cos(theta);
    return b;
}

/// Two unit-magnitude targets at normalized distance d: the first uniform in
/// the box, the second at a uniform angle around it; pairs leaving the box are
/// redrawn.
inline std::vector<Target> place_pair(Rng& rng, double d, const TargetSamplingSpec& box, const RadioConfig& radio,
                                      std::size_t budget)
{
    for (std::size_t attempt = 0; attempt <= budget; ++attempt) {
        Target a;
        a.range_m = rng.uniform(box.range_min_m, box.range_max_m);
        a.velocity_mps = rng.uniform(box.velocity_min_mps, box.velocity_max_mps);
        Target b = offset_target(a, d, rng.uniform(0.0, kTwoPi), radio);
        if (b.range_m < box.range_min_m || b.range_m > box.range_max_m || b.velocity_mps < box.velocity_min_mps ||
            b.velocity_mps > box.velocity_max_mps)
            continue;
        a.alpha = std::polar(1.0, rng.uniform(0.0, kTwoPi));
        b.alpha = std::polar(1.0, rng.uniform(0.0, kTwoPi));
        return {a, b};
    }
    throw Error("place_pair: placement budget exhausted");
}

/// Scores of one trial, indexed [profile][window][detector] in config order,
/// plus the relative noise floor per [profile][window].
struct TrialOutcome {
    bool ok = true;
    std::string error;
    std::vector<TrialScore> scores;
    std::vector<double> noise_floor_db;
};

inline std::size_t score_index(const ScenarioConfig& c, std::size_t p, std::size_t w, std::size_t d)
{
    return (p * c.windows.size() + w) * c.detectors.size() + d;
}

inline std::vector<Target> trial_targets(const ScenarioConfig& c, std::size_t point, Rng& rng)
{
    if (c.kind == ScenarioKind::NoiseLimited)
        return sample_targets(rng, c.targets);
    return place_pair(rng, c.spacing_grid[point], c.targets, c.radio, c.placement_budget);
}

inline double trial_snr_db(const ScenarioConfig& c, std::size_t point)
{
    return c.kind == ScenarioKind::NoiseLimited ? c.snr_grid_db[point] : c.resolution_snr_db;
}

/// Channel estimate for one profile. Every profile of a trial sees the same
/// targets and the same random stream so that profiles are paired.
inline CsiMatrix trial_csi(const ScenarioConfig& c, const ImpairmentProfile& profile, std::span<const Target> targets,
                           double snr_db, Rng rng)
{
    if (c.pipeline == Pipeline::Linear)
        return synthesize_csi(targets, snr_db, c.radio, rng);
    RadioConfig radio = c.radio;
    radio.modulation = profile.modulation;
    const FullChain chain(radio, profile.frontend(c.rolloff, c.span_symbols));
    return chain.csi(targets, snr_db, rng);
}

/// Random stream of a trial. It does not depend on the grid point: trial t
/// sees the same targets (or pair anchor and bearing), symbols and unit-variance
/// noise at every SNR or spacing, so curves are paired along the grid.
inline Rng trial_rng(const ScenarioConfig& c, std::size_t trial) { return Rng::keyed(c.base_seed, trial); }

inline TrialOutcome run_trial(const ScenarioConfig& c, std::size_t point, std::size_t trial)
{
    TrialOutcome out;
    try {
        Rng rng = trial_rng(c, trial);
        Rng target_rng = rng.split(0);
        const Rng noise_rng = rng.split(1);
        const auto targets = trial_targets(c, point, target_rng);
        const double snr_db = trial_snr_db(c, point);
        const bool known_noise = c.noise_estimate == NoiseEstimate::Known ||
                                 (c.noise_estimate == NoiseEstimate::Auto && c.pipeline == Pipeline::Linear);
        out.scores.resize(c.profiles.size() * c.windows.size() * c.detectors.size());
        out.noise_floor_db.resize(c.profiles.size() * c.windows.size());
        for (std::size_t p = 0; p < c.profiles.size(); ++p) {
            const CsiMatrix h = trial_csi(c, c.profiles[p], targets, snr_db, noise_rng);
            for (std::size_t w = 0; w < c.windows.size(); ++w) {
                const WindowEntry& win = c.windows[w];
                const Periodogram s = compute_periodogram(h, win.spec);
                out.noise_floor_db[p * c.windows.size() + w] = relative_noise_floor_db(s);
                double noise = 0.0;
                if (known_noise && std::isfinite(snr_db))
                    noise = windowed_noise_level(db_to_linear(-snr_db), win.spec, h.values.rows(), h.values.cols());
                if (!(noise > 0.0))
                    noise = estimate_noise_power(s);
                if (!(noise > 0.0))
                    noise = std::numeric_limits<double>::min();
                const auto gate = AssociationGate::scaled(c.radio, win.kappa());
                for (std::size_t d = 0; d < c.detectors.size(); ++d) {
                    const auto dets = run_detector(c.detectors[d], s, noise);
                    out.scores[score_index(c, p, w, d)] = associate(dets, targets, gate);
                }
            }
        }
    } catch (const std::exception& e) {
        out = TrialOutcome{};
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Campaigns
// ---------------------------------------------------------------------------

struct CurvePoint {
    double x = 0.0;
    Aggregate aggregate;
    Estimate noise_floor_db;
    std::size_t failed = 0;
};

struct BenchCurve {
    std::string scenario;
    std::string detector;
    std::string window;
    std::string profile;
    Pipeline pipeline = Pipeline::Linear;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<CurvePoint> points;
};

struct FailedTrial {
    std::size_t point = 0;
    std::size_t trial = 0;
    std::string error;
};

struct BenchResult {
    ScenarioConfig config;
    std::vector<BenchCurve> curves; // ordered profile, window, detector
    std::vector<FailedTrial> failures;
};

/// Apply fn(i) for i in [0, count) on `workers` threads. Work is claimed from
/// a shared counter; callers write results into slot i only.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn)
{
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    for (auto& th : pool)
        th.join();
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

inline BenchResult run_campaign(const ScenarioConfig& c, const ProgressFn& progress = {})
{
    c.validate();
    const auto& grid = c.grid();
    const std::size_t trials = c.trials_per_point;
    const std::size_t total = grid.size() * trials;
    std::vector<TrialOutcome> outcomes(total);
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    parallel_for(total, c.workers, [&](std::size_t i) {
        outcomes[i] = run_trial(c, i / trials, i % trials);
        const std::size_t n = ++done;
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(n, total);
        }
    });

    BenchResult res;
    res.config = c;
    const std::string hash = config_hash(c);
    for (std::size_t i = 0; i < total; ++i)
        if (!outcomes[i].ok)
            res.failures.push_back({i / trials, i % trials, outcomes[i].error});

    for (std::size_t p = 0; p < c.profiles.size(); ++p) {
        for (std::size_t w = 0; w < c.windows.size(); ++w) {
            for (std::size_t d = 0; d < c.detectors.size(); ++d) {
                BenchCurve curve{c.name,           c.detectors[d].name(), to_string(c.windows[w].spec), c.profiles[p].name,
                                 c.pipeline,       c.base_seed,           hash,                         {}};
                for (std::size_t g = 0; g < grid.size(); ++g) {
                    std::vector<TrialScore> scores;
                    std::vector<double> floors;
                    CurvePoint pt;
                    pt.x = grid[g];
                    for (std::size_t t = 0; t < trials; ++t) {
                        const auto& o = outcomes[g * trials + t];
                        if (!o.ok) {
                            ++pt.failed;
                            continue;
                        }
                        scores.push_back(o.scores[score_index(c, p, w, d)]);
                        floors.push_back(o.noise_floor_db[p * c.windows.size() + w]);
                    }
                    if (!scores.empty()) {
                        pt.aggregate = score_curve(scores, c.f1_averaging);
                        pt.noise_floor_db = mean_ci(floors);
                    }
                    curve.points.push_back(pt);
                }
                res.curves.push_back(std::move(curve));
            }
        }
    }
    return res;
}

inline BenchResult run_noise_limited(const ScenarioConfig& c, const ProgressFn& progress = {})
{
    require(c.kind == ScenarioKind::NoiseLimited, "run_noise_limited: scenario kind is not noise-limited");
    return run_campaign(c, progress);
}

inline BenchResult run_resolution_limited(const ScenarioConfig& c, const ProgressFn& progress = {})
{
    require(c.kind == ScenarioKind::ResolutionLimited, "run_resolution_limited: scenario kind is not resolution-limited");
    return run_campaign(c, progress);
}

/// Curve lookup by name; throws if absent.
inline const BenchCurve& find_curve(const BenchResult& r, std::string_view detector, std::string_view window,
                                    std::string_view profile = "clean")
{
    for (const auto& c : r.curves)
        if (c.detector == detector && c.window == window && c.profile == profile)
            return c;
    throw Error("no curve for " + std::string(detector) + "/" + std::string(window) + "/" + std::string(profile));
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline constexpr std::string_view kResultsCsvHeader =
    "scenario,detector,window,profile,x_value,p_md,p_md_ci,fa_mean,f1,f1_ci,trials,seed";

inline void write_results_csv(const std::vector<BenchCurve>& curves, std::ostream& os)
{
    os << kResultsCsvHeader << '\n';
    char buf[512];
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            const auto& a = p.aggregate;
            std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%zu,%llu\n", c.scenario.c_str(),
                          c.detector.c_str(), c.window.c_str(), c.profile.c_str(), p.x, a.p_md.value, a.p_md.ci,
                          a.fa.value, a.f1.value, a.f1.ci, a.trials, static_cast<unsigned long long>(c.seed));
            os << buf;
        }
    }
}

inline std::string results_csv(const std::vector<BenchCurve>& curves)
{
    std::ostringstream os;
    write_results_csv(curves, os);
    return os.str();
}

inline nlohmann::json manifest_json(const BenchResult& r)
{
    nlohmann::json j;
    j["config"] = to_json(r.config);
    j["config_hash"] = config_hash(r.config);
    j["pipeline"] = to_string(r.config.pipeline);
    j["association"] = {{"rule", "nearest-target-in-gate"}, {"duplicates", "discarded"},
                        {"f1_averaging", r.config.f1_averaging == F1Averaging::Micro ? "micro" : "macro"}};
    j["failed_trials"] = nlohmann::json::array();
    for (const auto& f : r.failures)
        j["failed_trials"].push_back({{"point", f.point}, {"trial", f.trial}, {"error", f.error}});
    j["curves"] = nlohmann::json::array();
    for (const auto& c : r.curves) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : c.points)
            pts.push_back({{"x", p.x},
                           {"trials", p.aggregate.trials},
                           {"failed", p.failed},
                           {"tp", p.aggregate.tp},
                           {"fp", p.aggregate.fp},
                           {"fn", p.aggregate.fn},
                           {"noise_floor_db", p.noise_floor_db.value}});
        j["curves"].push_back(
            {{"detector", c.detector}, {"window", c.window}, {"profile", c.profile}, {"points", std::move(pts)}});
    }
    return j;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "cannot open '" + path.string() + "' for writing");
    os << text;
    require(os.good(), "write to '" + path.string() + "' failed");
}

} // namespace detail

/// results.csv, manifest.json and plot/<profile>_<window>_<detector>_<metric>.dat
/// with columns x y y_lo y_hi.
inline void export_results(const BenchResult& r, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir / "plot");
    detail::write_text(dir / "results.csv", results_csv(r.curves));
    detail::write_text(dir / "manifest.json", manifest_json(r).dump(2) + "\n");
    char buf[160];
    for (const auto& c : r.curves) {
        const std::string stem = c.profile + "_" + c.window + "_" + c.detector;
        const std::pair<const char*, Estimate Aggregate::*> metrics[] = {
            {"p_md", &Aggregate::p_md}, {"fa", &Aggregate::fa}, {"f1", &Aggregate::f1}};
        for (const auto& [metric, member] : metrics) {
            std::string text = "# x y y_lo y_hi\n";
            for (const auto& p : c.points) {
                const Estimate& e = p.aggregate.*member;
                std::snprintf(buf, sizeof buf, "%.6g %.6g %.6g %.6g\n", p.x, e.value, e.value - e.ci, e.value + e.ci);
                text += buf;
            }
            detail::write_text(dir / "plot" / (stem + "_" + metric + ".dat"), text);
        }
    }
}

} // namespace isac
