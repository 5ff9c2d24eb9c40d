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

// isacbench command line front end: simulate, detect, bench, external-detect.

#include "isacbench/isacbench.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTruthSuffix = ".truth.json";

json truth_json(const isac::ScenarioConfig& c, const std::vector<isac::Target>& targets, std::size_t point,
                const isac::WindowEntry& window, const std::string& profile, const std::string& data_file)
{
    const auto gate = isac::AssociationGate::scaled(c.radio, window.kappa());
    json j;
    j["periodogram"] = data_file;
    j["radio"] = isac::to_json(c.radio);
    j["window"] = isac::to_string(window.spec);
    j["profile"] = profile;
    j["pipeline"] = isac::to_string(c.pipeline);
    j["snr_db"] = isac::trial_snr_db(c, point);
    j["gate"] = {{"range_halfwidth_m", gate.range_halfwidth_m},
                 {"velocity_halfwidth_mps", gate.velocity_halfwidth_mps},
                 {"range_unit_m", gate.range_unit_m},
                 {"velocity_unit_mps", gate.velocity_unit_mps}};
    j["targets"] = json::array();
    for (const auto& t : targets)
        j["targets"].push_back({{"range_m", t.range_m},
                                {"velocity_mps", t.velocity_mps},
                                {"alpha_re", t.alpha.real()},
                                {"alpha_im", t.alpha.imag()}});
    return j;
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream os(path);
    isac::require(os.good(), "cannot open '" + path.string() + "' for writing");
    os << j.dump(2) << '\n';
}

json read_json(const fs::path& path)
{
    std::ifstream is(path);
    isac::require(is.good(), "cannot open '" + path.string() + "'");
    try {
        return json::parse(is, nullptr, true, true);
    } catch (const json::exception& e) {
        throw isac::Error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string out;
    std::string out_dir;
    std::string format; // csi | periodogram; inferred from the extension
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t point = 0;
    std::size_t count = 1;
    std::string profile;
    std::string window;
};

template <class T>
const T& pick(const std::vector<T>& items, const std::string& name, std::string (*label)(const T&), const char* what)
{
    if (name.empty())
        return items.front();
    for (const auto& it : items)
        if (label(it) == name)
            return it;
    throw isac::Error(std::string("no ") + what + " named '" + name + "' in the config");
}

std::string profile_label(const isac::ImpairmentProfile& p) { return p.name; }
std::string window_label(const isac::WindowEntry& w) { return isac::to_string(w.spec); }

void write_one(const isac::ScenarioConfig& c, const SimulateArgs& a, std::size_t trial, const fs::path& out)
{
    const auto& profile = pick(c.profiles, a.profile, &profile_label, "profile");
    const auto& window = pick(c.windows, a.window, &window_label, "window");
    isac::require(a.point < c.grid().size(), "--point is outside the scenario grid");

    isac::Rng rng = isac::trial_rng(c, trial);
    isac::Rng target_rng = rng.split(0);
    const auto targets = isac::trial_targets(c, a.point, target_rng);
    const auto h = isac::trial_csi(c, profile, targets, isac::trial_snr_db(c, a.point), rng.split(1));

    std::string format = a.format;
    if (format.empty())
        format = out.extension() == ".csi" ? "csi" : "periodogram";
    if (format == "csi")
        isac::write_csi(h, out);
    else if (format == "periodogram")
        isac::write_periodogram(isac::compute_periodogram(h, window.spec), out);
    else
        throw isac::Error("--format must be csi or periodogram");
    write_json(fs::path(out.string() + kTruthSuffix),
               truth_json(c, targets, a.point, window, profile.name, out.filename().string()));
}

int run_simulate(const SimulateArgs& a)
{
    auto c = isac::load_scenario(a.config);
    if (a.seed_set)
        c.base_seed = a.seed;
    if (!a.out.empty()) {
        isac::require(a.count == 1, "--count needs --out-dir");
        write_one(c, a, 0, a.out);
        std::printf("wrote %s\n", a.out.c_str());
        return 0;
    }
    isac::require(!a.out_dir.empty(), "simulate needs --out or --out-dir");
    fs::create_directories(a.out_dir);
    const std::string ext = a.format == "csi" ? ".csi" : ".per";
    for (std::size_t t = 0; t < a.count; ++t) {
        char name[64];
        std::snprintf(name, sizeof name, "frame_%04zu%s", t, ext.c_str());
        write_one(c, a, t, fs::path(a.out_dir) / name);
    }
    std::printf("wrote %zu frames to %s\n", a.count, a.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
    std::string input;
    std::string out;
    std::string detector = "ca";
    double p_fa = 1e-4;
    std::vector<std::size_t> guard{2, 2};
    std::vector<std::size_t> reference{6, 6};
    std::size_t subwindows = 8;
    bool subwindows_set = false;
    std::size_t censor_strongest = 0;
    std::size_t censor_weakest = 0;
    bool censor_set = false;
    std::size_t os_rank = 0;
    double noise_power = 0.0;
};

int run_detect(const DetectArgs& a)
{
    const auto s = isac::read_periodogram(a.input);
    isac::CfarConfig base;
    base.p_fa = a.p_fa;
    base.guard_range = a.guard[0];
    base.guard_doppler = a.guard[1];
    base.reference_range = a.reference[0];
    base.reference_doppler = a.reference[1];
    if (a.subwindows_set)
        base.num_subwindows = a.subwindows;
    auto d = isac::DetectorSpec::make(isac::detector_kind_from_string(a.detector), base);
    if (a.subwindows_set)
        d.cfar.num_subwindows = a.subwindows;
    if (a.censor_set) {
        d.cfar.censor_strongest = a.censor_strongest;
        d.cfar.censor_weakest = a.censor_weakest;
    }
    if (a.os_rank > 0) {
        isac::require(d.kind == isac::DetectorKind::Os, "--os-rank only applies to the os detector");
        d.cfar = d.cfar.with_os_rank(a.os_rank);
    }
    d.validate();
    const double noise = a.noise_power > 0.0 ? a.noise_power : isac::estimate_noise_power(s);
    const auto dets = isac::run_detector(d, s, noise);
    if (a.out.empty() || a.out == "-")
        isac::write_detections_csv(dets, std::cout);
    else
        isac::write_detections_csv(dets, fs::path(a.out));
    std::fprintf(stderr, "%zu detections\n", dets.size());
    return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string config;
    std::string out_dir;
    std::size_t trials = 0;
    std::size_t workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool quiet = false;
};

std::size_t env_workers()
{
    const char* v = std::getenv("ISACBENCH_WORKERS");
    if (v == nullptr || *v == '\0')
        return 0;
    char* end = nullptr;
    const unsigned long n = std::strtoul(v, &end, 10);
    isac::require(*end == '\0' && n > 0, "ISACBENCH_WORKERS must be a positive integer");
    return n;
}

int run_bench(isac::ScenarioKind kind, const BenchArgs& a)
{
    json j = a.config.empty() ? json::object() : read_json(a.config);
    if (!j.contains("kind"))
        j["kind"] = isac::to_string(kind);
    auto c = isac::scenario_from_json(j);
    isac::require(c.kind == kind, "config kind '" + isac::to_string(c.kind) + "' does not match the subcommand");
    if (a.trials > 0)
        c.trials_per_point = a.trials;
    if (a.seed_set)
        c.base_seed = a.seed;
    if (const std::size_t w = env_workers(); w > 0)
        c.workers = w;
    if (a.workers > 0)
        c.workers = a.workers;
    c.validate();

    std::size_t last = 0;
    isac::ProgressFn progress;
    if (!a.quiet)
        progress = [&last](std::size_t done, std::size_t total) {
            const std::size_t pct = done * 100 / total;
            if (pct >= last + 10 || done == total) {
                last = pct;
                std::fprintf(stderr, "  %3zu%% (%zu/%zu trials)\n", pct, done, total);
            }
        };
    const auto result = isac::run_campaign(c, progress);
    isac::export_results(result, a.out_dir);
    std::printf("%s: %zu curves, %zu failed trials, results in %s\n", c.name.c_str(), result.curves.size(),
                result.failures.size(), a.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// external-detect
// ---------------------------------------------------------------------------

struct ExternalArgs {
    std::string input_dir;
    std::string detections;
    bool score = false;
    std::string out;
};

isac::AssociationGate gate_from_truth(const json& t)
{
    const auto& g = t.at("gate");
    return {g.at("range_halfwidth_m").get<double>(), g.at("velocity_halfwidth_mps").get<double>(),
            g.at("range_unit_m").get<double>(), g.at("velocity_unit_mps").get<double>()};
}

std::vector<isac::Target> targets_from_truth(const json& t)
{
    std::vector<isac::Target> out;
    for (const auto& e : t.at("targets"))
        out.push_back({e.at("range_m").get<double>(), e.at("velocity_mps").get<double>(),
                       {e.value("alpha_re", 1.0), e.value("alpha_im", 0.0)}});
    return out;
}

int run_external(const ExternalArgs& a)
{
    std::vector<fs::path> inputs;
    for (const auto& e : fs::directory_iterator(a.input_dir))
        if (e.is_regular_file() && e.path().extension() == ".per")
            inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());
    isac::require(!inputs.empty(), "no .per periodogram files in '" + a.input_dir + "'");

    if (!a.score) {
        // Protocol listing: which CSV each periodogram's detections belong in.
        for (const auto& p : inputs)
            std::printf("%s -> %s.csv\n", p.filename().c_str(), p.stem().c_str());
        return 0;
    }
    isac::require(!a.detections.empty(), "--score needs --detections");
    const bool per_file = fs::is_directory(a.detections);
    isac::require(per_file || inputs.size() == 1,
                  "--detections is a single CSV but the input directory holds several periodograms");

    std::vector<isac::TrialScore> scores;
    json report;
    report["files"] = json::array();
    for (const auto& p : inputs) {
        const fs::path truth_path = p.string() + kTruthSuffix;
        const json truth = read_json(truth_path);
        const fs::path det_path = per_file ? fs::path(a.detections) / (p.stem().string() + ".csv") : fs::path(a.detections);
        const auto dets = isac::read_detections_csv(det_path);
        const auto targets = targets_from_truth(truth);
        const auto s = isac::associate(dets, targets, gate_from_truth(truth));
        scores.push_back(s);
        report["files"].push_back({{"periodogram", p.filename().string()},
                                   {"targets", targets.size()},
                                   {"detections", dets.size()},
                                   {"tp", s.tp},
                                   {"fp", s.fp},
                                   {"fn", s.fn}});
        std::printf("%-24s targets %2zu  detections %3zu  tp %2zu  fp %3zu  fn %2zu\n", p.filename().c_str(),
                    targets.size(), dets.size(), s.tp, s.fp, s.fn);
    }
    const auto agg = isac::score_curve(scores);
    std::printf("aggregate over %zu images: p_md %.4f +- %.4f  fa %.3f +- %.3f  f1 %.4f\n", agg.trials,
                agg.p_md.value, agg.p_md.ci, agg.fa.value, agg.fa.ci, agg.f1.value);
    report["aggregate"] = {{"images", agg.trials}, {"p_md", agg.p_md.value}, {"p_md_ci", agg.p_md.ci},
                           {"fa_mean", agg.fa.value}, {"fa_ci", agg.fa.ci},     {"f1", agg.f1.value},
                           {"f1_ci", agg.f1.ci}};
    if (!a.out.empty())
        write_json(a.out, report);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"OFDM ISAC radar simulation and CFAR peak-detection benchmark"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Write one CSI matrix or periodogram plus its ground truth");
    simulate->add_option("--config", sim.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    auto* out_opt = simulate->add_option("--out", sim.out, "Output file (.csi for CSI, otherwise periodogram)");
    auto* dir_opt = simulate->add_option("--out-dir", sim.out_dir, "Output directory for --count frames");
    out_opt->excludes(dir_opt);
    simulate->add_option("--format", sim.format, "csi or periodogram")->check(CLI::IsMember({"csi", "periodogram"}));
    simulate->add_option("--seed", sim.seed, "Base seed (overrides the config)")->each([&](const std::string&) {
        sim.seed_set = true;
    });
    simulate->add_option("--point", sim.point, "Grid point index (SNR or spacing)");
    simulate->add_option("--count", sim.count, "Number of frames (with --out-dir)")->check(CLI::PositiveNumber);
    simulate->add_option("--profile", sim.profile, "Impairment profile name (default: first)");
    simulate->add_option("--window", sim.window, "Window name for periodograms (default: first)");

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "Run a CFAR detector on a periodogram file");
    detect->add_option("--input", det.input, "Periodogram file")->required()->check(CLI::ExistingFile);
    detect->add_option("--out", det.out, "Detection CSV (default: stdout)");
    detect->add_option("--detector", det.detector, "global, ca, cs or os")
        ->check(CLI::IsMember({"global", "ca", "cs", "os"}));
    detect->add_option("--pfa", det.p_fa, "Probability of false alarm");
    detect->add_option("--guard", det.guard, "Guard half-extent: range doppler")->expected(2);
    detect->add_option("--reference", det.reference, "Reference half-extent: range doppler")->expected(2);
    detect->add_option("--subwindows", det.subwindows, "Sub-window count K (0: exact sorting)")
        ->each([&](const std::string&) { det.subwindows_set = true; });
    detect->add_option("--censor-strongest", det.censor_strongest, "Samples censored from the top")
        ->each([&](const std::string&) { det.censor_set = true; });
    detect->add_option("--censor-weakest", det.censor_weakest, "Samples censored from the bottom")
        ->each([&](const std::string&) { det.censor_set = true; });
    detect->add_option("--os-rank", det.os_rank, "Order statistic rank for os (1-based)");
    detect->add_option("--noise-power", det.noise_power, "Noise level for global (default: median estimate)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Run a Monte Carlo campaign");
    bench->require_subcommand(1);
    auto add_bench_options = [&](CLI::App* sub) {
        sub->add_option("--config", bench_args.config, "Scenario config (JSON); defaults apply when omitted")
            ->check(CLI::ExistingFile);
        sub->add_option("--out-dir", bench_args.out_dir, "Result directory")->required();
        sub->add_option("--trials", bench_args.trials, "Trials per grid point")->check(CLI::PositiveNumber);
        sub->add_option("--workers", bench_args.workers, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", bench_args.seed, "Base seed")->each([&](const std::string&) {
            bench_args.seed_set = true;
        });
        sub->add_flag("--quiet", bench_args.quiet, "No progress output");
    };
    auto* noise = bench->add_subcommand("noise-limited", "SNR sweep");
    auto* resolution = bench->add_subcommand("resolution-limited", "Two-target spacing sweep");
    add_bench_options(noise);
    add_bench_options(resolution);

    ExternalArgs ext;
    auto* external = app.add_subcommand("external-detect", "Score a third-party detector's CSV output");
    external->add_option("--input-dir", ext.input_dir, "Directory of .per files with .truth.json sidecars")
        ->required()
        ->check(CLI::ExistingDirectory);
    external->add_option("--detections", ext.detections, "Detection CSV, or a directory of <stem>.csv")
        ->check(CLI::ExistingPath);
    external->add_flag("--score", ext.score, "Score the detections against the ground truth");
    external->add_option("--out", ext.out, "Optional JSON report");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return run_simulate(sim);
        if (detect->parsed())
            return run_detect(det);
        if (noise->parsed())
            return run_bench(isac::ScenarioKind::NoiseLimited, bench_args);
        if (resolution->parsed())
            return run_bench(isac::ScenarioKind::ResolutionLimited, bench_args);
        if (external->parsed())
            return run_external(ext);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "isacbench: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
