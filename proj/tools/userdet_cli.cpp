// SPDX-License-Identifier: Apache-2.0
//
// userdet - blind new-user detection for DS/CDMA over doubly-dispersive channels
// Copyright (C) 2026 The userdet authors
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

#include "userdet/config.hpp"
#include "userdet/selftest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace
{

using namespace userdet;

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;

struct CommonFlags
{
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::optional<long> trials;
    std::optional<long> calibration_trials;
    std::string out;
};

void add_common(CLI::App *cmd, CommonFlags &f)
{
    cmd->add_option("--config", f.config, "JSON experiment config");
    cmd->add_option("--preset", f.preset, "fig1, fig2, fig3 or fig4");
    cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
    cmd->add_option("--threads", f.threads, "worker threads (default: all cores)");
    cmd->add_option("--trials", f.trials, "Monte Carlo trials per grid point");
    cmd->add_option("--calibration-trials", f.calibration_trials, "H0 trials per threshold");
    cmd->add_option("--out", f.out, "output path (overrides the config)");
}

ExperimentConfig resolve(const CommonFlags &f)
{
    if (!f.config.empty() && !f.preset.empty())
        throw ConfigError("use either --config or --preset, not both");
    ExperimentConfig cfg = !f.config.empty() ? load_config(f.config)
                           : !f.preset.empty() ? preset_config(f.preset)
                                               : ExperimentConfig{};
    if (f.seed)
        cfg.seed = *f.seed;
    if (f.trials)
        cfg.trials = *f.trials;
    if (f.calibration_trials)
        cfg.calibration_trials = *f.calibration_trials;
    cfg.validate();
    return cfg;
}

int threads_of(const CommonFlags &f) { return f.threads > 0 ? f.threads : default_threads(); }

void print_records(const std::vector<CurveRecord> &records)
{
    std::printf("%-13s %7s %7s %6s %6s %3s %4s %10s %7s %15s\n", "detector", "snr_db", "sir_db", "fd", "alpha", "K",
                "Qa", "threshold", "rate", "95% CI");
    for (const auto &r : records)
        std::printf("%-13s %7.2f %7.2f %6.3f %6.2f %3d %4d %10.4f %7.4f [%6.4f,%6.4f]\n", r.detector.c_str(),
                    r.knobs.snr_db, r.knobs.sir_db, r.knobs.fd, r.knobs.alpha, r.knobs.users,
                    r.knobs.active_windows, r.threshold, r.rate, r.ci_lo, r.ci_hi);
}

int cmd_selftest(const SelftestOptions &opt)
{
    const auto start = std::chrono::steady_clock::now();
    const auto checks = run_selftest(opt);
    bool ok = true;
    for (const auto &c : checks)
    {
        std::printf("%-4s  %-30s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("selftest %s in %.1f s\n", ok ? "passed" : "FAILED", secs);
    if (!ok)
        for (const auto &c : checks)
            if (!c.passed)
                std::fprintf(stderr, "invariant violated: %s\n", c.name.c_str());
    return ok ? kExitOk : kExitInvariant;
}

int cmd_calibrate(const CommonFlags &f)
{
    const ExperimentConfig cfg = resolve(f);
    const std::string path = f.out.empty() ? cfg.output.thresholds : f.out;
    ThresholdTable table;
    calibrate_table(cfg.to_sweep_spec(), table, threads_of(f));
    save_thresholds(table, path);
    std::printf("%-13s %10s %8s  %s\n", "detector", "threshold", "trials", "family");
    for (const auto &e : table.entries)
        std::printf("%-13s %10.4f %8ld  %s\n", e.detector.c_str(), e.threshold, e.n_calibration_trials,
                    e.family.c_str());
    std::printf("wrote %zu thresholds to %s\n", table.entries.size(), path.c_str());
    return kExitOk;
}

int cmd_sweep(const CommonFlags &f, const std::string &thresholds, const std::string &jsonl, bool resume)
{
    ExperimentConfig cfg = resolve(f);
    if (!jsonl.empty())
        cfg.output.jsonl = jsonl;
    const std::string csv_path = f.out.empty() ? cfg.output.csv : f.out;
    const ThresholdTable table = load_thresholds(thresholds.empty() ? cfg.output.thresholds : thresholds);
    if (std::abs(table.target_pfa - cfg.target_pfa) > 1e-15)
        throw ConfigError("threshold table was calibrated for a different target_pfa");

    const SweepSpec spec = cfg.to_sweep_spec();
    const std::set<std::string> done = resume ? completed_points(csv_path, spec.detectors) : std::set<std::string>{};
    if (!resume && std::filesystem::exists(csv_path))
        std::filesystem::remove(csv_path);

    const bool fresh = !std::filesystem::exists(csv_path) || std::filesystem::file_size(csv_path) == 0;
    std::ofstream csv(csv_path, std::ios::app);
    if (!csv)
        throw ConfigError("cannot write '" + csv_path + "'");
    if (fresh)
        csv << csv_header() << "\n";
    std::ofstream js;
    if (!cfg.output.jsonl.empty())
        js.open(cfg.output.jsonl, std::ios::app);

    const auto records = run_sweep(spec, table, threads_of(f),
                                   [&](const CurveRecord &r)
                                   {
                                       csv << csv_row(r) << "\n" << std::flush;
                                       if (js)
                                           js << jsonl_row(r) << "\n" << std::flush;
                                   },
                                   done);
    print_records(records);
    std::printf("%zu records appended to %s (%zu grid points skipped)\n", records.size(), csv_path.c_str(),
                done.size());
    return kExitOk;
}

int cmd_run(const CommonFlags &f)
{
    ExperimentConfig cfg = resolve(f);
    // A single point: the scalar knobs, no grid.
    cfg.sweep = SweepGrid{};
    cfg.validate();
    const SweepSpec spec = cfg.to_sweep_spec();
    ThresholdTable table;
    calibrate_table(spec, table, threads_of(f));
    const auto records = run_sweep(spec, table, threads_of(f));
    print_records(records);
    if (!f.out.empty())
    {
        const bool fresh = !std::filesystem::exists(f.out) || std::filesystem::file_size(f.out) == 0;
        std::ofstream csv(f.out, std::ios::app);
        if (fresh)
            csv << csv_header() << "\n";
        for (const auto &r : records)
            csv << csv_row(r) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"userdet: blind new-user detection for DS/CDMA over doubly-dispersive channels"};
    app.require_subcommand(1);

    SelftestOptions st;
    int st_threads = 1;
    auto *selftest = app.add_subcommand("selftest", "run the oracle suite at toy dimensions");
    selftest->add_option("--seed", st.seed, "master seed");
    selftest->add_option("--threads", st_threads, "worker threads");
    selftest->add_flag("--corrupt-geometry", st.corrupt_geometry, "test hook: break the fast statistic");

    CommonFlags cal_flags;
    auto *calibrate = app.add_subcommand("calibrate", "write a threshold table for every (detector, family)");
    add_common(calibrate, cal_flags);

    CommonFlags sweep_flags;
    std::string thresholds, jsonl;
    bool resume = false;
    auto *sweep = app.add_subcommand("sweep", "estimate Pd over the config grid");
    add_common(sweep, sweep_flags);
    sweep->add_option("--thresholds", thresholds, "threshold table from 'calibrate'");
    sweep->add_option("--jsonl", jsonl, "also append line-delimited JSON records");
    sweep->add_flag("--resume", resume, "skip grid points already present in the CSV");

    CommonFlags run_flags;
    auto *run = app.add_subcommand("run", "calibrate and estimate Pd at one point");
    add_common(run, run_flags);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try
    {
        if (*selftest)
        {
            st.threads = st_threads;
            return cmd_selftest(st);
        }
        if (*calibrate)
            return cmd_calibrate(cal_flags);
        if (*sweep)
            return cmd_sweep(sweep_flags, thresholds, jsonl, resume);
        if (*run)
            return cmd_run(run_flags);
    }
    catch (const ParameterError &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return kExitInvariant;
    }
    return kExitOk;
}
