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

#pragma once

#include "userdet/detectors.hpp"
#include "userdet/scenario.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace userdet
{

// ---- deterministic random streams ---------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(const std::string &s);
// Seed of one logical stream: mixes the master seed with any number of tags.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

enum class StreamPurpose : std::uint64_t
{
    Codes = 1,
    Calibration = 2,
    Rate = 3,
    Ensemble = 4,
    Check = 5
};

// ---- small statistics ----------------------------------------------------

// Hyndman-Fan type 7 (linear interpolation between order statistics).
double quantile_type7(std::vector<double> sample, double prob);

struct RateEstimate
{
    long successes = 0;
    long trials = 0;
    double rate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Wilson score interval at 95%.
RateEstimate wilson_interval(long successes, long trials);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult
{
    double statistic = 0.0;
    double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled exactly once; the first exception is rethrown.
void parallel_for(long n, int threads, const std::function<void(long)> &fn);

int default_threads();

// ---- generic calibration over an indexed statistic -----------------------

using IndexedStatistic = std::function<double(long trial)>;

// (1 - target_pfa) type-7 quantile of n_trials draws. Requires
// n_trials >= 10 / target_pfa.
double calibrate_threshold(const IndexedStatistic &stat, long n_trials, double target_pfa, int threads = 1);

// Fraction of draws with statistic > threshold, with a Wilson interval.
RateEstimate estimate_rate(const IndexedStatistic &stat, double threshold, long n_trials, int threads = 1);

// ln(safety * max_i T_e(M_i)).
double estimate_log_te_max(std::span<const ComplexMatrix> covariances, const CodeGeometry &geometry,
                           double safety = 1.0);

// ---- scenario-level trial batches ----------------------------------------

struct TrialBatch
{
    std::vector<std::vector<double>> stats; // [detector][trial]
    std::vector<double> log_te;             // per trial, when requested
};

struct BatchRequest
{
    std::vector<DetectorId> detectors;
    std::uint64_t stream_seed = 0;
    long trials = 0;
    int threads = 1;
    std::optional<double> log_te_max;    // for the normalized detector
    bool record_log_te = false;          // per-trial ln T_e of the analytic M_w
    const std::vector<std::vector<double>> *fixed_delays = nullptr;
    // Draws fresh codes for every trial when set.
    std::function<std::vector<SpreadingCode>(std::mt19937_64 &)> code_redraw;
};

TrialBatch run_trials(const ScenarioModel &model, const BatchRequest &request);

// ---- sweeps ----------------------------------------------------------------

struct ScenarioKnobs
{
    double snr_db = 10.0;
    double sir_db = 0.0;
    double fd = 0.1;
    double alpha = 0.3;
    int users = 1;
    int active_windows = 120;
    NoiseMode mode = NoiseMode::FaithfulStream;

    // Threshold family: every knob but active_windows, which does not
    // affect the H0 distribution.
    [[nodiscard]] std::string family() const;
    // Full identity of a grid point.
    [[nodiscard]] std::string key() const;
    [[nodiscard]] SystemParams apply(SystemParams base) const;
};

struct CurveRecord
{
    std::string detector;
    ScenarioKnobs knobs;
    double threshold = 0.0;
    double rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
    std::string code_fingerprint;
    std::string hypothesis = "H1";
};

struct ThresholdEntry
{
    std::string detector;
    std::string family;
    double threshold = 0.0;
    std::optional<double> log_te_max;
    long n_calibration_trials = 0;
    std::string quantile_method = "type7";
};

struct ThresholdTable
{
    double target_pfa = 0.01;
    std::uint64_t seed = 0;
    std::vector<ThresholdEntry> entries;

    [[nodiscard]] const ThresholdEntry *find(const std::string &detector, const std::string &family) const;
    void upsert(ThresholdEntry entry);
};

struct SweepSpec
{
    SystemParams base;
    std::vector<SpreadingCode> codes; // enough for the largest user count
    bool redraw_codes = false;
    int fine_per_chip = 0;

    std::vector<double> snr_db{10.0};
    std::vector<double> sir_db{0.0};
    std::vector<double> fd{0.1};
    std::vector<double> alpha{0.3};
    std::vector<int> users{1};
    std::vector<int> active_windows{120};
    NoiseMode mode = NoiseMode::FaithfulStream;

    std::vector<DetectorId> detectors{DetectorId::Mglrt};
    long trials = 1000;
    long calibration_trials = 10000;
    double target_pfa = 0.01;
    double te_max_safety = 1.0;
    std::uint64_t seed = 1;

    [[nodiscard]] std::vector<ScenarioKnobs> grid() const;
    void validate() const;
};

// Builds the model of one grid point under the given hypothesis.
ScenarioModel make_model(const SweepSpec &spec, const ScenarioKnobs &knobs, Hypothesis h);

// Spreading codes for `users` users from the master seed: cyclic shifts of
// one m-sequence when N = 2^d - 1 (unless random codes are forced),
// otherwise random +-1 codes.
std::vector<SpreadingCode> draw_codes(int users, int processing_gain, std::uint64_t master_seed,
                                      bool force_random = false);
std::vector<SpreadingCode> draw_codes(int users, int processing_gain, std::mt19937_64 &rng, bool force_random);

// Calibrates every (detector, family) of the grid that is missing from the
// table. H0 trials of one family are shared by all detectors.
void calibrate_table(const SweepSpec &spec, ThresholdTable &table, int threads);

using RecordSink = std::function<void(const CurveRecord &)>;

// One record per (grid point, detector). Grid points whose key() is in
// `done` are skipped. The sink sees each grid point's records as soon as
// they exist.
std::vector<CurveRecord> run_sweep(const SweepSpec &spec, const ThresholdTable &table, int threads,
                                   const RecordSink &sink = {}, const std::set<std::string> &done = {});

} // namespace userdet
