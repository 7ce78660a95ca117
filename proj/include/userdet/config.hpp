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

#include "userdet/montecarlo.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace userdet
{

// Config problems: unknown keys, wrong types, out-of-range values. The
// message carries the line of the offending key when it can be located.
class ConfigError : public ParameterError
{
  public:
    using ParameterError::ParameterError;
};

// Optional grid axes; an empty axis falls back to the scalar in `params`.
struct SweepGrid
{
    std::vector<double> snr_db;
    std::vector<double> sir_db;
    std::vector<double> fd;
    std::vector<double> alpha;
    std::vector<int> users;
    std::vector<int> active_windows;
};

struct OutputPaths
{
    std::string csv = "results.csv";
    std::string jsonl;
    std::string thresholds = "thresholds.json";
};

enum class CodeMode
{
    Auto,     // m-sequence shifts when N = 2^d - 1, random otherwise
    Random,   // random +-1 codes
    Explicit  // codes listed in the config
};

std::string to_string(CodeMode mode);
CodeMode code_mode_from_string(const std::string &s);

struct ExperimentConfig
{
    SystemParams params; // snr and sir here are derived from the dB fields
    double snr_db = 0.0;
    double sir_db = 0.0;
    int pulse_fine_factor = 0; // fine grid points per chip, 0 = 64 M

    std::vector<DetectorId> detectors{DetectorId::Mglrt};
    SweepGrid sweep;

    double target_pfa = 0.01;
    long calibration_trials = 0; // 0 = max(10^4, 100 / target_pfa)
    long trials = 1000;
    std::uint64_t seed = 1;
    NoiseMode mode = NoiseMode::FaithfulStream;
    double te_max_safety = 1.0;

    CodeMode code_mode = CodeMode::Auto;
    std::vector<std::vector<int>> codes; // +-1 entries, explicit mode only
    bool redraw_codes_per_trial = false;

    OutputPaths output;

    [[nodiscard]] long effective_calibration_trials() const;
    // Checks every knob, including each grid point's SystemParams.
    void validate() const;
    [[nodiscard]] SweepSpec to_sweep_spec() const;
};

// Parses JSON text. Unknown keys, type mismatches and invalid values raise
// ConfigError with the key's line number.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::string &path);
std::string serialize_config(const ExperimentConfig &cfg);

// Presets fig1..fig4 at the published system parameters.
ExperimentConfig preset_config(const std::string &name);
const std::vector<std::string> &preset_names();

// ---- result files ----------------------------------------------------------

std::string csv_header();
std::string csv_row(const CurveRecord &r);
std::string jsonl_row(const CurveRecord &r);
// Grid-point keys already present in a CSV file (for resuming).
std::set<std::string> completed_points(const std::string &csv_path, const std::vector<DetectorId> &detectors);

std::string serialize_thresholds(const ThresholdTable &table);
ThresholdTable parse_thresholds(const std::string &text);
ThresholdTable load_thresholds(const std::string &path);
void save_thresholds(const ThresholdTable &table, const std::string &path);

} // namespace userdet
