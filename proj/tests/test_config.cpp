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

#include "support.hpp"

#include "userdet/config.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace userdet;
using namespace testing_support;

namespace
{

const char *kSample = R"({
  "system": {
    "processing_gain": 15,
    "samples_per_chip": 2,
    "paths": 3,
    "snr_db": 12,
    "doppler": 0.1
  },
  "detectors": ["mglrt", "genie"],
  "sweep": {"snr_db": [6, 9], "k_users": [1, 3]},
  "monte_carlo": {"target_pfa": 0.01, "trials": 500, "seed": 42, "mode": "iid_blocks"},
  "output": {"csv": "out.csv"}
})";

std::string error_of(const std::string &text)
{
    try
    {
        parse_config(text);
    }
    catch (const ConfigError &e)
    {
        return e.what();
    }
    return "";
}

std::filesystem::path scratch(const std::string &name)
{
    return std::filesystem::temp_directory_path() / ("userdet_test_" + name);
}

} // namespace

TEST_CASE("parse a config")
{
    const ExperimentConfig cfg = parse_config(kSample);
    CHECK(cfg.params.processing_gain == 15);
    CHECK(cfg.params.paths == 3);
    CHECK(cfg.snr_db == 12.0);
    CHECK(cfg.params.snr == doctest::Approx(db_to_linear(12.0)));
    CHECK(cfg.detectors == std::vector<DetectorId>{DetectorId::Mglrt, DetectorId::Genie});
    CHECK(cfg.sweep.snr_db == std::vector<double>{6, 9});
    CHECK(cfg.sweep.users == std::vector<int>{1, 3});
    CHECK(cfg.trials == 500);
    CHECK(cfg.seed == 42);
    CHECK(cfg.mode == NoiseMode::IidBlocks);
    CHECK(cfg.output.csv == "out.csv");
    CHECK(cfg.params.active_windows == cfg.params.windows);
    CHECK(cfg.effective_calibration_trials() == 10000);

    const SweepSpec spec = cfg.to_sweep_spec();
    CHECK(spec.grid().size() == 4);
    CHECK(spec.codes.size() >= 3);
    CHECK(spec.calibration_trials == 10000);
}

TEST_CASE("config errors name the line")
{
    const std::string unknown = "{\n  \"system\": {\n    \"processing_gain\": 15,\n    \"gain\": 3\n  }\n}";
    const std::string e1 = error_of(unknown);
    CHECK(e1.find("line 4") != std::string::npos);
    CHECK(e1.find("system.gain") != std::string::npos);

    const std::string wrong_type = "{\n  \"monte_carlo\": {\n    \"trials\": \"many\"\n  }\n}";
    const std::string e2 = error_of(wrong_type);
    CHECK(e2.find("line 3") != std::string::npos);
    CHECK(e2.find("trials") != std::string::npos);

    const std::string zero_pfa = "{\n  \"monte_carlo\": {\n    \"target_pfa\": 0\n  }\n}";
    const std::string e3 = error_of(zero_pfa);
    CHECK(e3.find("line 3") != std::string::npos);
    CHECK(e3.find("target_pfa") != std::string::npos);

    const std::string bad_pulse = "{\n  \"system\": {\n    \"processing_gain\": 15,\n    \"pulse_chips\": 9\n  }\n}";
    CHECK(error_of(bad_pulse).find("line 3") != std::string::npos);

    CHECK(error_of("{\"detectors\": [\"nope\"]}").find("nope") != std::string::npos);
    CHECK(!error_of("{\"system\": ").empty());
    CHECK(!error_of("[1, 2]").empty());
    CHECK(!error_of("{\"monte_carlo\": {\"mode\": \"stream\"}}").empty());
    CHECK_THROWS_AS(load_config(scratch("does_not_exist.json").string()), ConfigError);
}

TEST_CASE("config round trip")
{
    ExperimentConfig cfg = parse_config(kSample);
    cfg.code_mode = CodeMode::Explicit;
    cfg.codes = {gen_mseq(4, 1).signs(), gen_mseq(4, 2).signs(), gen_mseq(4, 3).signs()};
    cfg.sir_db = -3.0;
    cfg.params.sir = db_to_linear(-3.0);
    const std::string text = serialize_config(cfg);
    const ExperimentConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.codes == cfg.codes);
    CHECK(back.sir_db == -3.0);
    CHECK(back.to_sweep_spec().codes[1].signs() == cfg.codes[1]);
}

TEST_CASE("presets")
{
    CHECK(preset_names().size() == 4);
    for (const auto &name : preset_names())
    {
        const ExperimentConfig cfg = preset_config(name);
        CHECK_NOTHROW(cfg.validate());
        CHECK(cfg.params.processing_gain == 15);
        CHECK(cfg.params.samples_per_chip == 2);
        CHECK(cfg.params.pulse_chips == 4);
        CHECK(cfg.params.windows == 120);
        CHECK(cfg.target_pfa == 0.01);
        CHECK(cfg.sweep.snr_db.size() == 7);
        CHECK(cfg.output.csv == name + ".csv");
        CHECK(parse_config(serialize_config(cfg)).sweep.snr_db == cfg.sweep.snr_db);
    }
    CHECK(preset_config("fig2").sweep.alpha.size() == 4);
    CHECK(preset_config("fig3").sweep.active_windows == std::vector<int>{30, 60, 90, 120});
    CHECK(preset_config("fig4").sweep.sir_db == std::vector<double>{-10, 0, 10});
    CHECK_THROWS_AS(preset_config("fig5"), ConfigError);
}

TEST_CASE("threshold table round trip")
{
    ThresholdTable t;
    t.target_pfa = 0.01;
    t.seed = 9;
    ThresholdEntry a;
    a.detector = "mglrt";
    a.family = "snr_db=6;sir_db=0;fd=0.1;alpha=0.3;k_users=1;mode=faithful_stream";
    a.threshold = 0.1 + 0.2;
    a.n_calibration_trials = 10000;
    t.entries.push_back(a);
    a.detector = "normalized";
    a.log_te_max = -12.345678901234567;
    t.entries.push_back(a);

    const ThresholdTable back = parse_thresholds(serialize_thresholds(t));
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].threshold == t.entries[0].threshold);
    CHECK(!back.entries[0].log_te_max);
    CHECK(*back.entries[1].log_te_max == *t.entries[1].log_te_max);
    CHECK(back.seed == 9);
    CHECK(serialize_thresholds(back) == serialize_thresholds(t));

    const auto path = scratch("thresholds.json");
    save_thresholds(t, path.string());
    CHECK(serialize_thresholds(load_thresholds(path.string())) == serialize_thresholds(t));
    std::filesystem::remove(path);

    ThresholdTable few = t;
    few.entries[0].n_calibration_trials = 100;
    CHECK_THROWS_AS(parse_thresholds(serialize_thresholds(few)), ConfigError);
    CHECK_THROWS_AS(parse_thresholds("{}"), ConfigError);
}

TEST_CASE("result rows")
{
    CurveRecord r;
    r.detector = "genie";
    r.knobs.snr_db = 9;
    r.knobs.users = 3;
    r.knobs.active_windows = 60;
    r.threshold = 1.0 / 3.0;
    r.rate = 0.25;
    r.ci_lo = 0.2;
    r.ci_hi = 0.3;
    r.trials = 1000;
    r.seed = 7;
    r.code_fingerprint = "abc";

    const std::string header = csv_header();
    CHECK(std::count(header.begin(), header.end(), ',') == 13);
    const std::string row = csv_row(r);
    CHECK(std::count(row.begin(), row.end(), ',') == 13);
    CHECK(row.rfind("genie,9,0,0.10000000000000001,", 0) == 0);
    CHECK(std::stod(row.substr(row.find("faithful_stream,") + 16)) == r.threshold);
    CHECK(jsonl_row(r).find("\"hypothesis\":\"H1\"") != std::string::npos);
    CHECK(jsonl_row(r).find("\"code_fingerprint\":\"abc\"") != std::string::npos);

    // Resume bookkeeping: a point counts once every detector has a row.
    const auto path = scratch("rows.csv");
    {
        std::ofstream out(path);
        out << header << "\n" << row << "\n";
        CurveRecord m = r;
        m.detector = "mglrt";
        m.knobs.snr_db = 12;
        out << csv_row(m) << "\n";
        out << "mglrt,15,0,0.1"; // truncated
    }
    const auto both = completed_points(path.string(), {DetectorId::Mglrt, DetectorId::Genie});
    CHECK(both.empty());
    const auto genie = completed_points(path.string(), {DetectorId::Genie});
    CHECK(genie.size() == 1);
    CHECK(genie.count(r.knobs.key()) == 1);
    CHECK(completed_points(path.string(), {DetectorId::Mglrt}).size() == 1);
    std::filesystem::remove(path);
    CHECK(completed_points(path.string(), {DetectorId::Mglrt}).empty());
}
