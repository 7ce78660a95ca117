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

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace userdet
{

using nlohmann::json;

namespace
{

const std::map<std::string, std::vector<std::string>> kSections = {
    {"system",
     {"processing_gain", "samples_per_chip", "window_symbols", "pulse_chips", "windows", "users", "rolloff",
      "doppler", "noise_level", "snr_db", "sir_db", "active_windows", "paths", "pulse_fine_factor"}},
    {"sweep", {"snr_db", "sir_db", "fd", "alpha", "k_users", "q_active"}},
    {"monte_carlo", {"target_pfa", "calibration_trials", "trials", "seed", "mode", "te_max_safety"}},
    {"codes", {"mode", "explicit", "redraw_per_trial"}},
    {"output", {"csv", "jsonl", "thresholds"}},
};

int line_at(const std::string &text, std::size_t pos)
{
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(std::min(pos, text.size())), '\n'));
}

// Line of "key" inside "section" (or anywhere when section is empty);
// 0 when it cannot be found.
int key_line(const std::string &text, const std::string &section, const std::string &key)
{
    std::size_t from = 0;
    if (!section.empty())
    {
        const std::size_t s = text.find('"' + section + '"');
        if (s == std::string::npos)
            return 0;
        from = s + section.size() + 2;
    }
    std::size_t k = text.find('"' + key + '"', from);
    if (k == std::string::npos && !section.empty())
        k = text.find('"' + key + '"');
    return k == std::string::npos ? 0 : line_at(text, k);
}

[[noreturn]] void fail_at(const std::string &text, const std::string &section, const std::string &key,
                          const std::string &msg)
{
    const int line = key_line(text, section, key);
    const std::string where = line > 0 ? "config line " + std::to_string(line) + ": " : "config: ";
    const std::string name = section.empty() ? key : section + "." + key;
    throw ConfigError(where + name + ": " + msg);
}

class Reader
{
  public:
    Reader(const std::string &text, const json &root) : text_(text), root_(root) {}

    const json *section(const std::string &name) const
    {
        if (!root_.contains(name))
            return nullptr;
        const json &s = root_.at(name);
        if (!s.is_object())
            fail_at(text_, "", name, "expected an object");
        return &s;
    }

    template <class T> void integer(const json *sec, const std::string &sname, const std::string &key, T &out) const
    {
        if (!sec || !sec->contains(key))
            return;
        const json &v = sec->at(key);
        if (!v.is_number_integer())
            fail_at(text_, sname, key, "expected an integer");
        out = v.get<T>();
    }

    void number(const json *sec, const std::string &sname, const std::string &key, double &out) const
    {
        if (!sec || !sec->contains(key))
            return;
        const json &v = sec->at(key);
        if (!v.is_number())
            fail_at(text_, sname, key, "expected a number");
        out = v.get<double>();
    }

    void boolean(const json *sec, const std::string &sname, const std::string &key, bool &out) const
    {
        if (!sec || !sec->contains(key))
            return;
        const json &v = sec->at(key);
        if (!v.is_boolean())
            fail_at(text_, sname, key, "expected true or false");
        out = v.get<bool>();
    }

    void string(const json *sec, const std::string &sname, const std::string &key, std::string &out) const
    {
        if (!sec || !sec->contains(key))
            return;
        const json &v = sec->at(key);
        if (!v.is_string())
            fail_at(text_, sname, key, "expected a string");
        out = v.get<std::string>();
    }

    void numbers(const json *sec, const std::string &sname, const std::string &key, std::vector<double> &out) const
    {
        if (!sec || !sec->contains(key))
            return;
        const json &v = sec->at(key);
        if (!v.is_array() || v.empty())
            fail_at(text_, sname, key, "expected a nonempty array of numbers");
        out.clear();
        for (const auto &x : v)
        {
            if (!x.is_number())
                fail_at(text_, sname, key, "expected a nonempty array of numbers");
            out.push_back(x.get<double>());
        }
    }

    void integers(const json *sec, const std::string &sname, const std::string &key, std::vector<int> &out) const
    {
        if (!sec || !sec->contains(key))
            return;
        const json &v = sec->at(key);
        if (!v.is_array() || v.empty())
            fail_at(text_, sname, key, "expected a nonempty array of integers");
        out.clear();
        for (const auto &x : v)
        {
            if (!x.is_number_integer())
                fail_at(text_, sname, key, "expected a nonempty array of integers");
            out.push_back(x.get<int>());
        }
    }

  private:
    const std::string &text_;
    const json &root_;
};

void reject_unknown_keys(const std::string &text, const json &root)
{
    if (!root.is_object())
        throw ConfigError("config line 1: top level must be an object");
    for (const auto &[name, value] : root.items())
    {
        if (name == "detectors")
            continue;
        const auto it = kSections.find(name);
        if (it == kSections.end())
            fail_at(text, "", name, "unknown key");
        if (!value.is_object())
            fail_at(text, "", name, "expected an object");
        for (const auto &[key, unused] : value.items())
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                fail_at(text, name, key, "unknown key");
    }
}

// Config keys named in a SystemParams::validate message, in order.
std::vector<std::string> keys_from_validation(const std::string &msg)
{
    const std::string prefix = "invalid system parameters: ";
    const std::string rest = msg.rfind(prefix, 0) == 0 ? msg.substr(prefix.size()) : msg;
    std::vector<std::string> keys;
    std::string word;
    for (std::size_t i = 0; i <= rest.size(); ++i)
    {
        const char c = i < rest.size() ? rest[i] : ' ';
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
        {
            word += c;
            continue;
        }
        if (word == "snr" || word == "sir")
            word += "_db";
        if (!word.empty())
            keys.push_back(word);
        word.clear();
    }
    return keys;
}

std::string fmt17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void validate_with_lines(const ExperimentConfig &cfg, const std::string &text)
{
    try
    {
        cfg.validate();
    }
    catch (const ConfigError &e)
    {
        // "config: key: what" -> add the key's line when it is in the text.
        const std::string msg = e.what();
        const std::string prefix = "config: ";
        const std::size_t colon = msg.find(':', prefix.size());
        if (msg.rfind(prefix, 0) != 0 || colon == std::string::npos)
            throw;
        const int line = key_line(text, "", msg.substr(prefix.size(), colon - prefix.size()));
        if (line == 0)
            throw;
        throw ConfigError("config line " + std::to_string(line) + ": " + msg.substr(prefix.size()));
    }
    catch (const ParameterError &e)
    {
        const std::string msg = e.what();
        int line = 0;
        for (const auto &key : keys_from_validation(msg))
            if ((line = key_line(text, "system", key)) > 0)
                break;
        throw ConfigError((line > 0 ? "config line " + std::to_string(line) + ": " : "config: ") + msg);
    }
}

} // namespace

std::string to_string(CodeMode mode)
{
    switch (mode)
    {
    case CodeMode::Auto: return "auto";
    case CodeMode::Random: return "random";
    case CodeMode::Explicit: return "explicit";
    }
    return "?";
}

CodeMode code_mode_from_string(const std::string &s)
{
    if (s == "auto")
        return CodeMode::Auto;
    if (s == "random")
        return CodeMode::Random;
    if (s == "explicit")
        return CodeMode::Explicit;
    throw ParameterError("unknown code mode '" + s + "' (expected auto, random or explicit)");
}

long ExperimentConfig::effective_calibration_trials() const
{
    if (calibration_trials > 0)
        return calibration_trials;
    return std::max(10000L, static_cast<long>(std::ceil(100.0 / target_pfa)));
}

void ExperimentConfig::validate() const
{
    auto bad = [](const std::string &key, const std::string &what)
    { throw ConfigError("config: " + key + ": " + what); };
    if (!(target_pfa > 0.0 && target_pfa < 1.0))
        bad("target_pfa", "must lie in (0, 1)");
    if (trials < 1)
        bad("trials", "must be >= 1");
    if (calibration_trials != 0 && static_cast<double>(calibration_trials) < 10.0 / target_pfa - 1e-9)
        bad("calibration_trials", "must be >= 10 / target_pfa");
    if (!(te_max_safety > 0.0) || !std::isfinite(te_max_safety))
        bad("te_max_safety", "must be positive");
    if (pulse_fine_factor < 0)
        bad("pulse_fine_factor", "must be >= 0");
    if (detectors.empty())
        bad("detectors", "list is empty");
    if (code_mode == CodeMode::Explicit)
    {
        if (redraw_codes_per_trial)
            bad("redraw_per_trial", "cannot redraw explicit codes");
        for (const auto &c : codes)
        {
            if (static_cast<int>(c.size()) != params.processing_gain)
                bad("explicit", "every code needs processing_gain entries");
            for (int s : c)
                if (s != 1 && s != -1)
                    bad("explicit", "code entries must be +1 or -1");
        }
    }
    else if (!codes.empty())
    {
        bad("explicit", "codes given but codes.mode is not 'explicit'");
    }
    to_sweep_spec().validate();
}

SweepSpec ExperimentConfig::to_sweep_spec() const
{
    SweepSpec s;
    s.base = params;
    s.fine_per_chip = pulse_fine_factor;
    s.snr_db = sweep.snr_db.empty() ? std::vector<double>{snr_db} : sweep.snr_db;
    s.sir_db = sweep.sir_db.empty() ? std::vector<double>{sir_db} : sweep.sir_db;
    s.fd = sweep.fd.empty() ? std::vector<double>{params.doppler} : sweep.fd;
    s.alpha = sweep.alpha.empty() ? std::vector<double>{params.rolloff} : sweep.alpha;
    s.users = sweep.users.empty() ? std::vector<int>{params.users} : sweep.users;
    s.active_windows = sweep.active_windows.empty() ? std::vector<int>{params.active_windows} : sweep.active_windows;
    s.mode = mode;
    s.detectors = detectors;
    s.trials = trials;
    s.calibration_trials = effective_calibration_trials();
    s.target_pfa = target_pfa;
    s.te_max_safety = te_max_safety;
    s.seed = seed;
    s.redraw_codes = redraw_codes_per_trial;

    const int max_users = *std::max_element(s.users.begin(), s.users.end());
    if (code_mode == CodeMode::Explicit)
    {
        if (static_cast<int>(codes.size()) < max_users)
            throw ConfigError("config: codes.explicit: fewer codes than the largest user count");
        for (const auto &c : codes)
            s.codes.push_back(SpreadingCode::from_signs(c));
    }
    else if (!redraw_codes_per_trial)
    {
        s.codes = draw_codes(max_users, params.processing_gain, seed, code_mode == CodeMode::Random);
    }
    return s;
}

ExperimentConfig parse_config(const std::string &text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("config line " + std::to_string(line_at(text, e.byte > 0 ? e.byte - 1 : 0)) +
                          ": malformed JSON (" + e.what() + ")");
    }
    reject_unknown_keys(text, root);

    ExperimentConfig cfg;
    Reader rd(text, root);
    SystemParams &p = cfg.params;

    const json *sys = rd.section("system");
    rd.integer(sys, "system", "processing_gain", p.processing_gain);
    rd.integer(sys, "system", "samples_per_chip", p.samples_per_chip);
    rd.integer(sys, "system", "window_symbols", p.window_symbols);
    rd.integer(sys, "system", "pulse_chips", p.pulse_chips);
    rd.integer(sys, "system", "windows", p.windows);
    rd.integer(sys, "system", "users", p.users);
    rd.integer(sys, "system", "active_windows", p.active_windows);
    rd.integer(sys, "system", "paths", p.paths);
    rd.integer(sys, "system", "pulse_fine_factor", cfg.pulse_fine_factor);
    rd.number(sys, "system", "rolloff", p.rolloff);
    rd.number(sys, "system", "doppler", p.doppler);
    rd.number(sys, "system", "noise_level", p.noise_level);
    rd.number(sys, "system", "snr_db", cfg.snr_db);
    rd.number(sys, "system", "sir_db", cfg.sir_db);
    p.snr = db_to_linear(cfg.snr_db);
    p.sir = db_to_linear(cfg.sir_db);
    if (!(sys && sys->contains("active_windows")))
        p.active_windows = p.windows;

    if (root.contains("detectors"))
    {
        const json &d = root.at("detectors");
        if (!d.is_array())
            fail_at(text, "", "detectors", "expected an array of detector names");
        cfg.detectors.clear();
        for (const auto &x : d)
        {
            if (!x.is_string())
                fail_at(text, "", "detectors", "expected an array of detector names");
            try
            {
                cfg.detectors.push_back(detector_from_string(x.get<std::string>()));
            }
            catch (const ParameterError &e)
            {
                fail_at(text, "", "detectors", e.what());
            }
        }
    }

    const json *sw = rd.section("sweep");
    rd.numbers(sw, "sweep", "snr_db", cfg.sweep.snr_db);
    rd.numbers(sw, "sweep", "sir_db", cfg.sweep.sir_db);
    rd.numbers(sw, "sweep", "fd", cfg.sweep.fd);
    rd.numbers(sw, "sweep", "alpha", cfg.sweep.alpha);
    rd.integers(sw, "sweep", "k_users", cfg.sweep.users);
    rd.integers(sw, "sweep", "q_active", cfg.sweep.active_windows);

    const json *mc = rd.section("monte_carlo");
    rd.number(mc, "monte_carlo", "target_pfa", cfg.target_pfa);
    rd.integer(mc, "monte_carlo", "calibration_trials", cfg.calibration_trials);
    rd.integer(mc, "monte_carlo", "trials", cfg.trials);
    rd.number(mc, "monte_carlo", "te_max_safety", cfg.te_max_safety);
    if (mc && mc->contains("seed"))
    {
        const json &v = mc->at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail_at(text, "monte_carlo", "seed", "expected a nonnegative integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    std::string mode = to_string(cfg.mode);
    rd.string(mc, "monte_carlo", "mode", mode);
    try
    {
        cfg.mode = noise_mode_from_string(mode);
    }
    catch (const ParameterError &e)
    {
        fail_at(text, "monte_carlo", "mode", e.what());
    }

    const json *cs = rd.section("codes");
    std::string cmode = to_string(cfg.code_mode);
    rd.string(cs, "codes", "mode", cmode);
    try
    {
        cfg.code_mode = code_mode_from_string(cmode);
    }
    catch (const ParameterError &e)
    {
        fail_at(text, "codes", "mode", e.what());
    }
    rd.boolean(cs, "codes", "redraw_per_trial", cfg.redraw_codes_per_trial);
    if (cs && cs->contains("explicit"))
    {
        const json &v = cs->at("explicit");
        if (!v.is_array())
            fail_at(text, "codes", "explicit", "expected an array of +-1 arrays");
        for (const auto &c : v)
        {
            if (!c.is_array())
                fail_at(text, "codes", "explicit", "expected an array of +-1 arrays");
            std::vector<int> signs;
            for (const auto &x : c)
            {
                if (!x.is_number_integer())
                    fail_at(text, "codes", "explicit", "code entries must be +1 or -1");
                signs.push_back(x.get<int>());
            }
            cfg.codes.push_back(std::move(signs));
        }
    }

    const json *out = rd.section("output");
    rd.string(out, "output", "csv", cfg.output.csv);
    rd.string(out, "output", "jsonl", cfg.output.jsonl);
    rd.string(out, "output", "thresholds", cfg.output.thresholds);

    validate_with_lines(cfg, text);
    return cfg;
}

ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig &cfg)
{
    const SystemParams &p = cfg.params;
    json j;
    j["system"] = {{"processing_gain", p.processing_gain}, {"samples_per_chip", p.samples_per_chip},
                   {"window_symbols", p.window_symbols},   {"pulse_chips", p.pulse_chips},
                   {"windows", p.windows},                 {"users", p.users},
                   {"rolloff", p.rolloff},                 {"doppler", p.doppler},
                   {"noise_level", p.noise_level},         {"snr_db", cfg.snr_db},
                   {"sir_db", cfg.sir_db},        {"active_windows", p.active_windows},
                   {"paths", p.paths},                     {"pulse_fine_factor", cfg.pulse_fine_factor}};
    json dets = json::array();
    for (DetectorId d : cfg.detectors)
        dets.push_back(to_string(d));
    j["detectors"] = dets;
    json sw = json::object();
    if (!cfg.sweep.snr_db.empty())
        sw["snr_db"] = cfg.sweep.snr_db;
    if (!cfg.sweep.sir_db.empty())
        sw["sir_db"] = cfg.sweep.sir_db;
    if (!cfg.sweep.fd.empty())
        sw["fd"] = cfg.sweep.fd;
    if (!cfg.sweep.alpha.empty())
        sw["alpha"] = cfg.sweep.alpha;
    if (!cfg.sweep.users.empty())
        sw["k_users"] = cfg.sweep.users;
    if (!cfg.sweep.active_windows.empty())
        sw["q_active"] = cfg.sweep.active_windows;
    j["sweep"] = sw;
    j["monte_carlo"] = {{"target_pfa", cfg.target_pfa},       {"calibration_trials", cfg.calibration_trials},
                        {"trials", cfg.trials},               {"seed", cfg.seed},
                        {"mode", to_string(cfg.mode)},        {"te_max_safety", cfg.te_max_safety}};
    j["codes"] = {{"mode", to_string(cfg.code_mode)}, {"redraw_per_trial", cfg.redraw_codes_per_trial}};
    if (!cfg.codes.empty())
        j["codes"]["explicit"] = cfg.codes;
    j["output"] = {{"csv", cfg.output.csv}, {"jsonl", cfg.output.jsonl}, {"thresholds", cfg.output.thresholds}};
    return j.dump(2) + "\n";
}

const std::vector<std::string> &preset_names()
{
    static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4"};
    return names;
}

ExperimentConfig preset_config(const std::string &name)
{
    ExperimentConfig cfg;
    SystemParams &p = cfg.params;
    p.processing_gain = 15;
    p.samples_per_chip = 2;
    p.window_symbols = 2;
    p.pulse_chips = 4;
    p.windows = 120;
    p.active_windows = 120;
    p.paths = 3;
    p.rolloff = 0.3;
    cfg.sir_db = 0.0;
    p.doppler = 0.1;
    p.users = 3;
    cfg.target_pfa = 0.01;
    cfg.trials = 1000;
    cfg.detectors = {DetectorId::Mglrt};
    cfg.sweep.snr_db = {6, 9, 12, 15, 18, 21, 24};

    if (name == "fig1")
    {
        cfg.detectors = {DetectorId::Mglrt, DetectorId::Genie};
        cfg.sweep.users = {1, 3, 5};
        cfg.sweep.fd = {0.01, 0.1};
    }
    else if (name == "fig2")
    {
        cfg.sweep.alpha = {0.1, 0.3, 0.5, 0.7};
    }
    else if (name == "fig3")
    {
        cfg.sweep.active_windows = {30, 60, 90, 120};
    }
    else if (name == "fig4")
    {
        cfg.sweep.sir_db = {-10, 0, 10};
    }
    else
    {
        throw ConfigError("unknown preset '" + name + "' (expected fig1, fig2, fig3 or fig4)");
    }
    cfg.output.csv = name + ".csv";
    cfg.output.thresholds = name + "_thresholds.json";
    return cfg;
}

// ---- result files ----------------------------------------------------------

std::string csv_header()
{
    return "detector,snr_db,sir_db,fd,alpha,k_users,q_active,mode,threshold,rate,ci_lo,ci_hi,trials,seed";
}

std::string csv_row(const CurveRecord &r)
{
    const ScenarioKnobs &k = r.knobs;
    return r.detector + "," + fmt17(k.snr_db) + "," + fmt17(k.sir_db) + "," + fmt17(k.fd) + "," + fmt17(k.alpha) +
           "," + std::to_string(k.users) + "," + std::to_string(k.active_windows) + "," + to_string(k.mode) + "," +
           fmt17(r.threshold) + "," + fmt17(r.rate) + "," + fmt17(r.ci_lo) + "," + fmt17(r.ci_hi) + "," +
           std::to_string(r.trials) + "," + std::to_string(r.seed);
}

std::string jsonl_row(const CurveRecord &r)
{
    const ScenarioKnobs &k = r.knobs;
    json j = {{"detector", r.detector}, {"snr_db", k.snr_db},        {"sir_db", k.sir_db},
              {"fd", k.fd},             {"alpha", k.alpha},          {"k_users", k.users},
              {"q_active", k.active_windows},                        {"mode", to_string(k.mode)},
              {"threshold", r.threshold}, {"rate", r.rate},          {"ci_lo", r.ci_lo},
              {"ci_hi", r.ci_hi},       {"trials", r.trials},        {"seed", r.seed},
              {"code_fingerprint", r.code_fingerprint},              {"hypothesis", r.hypothesis}};
    return j.dump();
}

std::set<std::string> completed_points(const std::string &csv_path, const std::vector<DetectorId> &detectors)
{
    std::set<std::string> done;
    std::ifstream in(csv_path);
    if (!in)
        return done;
    std::map<std::string, std::set<std::string>> seen;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty() || line.rfind("detector,", 0) == 0)
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() != 14)
            continue;
        try
        {
            ScenarioKnobs k;
            k.snr_db = std::stod(f[1]);
            k.sir_db = std::stod(f[2]);
            k.fd = std::stod(f[3]);
            k.alpha = std::stod(f[4]);
            k.users = std::stoi(f[5]);
            k.active_windows = std::stoi(f[6]);
            k.mode = noise_mode_from_string(f[7]);
            seen[k.key()].insert(f[0]);
        }
        catch (const std::exception &)
        {
            continue; // truncated trailing row from an interrupted run
        }
    }
    for (const auto &[key, dets] : seen)
    {
        bool all = true;
        for (DetectorId d : detectors)
            all = all && dets.count(to_string(d));
        if (all)
            done.insert(key);
    }
    return done;
}

std::string serialize_thresholds(const ThresholdTable &table)
{
    json entries = json::array();
    for (const auto &e : table.entries)
    {
        json j = {{"detector", e.detector},
                  {"family", e.family},
                  {"threshold", e.threshold},
                  {"n_calibration_trials", e.n_calibration_trials},
                  {"quantile_method", e.quantile_method}};
        if (e.log_te_max)
            j["log_te_max"] = *e.log_te_max;
        entries.push_back(j);
    }
    json root = {{"target_pfa", table.target_pfa}, {"seed", table.seed}, {"entries", entries}};
    return root.dump(2) + "\n";
}

ThresholdTable parse_thresholds(const std::string &text)
{
    ThresholdTable t;
    try
    {
        const json root = json::parse(text);
        t.target_pfa = root.at("target_pfa").get<double>();
        t.seed = root.at("seed").get<std::uint64_t>();
        for (const auto &j : root.at("entries"))
        {
            ThresholdEntry e;
            e.detector = j.at("detector").get<std::string>();
            e.family = j.at("family").get<std::string>();
            e.threshold = j.at("threshold").get<double>();
            e.n_calibration_trials = j.at("n_calibration_trials").get<long>();
            e.quantile_method = j.at("quantile_method").get<std::string>();
            if (j.contains("log_te_max"))
                e.log_te_max = j.at("log_te_max").get<double>();
            if (!std::isfinite(e.threshold))
                throw ConfigError("threshold table: non-finite threshold for " + e.detector);
            if (static_cast<double>(e.n_calibration_trials) < 10.0 / t.target_pfa - 1e-9)
                throw ConfigError("threshold table: too few calibration trials for " + e.detector);
            t.entries.push_back(std::move(e));
        }
    }
    catch (const json::exception &e)
    {
        throw ConfigError(std::string("threshold table: ") + e.what());
    }
    return t;
}

ThresholdTable load_thresholds(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("threshold table: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_thresholds(ss.str());
}

void save_thresholds(const ThresholdTable &table, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("threshold table: cannot write '" + path + "'");
    out << serialize_thresholds(table);
}

} // namespace userdet
