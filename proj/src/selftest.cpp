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

#include "userdet/selftest.hpp"

#include "userdet/montecarlo.hpp"

#include <cmath>
#include <cstdio>

namespace userdet
{

namespace
{

SystemParams toy_params(int users)
{
    SystemParams p;
    p.processing_gain = 4;
    p.samples_per_chip = 1;
    p.window_symbols = 2;
    p.pulse_chips = 1;
    p.windows = 16;
    p.active_windows = 16;
    p.users = users;
    p.paths = 2;
    p.snr = db_to_linear(10.0);
    return p;
}

ScenarioConfig toy_config(int users, NoiseMode mode, Hypothesis h, std::mt19937_64 &rng)
{
    ScenarioConfig cfg;
    cfg.params = toy_params(users);
    cfg.mode = mode;
    cfg.hypothesis = h;
    cfg.fine_per_chip = 64;
    for (int k = 0; k < users; ++k)
        cfg.codes.push_back(random_code(cfg.params.processing_gain, rng));
    return cfg;
}

std::string fmt(const char *f, double a, double b = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

SelftestCheck check_fast_vs_direct(const SelftestOptions &opt)
{
    SelftestCheck c{"fast-vs-direct statistic", true, ""};
    std::mt19937_64 rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(StreamPurpose::Check), 1}));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
    {
        ScenarioConfig cfg = toy_config(1 + i % 3, NoiseMode::IidBlocks, i % 2 ? Hypothesis::H1 : Hypothesis::H0, rng);
        for (auto &code : cfg.codes)
            code = random_code(cfg.params.processing_gain, rng);
        const ScenarioModel model(cfg);
        const Trial t = model.simulate(rng);
        CodeGeometry g = model.geometry();
        if (opt.corrupt_geometry)
            g.ubar.col(0).swap(g.ubar.col(g.ubar.cols() - 1));
        const double fast = log_mglrt_fast(t.data, g);
        const double direct = log_mglrt_direct(t.data, model.geometry());
        worst = std::max(worst, std::abs(fast - direct) / std::abs(direct));
    }
    c.passed = worst <= 1e-8;
    c.detail = fmt("max relative difference %.3g over 20 instances", worst);
    return c;
}

SelftestCheck check_assembly(const SelftestOptions &opt)
{
    SelftestCheck c{"assembly-vs-convolution", true, ""};
    std::mt19937_64 rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(StreamPurpose::Check), 2}));
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
    {
        ScenarioConfig cfg = toy_config(1 + i % 3, i % 2 ? NoiseMode::IidBlocks : NoiseMode::FaithfulStream,
                                        Hypothesis::H1, rng);
        cfg.noise_free = true;
        cfg.params.active_windows = 7 + i;
        const ScenarioModel model(cfg);
        const Trial t = model.simulate(rng);
        const ComplexMatrix oracle = chip_conv_oracle(model, t.realization, t.symbols);
        worst = std::max(worst, (t.data - oracle).cwiseAbs().maxCoeff());
    }
    c.passed = worst <= 1e-10;
    c.detail = fmt("max abs difference %.3g over 10 scenarios", worst);
    return c;
}

SelftestCheck check_jakes(const SelftestOptions &opt)
{
    SelftestCheck c{"Jakes lag-1 autocorrelation", true, ""};
    const double fd = 0.1;
    const int span = 32;
    const int draws = 20000;
    std::mt19937_64 rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(StreamPurpose::Check), 3}));
    const GainProcessSampler sampler(span, fd);
    std::vector<double> products;
    for (int d = 0; d < draws; ++d)
    {
        // One product per independent draw keeps the samples uncorrelated.
        const ComplexVector a = sampler.sample(rng);
        products.push_back((a(span / 2 + 1) * std::conj(a(span / 2))).real());
    }
    double mean = 0.0, sq = 0.0;
    for (double v : products)
        mean += v;
    mean /= static_cast<double>(products.size());
    for (double v : products)
        sq += (v - mean) * (v - mean);
    const double se = std::sqrt(sq / static_cast<double>(products.size() - 1) / static_cast<double>(products.size()));
    const double expected = jakes_autocorr(1.0, fd);
    c.passed = std::abs(mean - expected) <= 4.0 * se;
    c.detail = fmt("empirical %.4f vs J0 %.4f", mean, expected);
    return c;
}

SelftestCheck check_pfa(const SelftestOptions &opt)
{
    SelftestCheck c{"Pfa self-consistency", true, ""};
    std::mt19937_64 rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(StreamPurpose::Check), 4}));
    const ScenarioModel model(toy_config(2, NoiseMode::IidBlocks, Hypothesis::H0, rng));
    const double pfa = 0.05;
    const long n = 2000;
    BatchRequest req;
    req.detectors = {DetectorId::Mglrt};
    req.trials = n;
    req.threads = opt.threads;
    req.stream_seed = derive_seed(opt.seed, {static_cast<std::uint64_t>(StreamPurpose::Calibration)});
    const double eta = quantile_type7(run_trials(model, req).stats[0], 1.0 - pfa);
    req.stream_seed = derive_seed(opt.seed, {static_cast<std::uint64_t>(StreamPurpose::Rate)});
    const TrialBatch fresh = run_trials(model, req);
    long hits = 0;
    for (double v : fresh.stats[0])
        hits += v > eta;
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    // Both the quantile and the fresh count carry binomial error.
    const double se = std::sqrt(2.0 * pfa * (1.0 - pfa) / static_cast<double>(n));
    c.passed = std::abs(p - pfa) <= 4.0 * se;
    c.detail = fmt("empirical Pfa %.4f at target %.2f", p, pfa);
    return c;
}

} // namespace

std::vector<SelftestCheck> run_selftest(const SelftestOptions &options)
{
    std::vector<SelftestCheck> out;
    auto guarded = [&](const char *name, SelftestCheck (*fn)(const SelftestOptions &))
    {
        try
        {
            out.push_back(fn(options));
        }
        catch (const std::exception &e)
        {
            out.push_back({name, false, std::string("exception: ") + e.what()});
        }
    };
    guarded("fast-vs-direct statistic", check_fast_vs_direct);
    guarded("assembly-vs-convolution", check_assembly);
    guarded("Jakes lag-1 autocorrelation", check_jakes);
    guarded("Pfa self-consistency", check_pfa);
    return out;
}

} // namespace userdet
