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

#include "userdet/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace userdet
{

std::string to_string(NoiseMode mode)
{
    return mode == NoiseMode::FaithfulStream ? "faithful_stream" : "iid_blocks";
}

NoiseMode noise_mode_from_string(const std::string &s)
{
    if (s == "faithful_stream")
        return NoiseMode::FaithfulStream;
    if (s == "iid_blocks")
        return NoiseMode::IidBlocks;
    throw ParameterError("unknown noise mode '" + s + "' (expected faithful_stream or iid_blocks)");
}

Amplitudes amplitudes_from_snr(const SystemParams &params)
{
    if (!(params.snr > 0.0) || !(params.sir > 0.0) || !(params.noise_level > 0.0) || params.windows < 1)
        throw ParameterError("amplitudes_from_snr: snr, sir, noise level and window count must be positive");
    Amplitudes a;
    a.user0 = std::sqrt(params.snr * params.noise_level / params.windows);
    a.interferer = a.user0 / std::sqrt(params.sir);
    return a;
}

SymbolTable draw_symbols(int users, const EpochLayout &layout, std::mt19937_64 &rng)
{
    std::bernoulli_distribution coin(0.5);
    SymbolTable t;
    t.layout = layout;
    t.symbols.assign(static_cast<std::size_t>(users), std::vector<int>(static_cast<std::size_t>(layout.size())));
    for (auto &row : t.symbols)
        for (auto &b : row)
            b = coin(rng) ? 1 : -1;
    return t;
}

ScenarioModel::ScenarioModel(ScenarioConfig config)
    : config_(std::move(config)),
      psi_(ChipPulse::make(config_.params.rolloff, config_.params.pulse_chips,
                           config_.fine_per_chip > 0 ? config_.fine_per_chip : 64 * config_.params.samples_per_chip))
{
    const SystemParams &p = config_.params;
    p.validate();
    if (config_.codes.size() < static_cast<std::size_t>(p.users))
        throw ParameterError("scenario: fewer spreading codes than users");
    for (int k = 0; k < p.users; ++k)
        codebooks_.push_back(UserCodebook::build(config_.codes[static_cast<std::size_t>(k)], p));
    geometry_ = detector_geometry(config_.codes[0], p);
    noise_cov_ = noise_covariance(p, psi_);
    noise_chol_ = cholesky_lower(noise_cov_);
    amplitudes_ = amplitudes_from_snr(p);
    if (config_.mode == NoiseMode::FaithfulStream)
    {
        stream_.emplace((p.windows + p.window_symbols - 1) * p.samples_per_symbol(), p, psi_);
        gains_.emplace(layout().size(), p.doppler);
    }
}

EpochLayout ScenarioModel::layout() const
{
    return config_.mode == NoiseMode::FaithfulStream ? EpochLayout::shared(config_.params)
                                                     : EpochLayout::independent(config_.params);
}

bool ScenarioModel::user0_present(int q) const
{
    const SystemParams &p = config_.params;
    return config_.hypothesis == Hypothesis::H1 && q > p.windows - p.active_windows;
}

ChannelRealization ScenarioModel::draw_realization(std::mt19937_64 &rng,
                                                   const std::vector<std::vector<double>> *fixed_delays) const
{
    const SystemParams &p = config_.params;
    ChannelRealization real;
    real.layout = layout();
    const int slots = real.layout.size();
    for (int k = 0; k < p.users; ++k)
    {
        UserChannel u;
        u.amplitude = k == 0 ? amplitudes_.user0 : amplitudes_.interferer;
        if (fixed_delays)
        {
            u.delays = fixed_delays->at(static_cast<std::size_t>(k));
            if (u.delays.size() != static_cast<std::size_t>(p.paths))
                throw ParameterError("scenario: fixed delay vector has the wrong path count");
        }
        else
        {
            u.delays = draw_path_delays(rng, p);
        }
        for (int path = 0; path < p.paths; ++path)
        {
            if (gains_)
            {
                u.gains.push_back(gains_->sample(rng));
            }
            else
            {
                // Independent windows: every slot is its own draw, so each
                // column is exactly Gaussian with the analytic covariance.
                ComplexVector g(slots);
                for (int s = 0; s < slots; ++s)
                    g(s) = standard_complex_normal(rng);
                u.gains.push_back(std::move(g));
            }
        }
        u.responses.resize(p.signal_dim(), p.paths);
        for (int path = 0; path < p.paths; ++path)
            u.responses.col(path) = pulse_response(u.delays[static_cast<std::size_t>(path)], psi_, p);
        real.users.push_back(std::move(u));
    }
    return real;
}

ComplexMatrix ScenarioModel::draw_noise(std::mt19937_64 &rng) const
{
    const SystemParams &p = config_.params;
    const int n = p.window_length();
    ComplexMatrix noise(n, p.windows);
    if (stream_)
    {
        const ComplexVector s = stream_->sample(rng);
        for (int q = 0; q < p.windows; ++q)
            noise.col(q) = s.segment(static_cast<Eigen::Index>(q) * p.samples_per_symbol(), n);
        return noise;
    }
    ComplexMatrix z(n, p.windows);
    for (int q = 0; q < p.windows; ++q)
        for (int i = 0; i < n; ++i)
            z(i, q) = standard_complex_normal(rng);
    noise.noalias() = noise_chol_.triangularView<Eigen::Lower>() * z;
    return noise;
}

Trial ScenarioModel::simulate(std::mt19937_64 &rng, const std::vector<std::vector<double>> *fixed_delays) const
{
    Trial t;
    t.realization = draw_realization(rng, fixed_delays);
    t.symbols = draw_symbols(config_.params.users, layout(), rng);
    t.data = assemble_R(*this, t.realization, t.symbols, rng);
    return t;
}

GenieCovariances ScenarioModel::covariances(const ChannelRealization &realization) const
{
    return analytic_covariances(realization, codebooks_, noise_cov_, config_.params);
}

ComplexMatrix assemble_signal(const ScenarioModel &model, const ChannelRealization &realization,
                              const SymbolTable &symbols)
{
    const SystemParams &p = model.params();
    const int n = p.window_length();
    ComplexMatrix R = ComplexMatrix::Zero(n, p.windows);
    const EpochLayout &layout = realization.layout;

    // g_k for every slot, built once: A_k * responses * gains(slot).
    std::vector<std::vector<ComplexVector>> g(static_cast<std::size_t>(p.users));
    for (int k = 0; k < p.users; ++k)
    {
        const UserChannel &u = realization.users[static_cast<std::size_t>(k)];
        const ComplexMatrix resp = u.responses.cast<Complex>();
        auto &gk = g[static_cast<std::size_t>(k)];
        gk.resize(static_cast<std::size_t>(layout.size()));
        ComplexVector a(p.paths);
        for (int s = 0; s < layout.size(); ++s)
        {
            for (int path = 0; path < p.paths; ++path)
                a(path) = u.gains[static_cast<std::size_t>(path)](s);
            gk[static_cast<std::size_t>(s)] = u.amplitude * (resp * a);
        }
    }

    if (layout.per_window)
    {
        // Every slot feeds exactly one window: apply C_ell directly.
        for (int q = 1; q <= p.windows; ++q)
        {
            ComplexVector col = ComplexVector::Zero(n);
            for (int k = 0; k < p.users; ++k)
            {
                if (k == 0 && !model.user0_present(q))
                    continue;
                const UserCodebook &book = model.codebooks()[static_cast<std::size_t>(k)];
                for (int ell = UserCodebook::first_offset; ell <= p.window_symbols - 1; ++ell)
                {
                    const int slot = layout.slot(q, ell);
                    const double b = symbols.symbols[static_cast<std::size_t>(k)][static_cast<std::size_t>(slot)];
                    book.sparse[static_cast<std::size_t>(ell - UserCodebook::first_offset)].accumulate(
                        col, g[static_cast<std::size_t>(k)][static_cast<std::size_t>(slot)], Complex(b, 0.0));
                }
            }
            R.col(q - 1) = col;
        }
        return R;
    }

    // Shared epochs: spread each symbol once, v[n M + i] += beta(n) g[i],
    // then C_ell g is v shifted down by ell N M.
    const int M = p.samples_per_chip;
    const long sps = p.samples_per_symbol();
    const int spread_len = (p.processing_gain - 1) * M + p.signal_dim();
    ComplexVector v(spread_len);
    for (int k = 0; k < p.users; ++k)
    {
        const auto &chips = model.config().codes[static_cast<std::size_t>(k)].chips;
        for (int slot = 0; slot < layout.size(); ++slot)
        {
            const ComplexVector &gs = g[static_cast<std::size_t>(k)][static_cast<std::size_t>(slot)];
            v.setZero();
            for (int c = 0; c < p.processing_gain; ++c)
                v.segment(static_cast<Eigen::Index>(c) * M, gs.size()) += chips[static_cast<std::size_t>(c)] * gs;
            const double b = symbols.symbols[static_cast<std::size_t>(k)][static_cast<std::size_t>(slot)];
            for (int ell = UserCodebook::first_offset; ell <= p.window_symbols - 1; ++ell)
            {
                const int q = slot - ell - 1; // inverse of slot(q, ell)
                if (q < 1 || q > p.windows || (k == 0 && !model.user0_present(q)))
                    continue;
                // Rows m with 0 <= m - ell N M < spread_len.
                const long shift = ell * sps;
                const long lo = std::max<long>(0, shift);
                const long hi = std::min<long>(n, shift + spread_len);
                if (lo < hi)
                    R.col(q - 1).segment(lo, hi - lo) += b * v.segment(lo - shift, hi - lo);
            }
        }
    }
    return R;
}

ComplexMatrix assemble_R(const ScenarioModel &model, const ChannelRealization &realization,
                         const SymbolTable &symbols, std::mt19937_64 &rng)
{
    const SystemParams &p = model.params();
    if (realization.users.size() != static_cast<std::size_t>(p.users) ||
        symbols.symbols.size() != static_cast<std::size_t>(p.users) ||
        realization.layout.size() != symbols.layout.size())
        throw ParameterError("assemble_R: realization, symbols and scenario dimensions disagree");
    ComplexMatrix R = assemble_signal(model, realization, symbols);
    if (!model.config().noise_free)
        R += model.draw_noise(rng);
    return R;
}

namespace
{

// Adds one symbol's spread waveform, starting at sample `start` relative to
// the stream origin: stream[start + n M + i] += b beta(n) g[i].
void add_spread_symbol(ComplexVector &stream, long start, double b, const SpreadingCode &code,
                       const ComplexVector &g, int samples_per_chip)
{
    const long len = stream.size();
    for (int n = 0; n < code.length(); ++n)
    {
        const Complex w = b * code.chips[static_cast<std::size_t>(n)];
        for (Eigen::Index i = 0; i < g.size(); ++i)
        {
            const long s = start + static_cast<long>(n) * samples_per_chip + i;
            if (s >= 0 && s < len)
                stream(s) += w * g(i);
        }
    }
}

} // namespace

ComplexMatrix chip_conv_oracle(const ScenarioModel &model, const ChannelRealization &realization,
                               const SymbolTable &symbols)
{
    const SystemParams &p = model.params();
    const int n = p.window_length();
    const long sps = p.samples_per_symbol();
    const EpochLayout &layout = realization.layout;
    ComplexMatrix R = ComplexMatrix::Zero(n, p.windows);

    auto g_of = [&](int k, int slot) { return g_vector(realization, k, slot, model.autocorr(), p); };
    auto code_of = [&](int k) -> const SpreadingCode & { return model.config().codes[static_cast<std::size_t>(k)]; };

    if (!layout.per_window)
    {
        // One received stream; window q covers absolute samples
        // [q N M, (q + L) N M) and the stream starts at window 1.
        const long len = (p.windows + p.window_symbols - 1) * sps;
        ComplexVector others = ComplexVector::Zero(len);
        ComplexVector user0 = ComplexVector::Zero(len);
        for (int k = 0; k < p.users; ++k)
        {
            ComplexVector &target = k == 0 ? user0 : others;
            for (int slot = 0; slot < layout.size(); ++slot)
            {
                const int epoch = layout.epoch_of_slot(slot);
                const double b = symbols.symbols[static_cast<std::size_t>(k)][static_cast<std::size_t>(slot)];
                add_spread_symbol(target, (epoch - 1) * sps, b, code_of(k), g_of(k, slot), p.samples_per_chip);
            }
        }
        for (int q = 1; q <= p.windows; ++q)
        {
            const long start = (q - 1) * sps;
            R.col(q - 1) = others.segment(start, n);
            if (model.user0_present(q))
                R.col(q - 1) += user0.segment(start, n);
        }
        return R;
    }

    // Independent windows: each window is its own short stream of the
    // symbols at epochs q - 2 .. q + L - 1.
    for (int q = 1; q <= p.windows; ++q)
    {
        ComplexVector win = ComplexVector::Zero(n);
        for (int k = 0; k < p.users; ++k)
        {
            if (k == 0 && !model.user0_present(q))
                continue;
            for (int ell = UserCodebook::first_offset; ell <= p.window_symbols - 1; ++ell)
            {
                const int slot = layout.slot(q, ell);
                const double b = symbols.symbols[static_cast<std::size_t>(k)][static_cast<std::size_t>(slot)];
                add_spread_symbol(win, ell * sps, b, code_of(k), g_of(k, slot), p.samples_per_chip);
            }
        }
        R.col(q - 1) = win;
    }
    return R;
}

} // namespace userdet
