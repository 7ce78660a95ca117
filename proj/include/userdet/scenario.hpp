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

#include "userdet/channel.hpp"
#include "userdet/codebook.hpp"
#include "userdet/core.hpp"
#include "userdet/waveform.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace userdet
{

enum class Hypothesis
{
    H0,
    H1
};

enum class NoiseMode
{
    FaithfulStream, // overlapping windows cut from one stationary stream
    IidBlocks       // every window regenerated independently
};

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string &s);

struct ScenarioConfig
{
    SystemParams params;
    Hypothesis hypothesis = Hypothesis::H1;
    NoiseMode mode = NoiseMode::FaithfulStream;
    std::vector<SpreadingCode> codes; // at least params.users entries
    bool noise_free = false;          // oracle tests only
    int fine_per_chip = 0;            // 0 selects 64 * samples_per_chip
};

struct Amplitudes
{
    double user0 = 1.0;
    double interferer = 1.0;
};

// A0 = sqrt(snr N0 / Q), A_k = A0 / sqrt(sir).
Amplitudes amplitudes_from_snr(const SystemParams &params);

// Per-user BPSK symbols indexed by layout slot.
struct SymbolTable
{
    EpochLayout layout;
    std::vector<std::vector<int>> symbols; // [user][slot]

    [[nodiscard]] int at(int user, int q, int ell) const
    {
        return symbols[static_cast<std::size_t>(user)][static_cast<std::size_t>(layout.slot(q, ell))];
    }
};

SymbolTable draw_symbols(int users, const EpochLayout &layout, std::mt19937_64 &rng);

struct Trial
{
    ComplexMatrix data; // LNM x Q, column q - 1 holds r(q)
    ChannelRealization realization;
    SymbolTable symbols;
};

// Everything about a scenario that does not change between trials:
// pulse tables, code matrices, detector geometry, noise and gain factors.
class ScenarioModel
{
public:
    explicit ScenarioModel(ScenarioConfig config);

    [[nodiscard]] const ScenarioConfig &config() const { return config_; }
    [[nodiscard]] const SystemParams &params() const { return config_.params; }
    [[nodiscard]] const PulseAutocorr &autocorr() const { return psi_; }
    [[nodiscard]] const std::vector<UserCodebook> &codebooks() const { return codebooks_; }
    [[nodiscard]] const CodeGeometry &geometry() const { return geometry_; }
    [[nodiscard]] const ComplexMatrix &noise_cov() const { return noise_cov_; }
    [[nodiscard]] const Amplitudes &amplitudes() const { return amplitudes_; }
    [[nodiscard]] EpochLayout layout() const;

    // Delays (random unless fixed_delays given, one vector per user), path
    // gains and pulse responses for every user, including user 0 under H0.
    ChannelRealization draw_realization(std::mt19937_64 &rng,
                                        const std::vector<std::vector<double>> *fixed_delays = nullptr) const;

    // LNM x Q noise matrix according to the noise mode.
    ComplexMatrix draw_noise(std::mt19937_64 &rng) const;

    // Full trial: realization, symbols, noise, in that draw order.
    Trial simulate(std::mt19937_64 &rng, const std::vector<std::vector<double>> *fixed_delays = nullptr) const;

    GenieCovariances covariances(const ChannelRealization &realization) const;

    // Whether user 0 contributes to window q (1-based).
    [[nodiscard]] bool user0_present(int q) const;

private:
    ScenarioConfig config_;
    PulseAutocorr psi_;
    std::vector<UserCodebook> codebooks_;
    CodeGeometry geometry_;
    ComplexMatrix noise_cov_;
    ComplexMatrix noise_chol_;
    std::optional<NoiseStreamSampler> stream_;
    std::optional<GainProcessSampler> gains_;
    Amplitudes amplitudes_;
};

// Signal part of the observation matrix from the code matrices:
// column q = sum_k sum_ell b_k(q + ell) C_{k,ell} g_k(q + ell).
ComplexMatrix assemble_signal(const ScenarioModel &model, const ChannelRealization &realization,
                              const SymbolTable &symbols);

// assemble_signal plus a noise draw (unless the config is noise free).
ComplexMatrix assemble_R(const ScenarioModel &model, const ChannelRealization &realization,
                         const SymbolTable &symbols, std::mt19937_64 &rng);

// Independent route to the noise-free data: explicit chip-by-chip synthesis
// of the received sample stream, then slicing into windows.
ComplexMatrix chip_conv_oracle(const ScenarioModel &model, const ChannelRealization &realization,
                               const SymbolTable &symbols);

} // namespace userdet
