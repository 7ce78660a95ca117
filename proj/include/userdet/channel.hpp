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

#include "userdet/codebook.hpp"
#include "userdet/core.hpp"
#include "userdet/waveform.hpp"

#include <random>
#include <vector>

namespace userdet
{

// Where the per-epoch quantities (symbols, path gains) referenced by window q
// and offset ell live. A shared layout is one time line over epochs
// -1 .. Q + L - 1; a per-window layout gives every window its own L + 2
// independent epochs.
struct EpochLayout
{
    bool per_window = false;
    int windows = 0;
    int window_symbols = 2;

    static EpochLayout shared(const SystemParams &p) { return {false, p.windows, p.window_symbols}; }
    static EpochLayout independent(const SystemParams &p) { return {true, p.windows, p.window_symbols}; }

    [[nodiscard]] int offsets() const { return window_symbols + 2; }
    [[nodiscard]] int size() const { return per_window ? windows * offsets() : windows + window_symbols + 1; }
    // q is 1-based, ell in [-2, L-1].
    [[nodiscard]] int slot(int q, int ell) const
    {
        return per_window ? (q - 1) * offsets() + (ell + 2) : q + ell + 1;
    }
    // Epoch index of a shared-layout slot.
    [[nodiscard]] int epoch_of_slot(int slot) const { return slot - 1; }
};

struct UserChannel
{
    double amplitude = 1.0;
    std::vector<double> delays;          // chips, one per path
    std::vector<ComplexVector> gains;    // per path, indexed by layout slot
    RealMatrix responses;                // D x paths, psi(n / M - delay_p)
};

struct ChannelRealization
{
    EpochLayout layout;
    std::vector<UserChannel> users;
};

struct GenieCovariances
{
    ComplexMatrix interference;     // M_w
    ComplexMatrix with_self_terms;  // M_z
};

// i.i.d. uniform on [0, (N - 1)] chips.
std::vector<double> draw_path_delays(std::mt19937_64 &rng, const SystemParams &params);

// J0(2 pi fd m), the Jakes autocorrelation at a lag of m symbols.
double jakes_autocorr(double lag_symbols, double doppler);

// Cholesky factor of the span x span Jakes Toeplitz matrix, built once and
// reused for every draw.
class GainProcessSampler
{
public:
    GainProcessSampler(int span, double doppler);

    ComplexVector sample(std::mt19937_64 &rng) const;

    [[nodiscard]] int span() const { return span_; }
    [[nodiscard]] double ridge() const { return ridge_; }
    [[nodiscard]] const RealMatrix &factor() const { return factor_; }

private:
    int span_;
    double ridge_ = 0.0;
    RealMatrix factor_;
};

ComplexVector gen_gain_process(int span, double doppler, std::mt19937_64 &rng);

// r[n] = psi(n / M - delay), n = 0 .. D - 1.
RealVector pulse_response(double delay, const PulseAutocorr &psi, const SystemParams &params);

// g_k for the given layout slot: A_k sum_p alpha_p(slot) psi(n / M - tau_p).
ComplexVector g_vector(const ChannelRealization &realization, int user, int slot, const PulseAutocorr &psi,
                       const SystemParams &params);

// Per-realization second-order statistics of w(q) and z(q), averaging over
// symbols and path gains.
GenieCovariances analytic_covariances(const ChannelRealization &realization,
                                      const std::vector<UserCodebook> &codebooks, const ComplexMatrix &noise_cov,
                                      const SystemParams &params);

// Covariance contributed by all shifted copies of one user, optionally
// skipping offset 0.
ComplexMatrix user_covariance(const UserChannel &user, const UserCodebook &book, bool skip_offset_zero);

} // namespace userdet
