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

#include "userdet/core.hpp"

#include <random>
#include <vector>

namespace userdet
{

// Time-domain raised-cosine chip pulse, centred in [0, P) chips, truncated
// there and renormalized to unit energy. Sampled on a fine grid of
// fine_per_chip points per chip for numeric integration.
struct ChipPulse
{
    double rolloff = 0.3;
    int duration_chips = 4;
    int fine_per_chip = 128;
    double energy_scale = 1.0;

    // Builds a pulse and computes energy_scale on the fine grid.
    static ChipPulse make(double rolloff, int duration_chips, int fine_per_chip);

    [[nodiscard]] double step() const { return 1.0 / fine_per_chip; }
    [[nodiscard]] int fine_length() const { return duration_chips * fine_per_chip; }
};

// Unnormalized raised-cosine shape sinc(x) cos(pi a x) / (1 - (2 a x)^2).
double raised_cosine_shape(double x, double rolloff);

// Pulse amplitude at time t (chips).
double chip_pulse_value(double t, const ChipPulse &pulse);

// Receive-filter output for a unit impulse, psi(t) = int p(u) p(u - t + P) du.
// Exact on grid lags, linearly interpolated in between.
double pulse_autocorr(double t, const ChipPulse &pulse);

// Tabulated psi over [0, 2P] on the pulse's fine grid.
class PulseAutocorr
{
public:
    explicit PulseAutocorr(const ChipPulse &pulse);

    double operator()(double t) const;
    // psi at grid lag index k, i.e. t = k / fine_per_chip.
    double at_index(long k) const;

    [[nodiscard]] const ChipPulse &pulse() const { return pulse_; }
    [[nodiscard]] long peak_index() const { return static_cast<long>(pulse_.fine_length()); }

private:
    ChipPulse pulse_;
    std::vector<double> table_;
};

// Autocovariance of the sampled filtered noise at a lag of m samples,
// N0 psi(m / M + P).
double noise_autocov(long lag_samples, const SystemParams &params, const PulseAutocorr &psi);

// (R_n)_{ij} = N0 psi((i - j) / M + P), LNM x LNM. Throws NumericalDomainError
// if the result is not positive definite.
ComplexMatrix noise_covariance(const SystemParams &params, const PulseAutocorr &psi);

// Banded lower Cholesky factor of the length x length Toeplitz noise
// autocovariance. The autocovariance vanishes beyond 2PM - 1 samples, so the
// factor has that bandwidth.
class NoiseStreamSampler
{
public:
    NoiseStreamSampler(int length, const SystemParams &params, const PulseAutocorr &psi);

    // x = P_T z with z i.i.d. CN(0, 1).
    ComplexVector sample(std::mt19937_64 &rng) const;

    [[nodiscard]] int length() const { return length_; }
    [[nodiscard]] int bandwidth() const { return band_; }
    // Dense copy of the factor, for tests.
    [[nodiscard]] RealMatrix dense_factor() const;

private:
    int length_;
    int band_;
    std::vector<double> factor_; // row-major band storage, (band_ + 1) per row
};

ComplexVector sample_noise_stream(int length, const SystemParams &params, const ChipPulse &pulse,
                                  std::mt19937_64 &rng);

// One CN(0, 1) draw.
Complex standard_complex_normal(std::mt19937_64 &rng);

} // namespace userdet
