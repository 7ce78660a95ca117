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

#include "userdet/waveform.hpp"

#include <cmath>
#include <numbers>

namespace userdet
{

namespace
{

double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

// Fine-grid pulse samples p(i h), i = 0 .. P*fine - 1.
std::vector<double> pulse_samples(const ChipPulse &pulse)
{
    std::vector<double> p(static_cast<std::size_t>(pulse.fine_length()));
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = chip_pulse_value(static_cast<double>(i) * pulse.step(), pulse);
    return p;
}

// h * sum_i p_i p_{i - k + P f}: the autocorrelation integral at grid lag k.
double lag_integral(const std::vector<double> &p, long k, double h)
{
    const long n = static_cast<long>(p.size());
    const long shift = n - k; // index offset of the second factor
    const long lo = std::max(0L, -shift);
    const long hi = std::min(n, n - shift);
    double acc = 0.0;
    for (long i = lo; i < hi; ++i)
        acc += p[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(i + shift)];
    return acc * h;
}

} // namespace

double raised_cosine_shape(double x, double rolloff)
{
    const double s = sinc(x);
    if (rolloff == 0.0)
        return s;
    const double u = 2.0 * rolloff * x;
    const double denom = 1.0 - u * u;
    if (std::abs(denom) < 1e-9)
        return s * std::numbers::pi / 4.0; // removable singularity at |u| = 1
    return s * std::cos(std::numbers::pi * rolloff * x) / denom;
}

ChipPulse ChipPulse::make(double rolloff, int duration_chips, int fine_per_chip)
{
    if (!(rolloff >= 0.0 && rolloff <= 1.0))
        throw ParameterError("ChipPulse: rolloff must lie in [0, 1]");
    if (duration_chips < 1 || fine_per_chip < 1)
        throw ParameterError("ChipPulse: duration and grid density must be positive");
    ChipPulse pulse{rolloff, duration_chips, fine_per_chip, 1.0};
    const auto p = pulse_samples(pulse);
    double energy = 0.0;
    for (double v : p)
        energy += v * v;
    energy *= pulse.step();
    if (!(energy > 0.0))
        throw NumericalDomainError("ChipPulse: zero-energy pulse");
    pulse.energy_scale = 1.0 / std::sqrt(energy);
    return pulse;
}

double chip_pulse_value(double t, const ChipPulse &pulse)
{
    if (t < 0.0 || t >= pulse.duration_chips)
        return 0.0;
    const double x = t - 0.5 * pulse.duration_chips;
    return pulse.energy_scale * raised_cosine_shape(x, pulse.rolloff);
}

double pulse_autocorr(double t, const ChipPulse &pulse)
{
    const auto p = pulse_samples(pulse);
    const double h = pulse.step();
    const long kmax = 2L * pulse.fine_length();
    const double x = t * pulse.fine_per_chip;
    const double xr = std::round(x);
    if (std::abs(x - xr) < 1e-9)
    {
        const long k = static_cast<long>(xr);
        return (k <= 0 || k >= kmax) ? 0.0 : lag_integral(p, k, h);
    }
    const long k = static_cast<long>(std::floor(x));
    if (k < 0 || k >= kmax)
        return 0.0;
    const double w = x - static_cast<double>(k);
    const double a = k <= 0 ? 0.0 : lag_integral(p, k, h);
    const double b = k + 1 >= kmax ? 0.0 : lag_integral(p, k + 1, h);
    return (1.0 - w) * a + w * b;
}

PulseAutocorr::PulseAutocorr(const ChipPulse &pulse) : pulse_(pulse)
{
    const auto p = pulse_samples(pulse);
    const long kmax = 2L * pulse.fine_length();
    table_.assign(static_cast<std::size_t>(kmax + 1), 0.0);
    for (long k = 1; k < kmax; ++k)
        table_[static_cast<std::size_t>(k)] = lag_integral(p, k, pulse.step());
}

double PulseAutocorr::at_index(long k) const
{
    if (k <= 0 || k >= static_cast<long>(table_.size()) - 1)
        return 0.0;
    return table_[static_cast<std::size_t>(k)];
}

double PulseAutocorr::operator()(double t) const
{
    const double x = t * pulse_.fine_per_chip;
    const double xr = std::round(x);
    if (std::abs(x - xr) < 1e-9)
        return at_index(static_cast<long>(xr));
    const double kf = std::floor(x);
    const long k = static_cast<long>(kf);
    if (k < 0 || k >= static_cast<long>(table_.size()) - 1)
        return 0.0;
    const double w = x - kf;
    return (1.0 - w) * at_index(k) + w * at_index(k + 1);
}

double noise_autocov(long lag_samples, const SystemParams &params, const PulseAutocorr &psi)
{
    const int fine = psi.pulse().fine_per_chip;
    if (fine % params.samples_per_chip != 0)
        throw ParameterError("noise_autocov: fine grid must be a multiple of samples_per_chip");
    const long per_sample = fine / params.samples_per_chip;
    return params.noise_level * psi.at_index(lag_samples * per_sample + psi.peak_index());
}

ComplexMatrix noise_covariance(const SystemParams &params, const PulseAutocorr &psi)
{
    const int n = params.window_length();
    ComplexMatrix Rn(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            Rn(i, j) = Complex(noise_autocov(i - j, params, psi), 0.0);
    Eigen::LLT<ComplexMatrix> llt(Rn);
    if (llt.info() != Eigen::Success)
        throw NumericalDomainError("noise_covariance: covariance is not positive definite");
    return Rn;
}

NoiseStreamSampler::NoiseStreamSampler(int length, const SystemParams &params, const PulseAutocorr &psi)
    : length_(length)
{
    if (length < 1)
        throw ParameterError("NoiseStreamSampler: length must be >= 1");
    band_ = std::min(length - 1, params.pulse_chips * params.samples_per_chip - 1);
    std::vector<double> acov(static_cast<std::size_t>(band_ + 1));
    for (int d = 0; d <= band_; ++d)
        acov[static_cast<std::size_t>(d)] = noise_autocov(d, params, psi);

    const int w = band_ + 1;
    factor_.assign(static_cast<std::size_t>(length) * w, 0.0);
    // factor_[i * w + (i - j)] holds L(i, j) for i - band <= j <= i.
    auto L = [&](int i, int j) -> double & { return factor_[static_cast<std::size_t>(i) * w + (i - j)]; };
    for (int i = 0; i < length; ++i)
    {
        const int j0 = std::max(0, i - band_);
        for (int j = j0; j <= i; ++j)
        {
            double s = acov[static_cast<std::size_t>(i - j)];
            const int k0 = std::max(j0, j - band_);
            for (int k = k0; k < j; ++k)
                s -= L(i, k) * L(j, k);
            if (i == j)
            {
                if (!(s > 0.0))
                    throw NumericalDomainError("NoiseStreamSampler: Toeplitz autocovariance is not positive definite");
                L(i, i) = std::sqrt(s);
            }
            else
            {
                L(i, j) = s / L(j, j);
            }
        }
    }
}

ComplexVector NoiseStreamSampler::sample(std::mt19937_64 &rng) const
{
    std::vector<Complex> z(static_cast<std::size_t>(length_));
    for (auto &v : z)
        v = standard_complex_normal(rng);
    ComplexVector x(length_);
    const int w = band_ + 1;
    for (int i = 0; i < length_; ++i)
    {
        Complex acc = 0.0;
        const int j0 = std::max(0, i - band_);
        for (int j = j0; j <= i; ++j)
            acc += factor_[static_cast<std::size_t>(i) * w + (i - j)] * z[static_cast<std::size_t>(j)];
        x(i) = acc;
    }
    return x;
}

RealMatrix NoiseStreamSampler::dense_factor() const
{
    RealMatrix L = RealMatrix::Zero(length_, length_);
    const int w = band_ + 1;
    for (int i = 0; i < length_; ++i)
        for (int j = std::max(0, i - band_); j <= i; ++j)
            L(i, j) = factor_[static_cast<std::size_t>(i) * w + (i - j)];
    return L;
}

ComplexVector sample_noise_stream(int length, const SystemParams &params, const ChipPulse &pulse,
                                  std::mt19937_64 &rng)
{
    const PulseAutocorr psi(pulse);
    return NoiseStreamSampler(length, params, psi).sample(rng);
}

Complex standard_complex_normal(std::mt19937_64 &rng)
{
    std::normal_distribution<double> n(0.0, std::numbers::sqrt2 / 2.0);
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

} // namespace userdet
