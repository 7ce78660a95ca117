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

#include "userdet/waveform.hpp"

#include <doctest.h>

#include <cmath>

using namespace userdet;
using namespace testing_support;

namespace
{

// Trapezoid rule over [0, P] on the pulse's own grid.
double trapezoid_energy(const ChipPulse &pulse, int fine)
{
    const double h = 1.0 / fine;
    const int n = pulse.duration_chips * fine;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i)
    {
        const double v = chip_pulse_value(i * h, pulse);
        acc += (i == 0 || i == n ? 0.5 : 1.0) * v * v;
    }
    return acc * h;
}

} // namespace

TEST_CASE("chip pulse shape")
{
    const ChipPulse pulse = ChipPulse::make(0.3, 4, 128);
    CHECK(std::abs(chip_pulse_value(0.0, pulse)) < 1e-12);
    CHECK(chip_pulse_value(-0.1, pulse) == 0.0);
    CHECK(chip_pulse_value(4.0, pulse) == 0.0);

    const double peak = chip_pulse_value(2.0, pulse);
    for (int i = 0; i < 4 * 128; ++i)
        CHECK(chip_pulse_value(i / 128.0, pulse) <= peak);

    const ChipPulse coarse = ChipPulse::make(0.3, 4, 64);
    CHECK(trapezoid_energy(coarse, 64) == doctest::Approx(1.0).epsilon(1e-6));

    // The removable singularity at |2 a x| = 1 is continuous.
    const double a = 0.5, xs = 1.0 / (2.0 * a);
    CHECK(raised_cosine_shape(xs, a) == doctest::Approx(raised_cosine_shape(xs + 1e-6, a)).epsilon(1e-5));

    CHECK_THROWS_AS(ChipPulse::make(1.2, 4, 64), ParameterError);
}

TEST_CASE("pulse autocorrelation")
{
    const ChipPulse pulse = ChipPulse::make(0.3, 4, 64);
    CHECK(pulse_autocorr(4.0, pulse) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(pulse_autocorr(10.0, pulse) == 0.0);
    CHECK(pulse_autocorr(0.0, pulse) == 0.0);
    CHECK(pulse_autocorr(8.0, pulse) == 0.0);

    // Brute-force Riemann sum of the defining integral on a 4x finer grid.
    const ChipPulse fine = ChipPulse::make(0.3, 4, 256);
    const double t = 4.5, h = 1.0 / 256;
    double brute = 0.0;
    for (int i = 0; i < 4 * 256; ++i)
        brute += chip_pulse_value(i * h, fine) * chip_pulse_value(i * h - t + 4.0, fine) * h;
    CHECK(std::abs(pulse_autocorr(t, pulse) - brute) < 1e-5);

    const PulseAutocorr table(pulse);
    for (int k = 0; k <= 4 * 64; ++k)
    {
        const double tau = k / 64.0;
        CHECK(std::abs(table(4.0 + tau) - table(4.0 - tau)) <= 1e-9);
        CHECK(table(tau) == pulse_autocorr(tau, pulse));
    }

    // Doubling the grid density barely moves the values.
    const PulseAutocorr doubled(ChipPulse::make(0.3, 4, 128));
    for (double s : {0.5, 1.25, 3.0, 4.0, 4.75, 6.5})
        CHECK(std::abs(table(s) - doubled(s)) < 1e-5);
}

TEST_CASE("noise covariance")
{
    SystemParams p = toy_params();
    p.noise_level = 2.5;
    const ChipPulse pulse = ChipPulse::make(0.3, p.pulse_chips, 64);
    const PulseAutocorr psi(pulse);
    const ComplexMatrix Rn = noise_covariance(p, psi);
    const int n = p.window_length();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            const int lag = i - j;
            CHECK(Rn(i, j).real() ==
                  p.noise_level * pulse_autocorr(static_cast<double>(lag) / p.samples_per_chip + p.pulse_chips, pulse));
            CHECK(Rn(i, j).imag() == 0.0);
            if (std::abs(lag) >= 2 * p.pulse_chips * p.samples_per_chip)
                CHECK(Rn(i, j) == Complex(0, 0));
        }
    for (int i = 0; i < n; ++i)
        CHECK(Rn(i, i).real() == doctest::Approx(p.noise_level).epsilon(1e-9));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(Rn);
    CHECK(eig.eigenvalues()(0) > 0.0);

    // Default dimensions also factor.
    const SystemParams d = default_params();
    CHECK_NOTHROW(noise_covariance(d, PulseAutocorr(ChipPulse::make(0.3, 4, 128))));
}

TEST_CASE("noise stream factor matches the Toeplitz autocovariance")
{
    const SystemParams p = default_params();
    const PulseAutocorr psi(ChipPulse::make(0.3, 4, 128));
    const int len = 90;
    const NoiseStreamSampler s(len, p, psi);
    const RealMatrix F = s.dense_factor();
    const RealMatrix T = F * F.transpose();
    for (int i = 0; i < len; ++i)
        for (int j = 0; j < len; ++j)
            CHECK(std::abs(T(i, j) - noise_autocov(i - j, p, psi)) < 1e-10);
    // The window block is the window covariance.
    const ComplexMatrix Rn = noise_covariance(p, psi);
    CHECK((T.topLeftCorner(60, 60).cast<Complex>() - Rn).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("noise stream statistics")
{
    SystemParams p = default_params();
    p.noise_level = 1.7;
    const PulseAutocorr psi(ChipPulse::make(0.3, 4, 128));
    std::mt19937_64 rng(2024);

    const int draws = 100000;
    {
        const NoiseStreamSampler one(1, p, psi);
        double acc = 0.0;
        for (int i = 0; i < draws; ++i)
            acc += std::norm(one.sample(rng)(0));
        const double mean = acc / draws;
        // |x|^2 of CN(0, s) is exponential with standard deviation s.
        CHECK(std::abs(mean - p.noise_level) <= 3.0 * p.noise_level / std::sqrt(draws));
    }

    const int lag_far = 2 * p.pulse_chips * p.samples_per_chip;
    const NoiseStreamSampler s(lag_far + 2, p, psi);
    std::vector<double> lag1, far;
    for (int i = 0; i < draws; ++i)
    {
        const ComplexVector x = s.sample(rng);
        lag1.push_back((x(1) * std::conj(x(0))).real());
        far.push_back((x(lag_far) * std::conj(x(0))).real());
    }
    auto mean_se = [](const std::vector<double> &v)
    {
        double m = 0.0, q = 0.0;
        for (double a : v)
            m += a;
        m /= static_cast<double>(v.size());
        for (double a : v)
            q += (a - m) * (a - m);
        return std::pair{m, std::sqrt(q / (v.size() - 1.0) / v.size())};
    };
    const auto [m1, se1] = mean_se(lag1);
    const double expected = p.noise_level * psi(1.0 / p.samples_per_chip + p.pulse_chips);
    CHECK(std::abs(m1 - expected) <= 3.0 * se1);
    const auto [mf, sef] = mean_se(far);
    CHECK(std::abs(mf) <= 3.0 * sef);
}

TEST_CASE("standard complex normal has unit power")
{
    std::mt19937_64 rng(1);
    double re = 0.0, im = 0.0, pw = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
    {
        const Complex z = standard_complex_normal(rng);
        re += z.real() * z.real();
        im += z.imag() * z.imag();
        pw += std::norm(z);
    }
    CHECK(pw / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(re / n == doctest::Approx(0.5).epsilon(0.03));
    CHECK(im / n == doctest::Approx(0.5).epsilon(0.03));
}
