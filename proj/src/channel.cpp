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

#include "userdet/channel.hpp"

#include <cmath>
#include <numbers>

namespace userdet
{

std::vector<double> draw_path_delays(std::mt19937_64 &rng, const SystemParams &params)
{
    std::uniform_real_distribution<double> u(0.0, static_cast<double>(params.processing_gain - 1));
    std::vector<double> d(static_cast<std::size_t>(params.paths));
    for (auto &v : d)
        v = u(rng);
    return d;
}

double jakes_autocorr(double lag_symbols, double doppler)
{
    return std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * doppler * std::abs(lag_symbols));
}

GainProcessSampler::GainProcessSampler(int span, double doppler) : span_(span)
{
    if (span < 1)
        throw ParameterError("GainProcessSampler: span must be >= 1");
    RealMatrix T(span, span);
    for (int j = 0; j < span; ++j)
        for (int i = 0; i < span; ++i)
            T(i, j) = jakes_autocorr(i - j, doppler);

    // J0 Toeplitz matrices are numerically singular at small Doppler.
    for (double ridge = 1e-8; ridge <= 1e-4 * 1.0000001; ridge *= 10.0)
    {
        RealMatrix Tr = T;
        Tr.diagonal().array() += ridge;
        Eigen::LLT<RealMatrix> llt(Tr);
        if (llt.info() == Eigen::Success)
        {
            factor_ = llt.matrixL();
            ridge_ = ridge;
            if ((factor_.diagonal().array() > 0.0).all())
                return;
        }
    }
    throw NumericalDomainError("GainProcessSampler: Jakes covariance not positive definite after maximum ridge");
}

ComplexVector GainProcessSampler::sample(std::mt19937_64 &rng) const
{
    RealVector re(span_), im(span_);
    for (int i = 0; i < span_; ++i)
    {
        const Complex z = standard_complex_normal(rng);
        re(i) = z.real();
        im(i) = z.imag();
    }
    const RealVector xr = factor_.triangularView<Eigen::Lower>() * re;
    const RealVector xi = factor_.triangularView<Eigen::Lower>() * im;
    ComplexVector x(span_);
    for (int i = 0; i < span_; ++i)
        x(i) = Complex(xr(i), xi(i));
    return x;
}

ComplexVector gen_gain_process(int span, double doppler, std::mt19937_64 &rng)
{
    return GainProcessSampler(span, doppler).sample(rng);
}

RealVector pulse_response(double delay, const PulseAutocorr &psi, const SystemParams &params)
{
    const int D = params.signal_dim();
    RealVector r(D);
    for (int n = 0; n < D; ++n)
        r(n) = psi(static_cast<double>(n) / params.samples_per_chip - delay);
    return r;
}

ComplexVector g_vector(const ChannelRealization &realization, int user, int slot, const PulseAutocorr &psi,
                       const SystemParams &params)
{
    const UserChannel &u = realization.users.at(static_cast<std::size_t>(user));
    ComplexVector g = ComplexVector::Zero(params.signal_dim());
    for (std::size_t p = 0; p < u.delays.size(); ++p)
    {
        const Complex a = u.gains[p](slot);
        g += (u.amplitude * a) * pulse_response(u.delays[p], psi, params).cast<Complex>();
    }
    return g;
}

ComplexMatrix user_covariance(const UserChannel &user, const UserCodebook &book, bool skip_offset_zero)
{
    const Eigen::Index n = book.shifts.front().rows();
    const Eigen::Index paths = user.responses.cols();
    const ComplexMatrix responses = user.responses.cast<Complex>();
    // Columns C_ell r_p for every kept offset; the covariance is A^2 V V^H.
    ComplexMatrix V(n, book.offsets() * paths);
    Eigen::Index used = 0;
    for (int idx = 0; idx < book.offsets(); ++idx)
    {
        if (skip_offset_zero && idx + UserCodebook::first_offset == 0)
            continue;
        V.middleCols(used, paths).noalias() = book.shifts[static_cast<std::size_t>(idx)] * responses;
        used += paths;
    }
    ComplexMatrix acc = ComplexMatrix::Zero(n, n);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(V.leftCols(used), user.amplitude * user.amplitude);
    acc.triangularView<Eigen::StrictlyUpper>() = acc.adjoint();
    return acc;
}

GenieCovariances analytic_covariances(const ChannelRealization &realization,
                                      const std::vector<UserCodebook> &codebooks, const ComplexMatrix &noise_cov,
                                      const SystemParams &params)
{
    if (codebooks.size() < static_cast<std::size_t>(params.users) ||
        realization.users.size() < static_cast<std::size_t>(params.users))
        throw ParameterError("analytic_covariances: fewer codebooks or channels than users");
    GenieCovariances out;
    out.interference = noise_cov;
    for (int k = 1; k < params.users; ++k)
        out.interference += user_covariance(realization.users[static_cast<std::size_t>(k)],
                                            codebooks[static_cast<std::size_t>(k)], false);
    out.with_self_terms = out.interference + user_covariance(realization.users[0], codebooks[0], true);

    for (const ComplexMatrix *M : {&out.interference, &out.with_self_terms})
    {
        Eigen::LLT<ComplexMatrix> llt(*M);
        if (llt.info() != Eigen::Success)
            throw NumericalDomainError("analytic_covariances: covariance is not positive definite");
    }
    return out;
}

} // namespace userdet
