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

#include "userdet/codebook.hpp"

#include <cmath>
#include <cstdio>

namespace userdet
{

std::vector<int> SpreadingCode::signs() const
{
    std::vector<int> out;
    out.reserve(chips.size());
    for (double c : chips)
        out.push_back(c >= 0.0 ? 1 : -1);
    return out;
}

SpreadingCode SpreadingCode::from_signs(const std::vector<int> &signs)
{
    if (signs.empty())
        throw ParameterError("spreading code must not be empty");
    const double amp = 1.0 / std::sqrt(static_cast<double>(signs.size()));
    SpreadingCode code;
    code.chips.reserve(signs.size());
    for (int s : signs)
    {
        if (s != 1 && s != -1)
            throw ParameterError("spreading code entries must be +1 or -1");
        code.chips.push_back(s * amp);
    }
    return code;
}

LfsrPolynomial default_primitive_polynomial(int degree)
{
    switch (degree)
    {
    case 2: return {2, {1, 0}};
    case 3: return {3, {1, 0}};
    case 4: return {4, {1, 0}};
    case 5: return {5, {2, 0}};
    case 6: return {6, {1, 0}};
    case 7: return {7, {1, 0}};
    case 8: return {8, {4, 3, 2, 0}};
    case 9: return {9, {4, 0}};
    case 10: return {10, {3, 0}};
    default: throw ParameterError("no default primitive polynomial for LFSR degree " + std::to_string(degree));
    }
}

SpreadingCode gen_mseq(const LfsrPolynomial &poly, std::uint32_t seed)
{
    if (poly.degree < 2 || poly.degree > 31)
        throw ParameterError("gen_mseq: degree must lie in [2, 31]");
    const std::uint32_t mask = (1u << poly.degree) - 1u;
    seed &= mask;
    if (seed == 0)
        throw ParameterError("gen_mseq: seed must be a nonzero register state");

    const int period = static_cast<int>(mask);
    std::vector<int> signs(static_cast<std::size_t>(period));
    std::uint32_t state = seed;
    for (int n = 0; n < period; ++n)
    {
        const std::uint32_t out = state & 1u;
        signs[static_cast<std::size_t>(n)] = out ? -1 : 1;
        std::uint32_t fb = 0;
        for (int e : poly.taps)
            fb ^= (state >> e) & 1u;
        state = (state >> 1) | (fb << (poly.degree - 1));
    }
    return SpreadingCode::from_signs(signs);
}

SpreadingCode gen_mseq(int degree, std::uint32_t seed)
{
    return gen_mseq(default_primitive_polynomial(degree), seed);
}

SpreadingCode random_code(int length, std::mt19937_64 &rng)
{
    if (length < 1)
        throw ParameterError("random_code: length must be >= 1");
    std::bernoulli_distribution coin(0.5);
    std::vector<int> signs(static_cast<std::size_t>(length));
    for (auto &s : signs)
        s = coin(rng) ? 1 : -1;
    return SpreadingCode::from_signs(signs);
}

int mseq_degree_for_length(int length)
{
    for (int d = 2; d <= 10; ++d)
        if ((1 << d) - 1 == length)
            return d;
    return 0;
}

namespace
{

void check_code(const SpreadingCode &code, const SystemParams &params)
{
    if (code.length() != params.processing_gain)
        throw ParameterError("code length does not match processing_gain");
}

} // namespace

ComplexMatrix build_A(const SpreadingCode &code, const SystemParams &params)
{
    check_code(code, params);
    const int N = params.processing_gain;
    const int M = params.samples_per_chip;
    const int rows = (params.window_symbols * N + 2 * params.pulse_chips - 1) * M;
    const int cols = params.signal_dim();
    ComplexMatrix A = ComplexMatrix::Zero(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int n = 0; n < N; ++n)
        {
            const int m = j + n * M;
            if (m < rows)
                A(m, j) = code.chips[static_cast<std::size_t>(n)];
        }
    return A;
}

ComplexMatrix build_C(const SpreadingCode &code, int ell, const SystemParams &params)
{
    check_code(code, params);
    if (ell < UserCodebook::first_offset || ell > params.window_symbols - 1)
        throw ParameterError("build_C: symbol offset out of range [-2, L-1]");
    const int N = params.processing_gain;
    const int M = params.samples_per_chip;
    const int rows = params.window_length();
    const int cols = params.signal_dim();
    ComplexMatrix C = ComplexMatrix::Zero(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int n = 0; n < N; ++n)
        {
            const int m = ell * N * M + j + n * M;
            if (m >= 0 && m < rows)
                C(m, j) = code.chips[static_cast<std::size_t>(n)];
        }
    return C;
}

SparseTaps SparseTaps::from_dense(const ComplexMatrix &C)
{
    SparseTaps s;
    for (Eigen::Index j = 0; j < C.cols(); ++j)
        for (Eigen::Index i = 0; i < C.rows(); ++i)
            if (C(i, j) != Complex(0.0, 0.0))
                s.taps.push_back({static_cast<int>(i), static_cast<int>(j), C(i, j).real()});
    return s;
}

void SparseTaps::accumulate(ComplexVector &y, const ComplexVector &x, Complex scale) const
{
    // Plain real arithmetic; std::complex products go through the
    // inf/nan-checking slow path.
    double *out = reinterpret_cast<double *>(y.data());
    const double *in = reinterpret_cast<const double *>(x.data());
    const double sr = scale.real(), si = scale.imag();
    for (const auto &t : taps)
    {
        const double wr = sr * t.value, wi = si * t.value;
        const double xr = in[2 * t.col], xi = in[2 * t.col + 1];
        out[2 * t.row] += wr * xr - wi * xi;
        out[2 * t.row + 1] += wr * xi + wi * xr;
    }
}

UserCodebook UserCodebook::build(const SpreadingCode &code, const SystemParams &params)
{
    UserCodebook book;
    book.code = code;
    for (int ell = first_offset; ell <= params.window_symbols - 1; ++ell)
    {
        book.shifts.push_back(build_C(code, ell, params));
        book.sparse.push_back(SparseTaps::from_dense(book.shifts.back()));
    }
    return book;
}

CodeGeometry detector_geometry(const SpreadingCode &code, const SystemParams &params)
{
    if (params.signal_dim() >= params.window_length())
        throw ParameterError("detector_geometry: requires (N + 2P) M < L N M");
    CodeGeometry g;
    g.code_matrix = build_C(code, 0, params);
    g.signal_dim = params.signal_dim();
    const OrthoBasis basis = orthobasis_split(g.code_matrix); // throws DegenerateCodeError
    g.pseudo_inverse = pinv(g.code_matrix);
    g.projector = g.code_matrix * g.pseudo_inverse;
    g.ubar = basis.ubar;
    return g;
}

std::string code_fingerprint(const std::vector<SpreadingCode> &codes)
{
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint8_t byte)
    {
        h ^= byte;
        h *= 1099511628211ull;
    };
    for (const auto &c : codes)
    {
        for (int s : c.signs())
            mix(s > 0 ? 1 : 2);
        mix(0);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace userdet
