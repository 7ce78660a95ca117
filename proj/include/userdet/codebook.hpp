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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace userdet
{

// Real spreading code with chips +-1/sqrt(N).
struct SpreadingCode
{
    std::vector<double> chips;

    [[nodiscard]] int length() const { return static_cast<int>(chips.size()); }
    // +-1 signs, the exchange format in config files.
    [[nodiscard]] std::vector<int> signs() const;
    static SpreadingCode from_signs(const std::vector<int> &signs);
};

// Feedback polynomial x^degree + sum_{e in taps} x^e. The recurrence is
// a[n + degree] = xor over e in taps of a[n + e]; taps must contain 0.
struct LfsrPolynomial
{
    int degree = 4;
    std::vector<int> taps{1, 0};
};

// Known primitive polynomial for degrees 2..10.
LfsrPolynomial default_primitive_polynomial(int degree);

// Maximal-length sequence of period 2^degree - 1. Bit 0 of seed is the first
// register cell. Bits map 0 -> +1/sqrt(N), 1 -> -1/sqrt(N).
SpreadingCode gen_mseq(const LfsrPolynomial &poly, std::uint32_t seed);
SpreadingCode gen_mseq(int degree, std::uint32_t seed);

// Uniform random +-1/sqrt(N) chips.
SpreadingCode random_code(int length, std::mt19937_64 &rng);

// Degree d with 2^d - 1 == length, or 0 if none.
int mseq_degree_for_length(int length);

// Banded Toeplitz of the code, Kronecker'd with I_M:
// ((L N + 2P - 1) M) x ((N + 2P) M), A[m, j] = beta(n) iff m - j = n M.
ComplexMatrix build_A(const SpreadingCode &code, const SystemParams &params);

// Window-clipped shift for symbol offset ell in [-2, L-1]:
// C[m, j] = beta(n) iff m - ell N M - j = n M, 0 <= m < LNM, 0 <= j < D.
ComplexMatrix build_C(const SpreadingCode &code, int ell, const SystemParams &params);

// Nonzero pattern of a code matrix, used for fast products.
struct SparseTaps
{
    struct Tap
    {
        int row;
        int col;
        double value;
    };
    std::vector<Tap> taps;

    static SparseTaps from_dense(const ComplexMatrix &C);
    // y += scale * C x
    void accumulate(ComplexVector &y, const ComplexVector &x, Complex scale) const;
};

// All shifted code matrices of one user.
struct UserCodebook
{
    static constexpr int first_offset = -2;

    SpreadingCode code;
    std::vector<ComplexMatrix> shifts;   // index ell - first_offset
    std::vector<SparseTaps> sparse;

    static UserCodebook build(const SpreadingCode &code, const SystemParams &params);

    [[nodiscard]] int offsets() const { return static_cast<int>(shifts.size()); }
    [[nodiscard]] const ComplexMatrix &shift(int ell) const { return shifts.at(static_cast<std::size_t>(ell - first_offset)); }
};

// Detector-side geometry for the user under test.
struct CodeGeometry
{
    ComplexMatrix code_matrix;   // C = C_{0,0}, LNM x D
    ComplexMatrix pseudo_inverse;
    ComplexMatrix projector;     // C C^+
    ComplexMatrix ubar;          // [U_perp, U]
    int signal_dim = 0;

    [[nodiscard]] int window_length() const { return static_cast<int>(code_matrix.rows()); }
    [[nodiscard]] int null_dim() const { return window_length() - signal_dim; }
};

CodeGeometry detector_geometry(const SpreadingCode &code, const SystemParams &params);

// FNV-1a over the chip signs of all codes; stable across platforms.
std::string code_fingerprint(const std::vector<SpreadingCode> &codes);

} // namespace userdet
