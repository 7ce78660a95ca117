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

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace userdet
{

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Error taxonomy. Everything derives from std::exception so callers that do
// not care about the category can catch broadly; the CLI maps categories to
// exit codes.
class ParameterError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalDomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

class DegenerateCodeError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class DegenerateDataError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

double db_to_linear(double db);
double linear_to_db(double linear);

// Scalar model dimensions and physical settings. Times are measured in chip
// intervals throughout the library, so the symbol interval is
// processing_gain chips and a sample is 1 / samples_per_chip chips.
struct SystemParams
{
    int processing_gain = 15;   // chips per symbol
    int samples_per_chip = 2;   // receiver oversampling
    int window_symbols = 2;     // symbols stacked per observation vector
    int pulse_chips = 4;        // chip pulse duration in chips
    int windows = 120;          // number of processed observation vectors
    int users = 1;              // active users including the one under test
    double rolloff = 0.3;       // raised-cosine roll-off in [0, 1]
    double doppler = 0.1;       // normalized Doppler, cycles per symbol
    double noise_level = 1.0;   // noise spectral level
    double snr = 1.0;           // linear, windows * A0^2 / noise_level
    double sir = 1.0;           // linear, A0^2 / A1^2
    int active_windows = 120;   // trailing windows in which user 0 transmits
    int paths = 3;              // multipath count per user

    // Length of one observation vector (L N M).
    [[nodiscard]] int window_length() const { return window_symbols * processing_gain * samples_per_chip; }
    // Column count of the code matrix, (N + 2P) M.
    [[nodiscard]] int signal_dim() const { return (processing_gain + 2 * pulse_chips) * samples_per_chip; }
    [[nodiscard]] int null_dim() const { return window_length() - signal_dim(); }
    [[nodiscard]] int samples_per_symbol() const { return processing_gain * samples_per_chip; }

    // Throws ParameterError naming the first violated invariant.
    void validate() const;
};

struct LQFactorization
{
    ComplexMatrix lower;      // m x m, real nonnegative diagonal
    ComplexMatrix ortho_rows; // m x n, orthonormal rows (thin form)
};

// X = [L | 0] Q with the diagonal of L made real and nonnegative. Requires
// rows <= cols.
LQFactorization lq_decompose(const ComplexMatrix &X);

// Only the lower factor; skips forming the orthonormal rows.
ComplexMatrix lq_lower(const ComplexMatrix &X);

// Natural log of the pseudo-determinant of a Hermitian PSD matrix. With a
// rank hint the largest rank_hint eigenvalues are used; otherwise those
// above rtol * lambda_max. An empty product gives 0 (pdet = 1).
double log_pdet(const ComplexMatrix &H, std::optional<int> rank_hint = std::nullopt, double rtol = 1e-10);
double pdet(const ComplexMatrix &H, std::optional<int> rank_hint = std::nullopt, double rtol = 1e-10);

struct OrthoBasis
{
    ComplexMatrix range;      // n x d, orthonormal basis of range(C)
    ComplexMatrix complement; // n x (n - d)
    ComplexMatrix ubar;       // [complement, range], unitary
};

// Orthonormal split of C^n induced by a full-column-rank C (economy SVD).
OrthoBasis orthobasis_split(const ComplexMatrix &C);

// Lower Cholesky factor with real positive diagonal.
ComplexMatrix cholesky_lower(const ComplexMatrix &H);

// (C^H C)^{-1} C^H for full-column-rank C.
ComplexMatrix pinv(const ComplexMatrix &C);

// Max-abs deviation from Hermitian symmetry.
double hermitian_defect(const ComplexMatrix &H);

bool all_finite(const ComplexMatrix &X);

} // namespace userdet
