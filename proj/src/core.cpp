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

#include "userdet/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace userdet
{

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void SystemParams::validate() const
{
    auto require = [](bool ok, const char *what)
    {
        if (!ok)
            throw ParameterError(std::string("invalid system parameters: ") + what);
    };
    require(processing_gain >= 1, "processing_gain must be >= 1");
    require(samples_per_chip >= 1, "samples_per_chip must be >= 1");
    require(window_symbols >= 2, "window_symbols must be >= 2");
    require(pulse_chips >= 1, "pulse_chips must be >= 1");
    require(paths >= 1, "paths must be >= 1");
    require(users >= 1, "users must be >= 1");
    require(rolloff >= 0.0 && rolloff <= 1.0, "rolloff must lie in [0, 1]");
    require(std::isfinite(doppler) && doppler >= 0.0, "doppler must be finite and >= 0");
    require(std::isfinite(noise_level) && noise_level > 0.0, "noise_level must be > 0");
    require(std::isfinite(snr) && snr > 0.0, "snr must be > 0");
    require(std::isfinite(sir) && sir > 0.0, "sir must be > 0");
    require(windows >= window_length(), "windows must be >= window_length (full row rank)");
    require((window_symbols - 1) * processing_gain > 2 * pulse_chips,
            "(window_symbols - 1) * processing_gain must exceed 2 * pulse_chips");
    // Symbol q-3 must not reach window q, otherwise offsets -2..L-1 miss energy.
    require(2 * pulse_chips <= processing_gain + 1, "2 * pulse_chips must be <= processing_gain + 1");
    require(active_windows >= 1 && active_windows <= windows, "active_windows must lie in [1, windows]");
}

bool all_finite(const ComplexMatrix &X)
{
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (!std::isfinite(X(i, j).real()) || !std::isfinite(X(i, j).imag()))
                return false;
    return true;
}

double hermitian_defect(const ComplexMatrix &H)
{
    if (H.rows() != H.cols())
        throw ParameterError("hermitian_defect: matrix is not square");
    return (H - H.adjoint()).cwiseAbs().maxCoeff();
}

namespace
{

void check_lq_input(const ComplexMatrix &X)
{
    if (X.rows() == 0 || X.cols() == 0)
        throw ParameterError("lq_decompose: empty matrix");
    if (X.rows() > X.cols())
        throw ParameterError("lq_decompose: requires rows <= cols");
    if (!all_finite(X))
        throw ParameterError("lq_decompose: non-finite input");
}

} // namespace

LQFactorization lq_decompose(const ComplexMatrix &X)
{
    check_lq_input(X);
    const Eigen::Index m = X.rows();
    const Eigen::Index n = X.cols();

    // X^H = Q R  =>  X = R^H Q^H, and R^H is lower triangular.
    Eigen::HouseholderQR<ComplexMatrix> qr(X.adjoint());
    ComplexMatrix R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    ComplexMatrix Qthin = qr.householderQ() * ComplexMatrix::Identity(n, m);

    LQFactorization out;
    out.lower = R.adjoint();
    out.ortho_rows = Qthin.adjoint();
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const Complex d = out.lower(i, i);
        const double mag = std::abs(d);
        if (mag == 0.0)
            continue;
        const Complex phase = std::conj(d) / mag;
        out.lower.col(i) *= phase;
        out.ortho_rows.row(i) *= std::conj(phase);
        out.lower(i, i) = Complex(mag, 0.0);
    }
    return out;
}

ComplexMatrix lq_lower(const ComplexMatrix &X)
{
    check_lq_input(X);
    const Eigen::Index m = X.rows();
    Eigen::HouseholderQR<ComplexMatrix> qr(X.adjoint());
    ComplexMatrix L = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    L.adjointInPlace();
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const Complex d = L(i, i);
        const double mag = std::abs(d);
        if (mag == 0.0)
            continue;
        L.col(i) *= std::conj(d) / mag;
        L(i, i) = Complex(mag, 0.0);
    }
    return L;
}

double log_pdet(const ComplexMatrix &H, std::optional<int> rank_hint, double rtol)
{
    if (H.rows() != H.cols() || H.rows() == 0)
        throw ParameterError("pdet: matrix must be square and nonempty");
    if (!all_finite(H))
        throw ParameterError("pdet: non-finite input");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if (hermitian_defect(H) > 1e-10 * scale)
        throw ParameterError("pdet: matrix is not Hermitian");

    const auto n = static_cast<int>(H.rows());
    if (rank_hint && (*rank_hint < 0 || *rank_hint > n))
        throw ParameterError("pdet: rank hint out of range");

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(H, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw NumericalDomainError("pdet: eigenvalue iteration did not converge");
    const RealVector &lambda = eig.eigenvalues(); // ascending
    const double lambda_max = lambda(n - 1);
    if (lambda_max < 0.0 || lambda(0) < -rtol * std::max(lambda_max, 0.0) - 1e-300)
        throw NumericalDomainError("pdet: matrix has a significantly negative eigenvalue");

    double acc = 0.0;
    if (rank_hint)
    {
        for (int i = n - *rank_hint; i < n; ++i)
        {
            if (lambda(i) <= 0.0)
                throw NumericalDomainError("pdet: rank hint exceeds the numerical rank");
            acc += std::log(lambda(i));
        }
        return acc;
    }
    for (int i = 0; i < n; ++i)
        if (lambda(i) > rtol * lambda_max)
            acc += std::log(lambda(i));
    return acc;
}

double pdet(const ComplexMatrix &H, std::optional<int> rank_hint, double rtol)
{
    return std::exp(log_pdet(H, rank_hint, rtol));
}

OrthoBasis orthobasis_split(const ComplexMatrix &C)
{
    const Eigen::Index n = C.rows();
    const Eigen::Index d = C.cols();
    if (d == 0 || d >= n)
        throw ParameterError("orthobasis_split: requires 0 < cols < rows");
    if (!all_finite(C))
        throw ParameterError("orthobasis_split: non-finite input");

    Eigen::JacobiSVD<ComplexMatrix> svd(C, Eigen::ComputeFullU);
    const RealVector &s = svd.singularValues();
    if (s(d - 1) < 1e-10 * s(0))
        throw DegenerateCodeError("orthobasis_split: code matrix is rank deficient");

    const ComplexMatrix &U = svd.matrixU();
    OrthoBasis out;
    out.range = U.leftCols(d);
    out.complement = U.rightCols(n - d);
    out.ubar.resize(n, n);
    out.ubar << out.complement, out.range;
    return out;
}

ComplexMatrix cholesky_lower(const ComplexMatrix &H)
{
    if (H.rows() != H.cols() || H.rows() == 0)
        throw ParameterError("cholesky_lower: matrix must be square and nonempty");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if (hermitian_defect(H) > 1e-10 * scale)
        throw ParameterError("cholesky_lower: matrix is not Hermitian");
    Eigen::LLT<ComplexMatrix> llt(H);
    if (llt.info() != Eigen::Success)
        throw NumericalDomainError("cholesky_lower: matrix is not positive definite");
    ComplexMatrix P = llt.matrixL();
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        if (!(P(i, i).real() > 0.0))
            throw NumericalDomainError("cholesky_lower: nonpositive pivot");
    return P;
}

ComplexMatrix pinv(const ComplexMatrix &C)
{
    if (C.cols() == 0 || C.cols() > C.rows())
        throw ParameterError("pinv: requires 0 < cols <= rows");
    Eigen::JacobiSVD<ComplexMatrix> svd(C);
    const RealVector &s = svd.singularValues();
    if (s(C.cols() - 1) < 1e-10 * s(0))
        throw DegenerateCodeError("pinv: matrix is rank deficient");
    const ComplexMatrix gram = C.adjoint() * C;
    Eigen::LLT<ComplexMatrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw DegenerateCodeError("pinv: Gram matrix is not positive definite");
    return llt.solve(C.adjoint());
}

} // namespace userdet
