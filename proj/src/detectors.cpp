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

#include "userdet/detectors.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace userdet
{

namespace
{

constexpr std::array<DetectorId, 5> kAll{DetectorId::Mglrt, DetectorId::MglrtDirect, DetectorId::Cfar,
                                          DetectorId::Normalized, DetectorId::Genie};

void check_dims(const ComplexMatrix &R, const CodeGeometry &g)
{
    if (R.rows() != g.window_length())
        throw ParameterError("detector: data rows do not match the code geometry");
    if (g.signal_dim <= 0 || g.signal_dim >= g.window_length())
        throw ParameterError("detector: geometry requires 0 < D < LNM");
    if (R.cols() < R.rows())
        throw DegenerateDataError("detector: fewer windows than the window length, R R^H is singular");
}

} // namespace

std::string to_string(DetectorId id)
{
    switch (id)
    {
    case DetectorId::Mglrt: return "mglrt";
    case DetectorId::MglrtDirect: return "mglrt-direct";
    case DetectorId::Cfar: return "cfar";
    case DetectorId::Normalized: return "normalized";
    case DetectorId::Genie: return "genie";
    }
    return "?";
}

DetectorId detector_from_string(const std::string &s)
{
    for (DetectorId id : kAll)
        if (to_string(id) == s)
            return id;
    throw ParameterError("unknown detector '" + s + "' (expected mglrt, mglrt-direct, cfar, normalized or genie)");
}

const std::vector<DetectorId> &all_detectors()
{
    static const std::vector<DetectorId> v(kAll.begin(), kAll.end());
    return v;
}

bool needs_covariances(DetectorId id) { return id == DetectorId::Cfar || id == DetectorId::Genie; }

double log_mglrt_direct(const ComplexMatrix &R, const CodeGeometry &geometry)
{
    check_dims(R, geometry);
    const int n = geometry.window_length();
    ComplexMatrix S = R * R.adjoint();
    S = 0.5 * (S + S.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(S, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues()(0) > 1e-13 * eig.eigenvalues()(n - 1)))
        throw DegenerateDataError("mglrt_direct: R R^H is singular");

    const ComplexMatrix perp = ComplexMatrix::Identity(n, n) - geometry.projector;
    ComplexMatrix Sp = perp * S * perp.adjoint();
    Sp = 0.5 * (Sp + Sp.adjoint()).eval();

    const double num = log_pdet(S, n);
    double den = 0.0;
    try
    {
        den = log_pdet(Sp, geometry.null_dim());
    }
    catch (const NumericalDomainError &)
    {
        throw DegenerateDataError("mglrt_direct: projected data has collapsed rank");
    }
    return num - den;
}

double log_mglrt_fast(const ComplexMatrix &R, const CodeGeometry &geometry)
{
    check_dims(R, geometry);
    const ComplexMatrix rotated = geometry.ubar.adjoint() * R;
    const ComplexMatrix L = lq_lower(rotated);
    const int n = geometry.window_length();
    const int first = geometry.null_dim();
    for (int i = 0; i < first; ++i)
        if (!(L(i, i).real() > 0.0))
            throw DegenerateDataError("mglrt_fast: zero diagonal in the null-space block");
    double acc = 0.0;
    for (int i = first; i < n; ++i)
    {
        const double l = L(i, i).real();
        if (!(l > 0.0))
            return -std::numeric_limits<double>::infinity();
        acc += 2.0 * std::log(l);
    }
    return acc;
}

ComplexMatrix estimate_signal(const ComplexMatrix &R, const CodeGeometry &geometry)
{
    if (R.rows() != geometry.window_length())
        throw ParameterError("estimate_signal: data rows do not match the code geometry");
    return geometry.pseudo_inverse * R;
}

double log_covariance_factor(const ComplexMatrix &true_cov, const CodeGeometry &geometry)
{
    if (true_cov.rows() != geometry.window_length() || true_cov.cols() != geometry.window_length())
        throw ParameterError("covariance factor: covariance does not match the code geometry");
    ComplexMatrix rotated = geometry.ubar.adjoint() * true_cov * geometry.ubar;
    rotated = 0.5 * (rotated + rotated.adjoint()).eval();
    const ComplexMatrix P = cholesky_lower(rotated);
    double acc = 0.0;
    for (int i = geometry.null_dim(); i < geometry.window_length(); ++i)
        acc += 2.0 * std::log(P(i, i).real());
    return acc;
}

double log_cfar_statistic(const ComplexMatrix &R, const ComplexMatrix &true_cov, const CodeGeometry &geometry)
{
    return log_mglrt_fast(R, geometry) - log_covariance_factor(true_cov, geometry);
}

double log_normalized_statistic(double log_t, double log_te_max)
{
    if (!std::isfinite(log_te_max))
        throw ParameterError("normalized statistic: Te_max must be positive and finite");
    return log_t - log_te_max;
}

double genie_glrt(const ComplexMatrix &R, const CodeGeometry &geometry, const GenieCovariances &cov)
{
    if (R.rows() != geometry.window_length())
        throw ParameterError("genie_glrt: data rows do not match the code geometry");
    Eigen::LLT<ComplexMatrix> lw(cov.interference);
    Eigen::LLT<ComplexMatrix> lz(cov.with_self_terms);
    if (lw.info() != Eigen::Success || lz.info() != Eigen::Success)
        throw NumericalDomainError("genie_glrt: covariance is not positive definite");

    // Every term is a sum of r^H X r over columns, i.e. tr(X R R^H), so a
    // square factor of R R^H stands in for the Q data columns.
    ComplexMatrix data = R;
    if (R.cols() > R.rows())
    {
        ComplexMatrix S = R * R.adjoint();
        S = 0.5 * (S + S.adjoint()).eval();
        Eigen::LLT<ComplexMatrix> ls(S);
        if (ls.info() == Eigen::Success)
            data = ls.matrixL();
    }

    // Whitened data and code under both covariances.
    const ComplexMatrix yw = lw.matrixL().solve(data);
    const ComplexMatrix yz = lz.matrixL().solve(data);
    const ComplexMatrix cz = lz.matrixL().solve(geometry.code_matrix);

    Eigen::LLT<ComplexMatrix> gram(cz.adjoint() * cz);
    if (gram.info() != Eigen::Success)
        throw DegenerateCodeError("genie_glrt: C^H M_z^-1 C is singular");
    const ComplexMatrix proj = gram.matrixL().solve(cz.adjoint() * yz);

    return yw.squaredNorm() - yz.squaredNorm() + proj.squaredNorm();
}

DetectorOutput evaluate(DetectorId id, const DetectorContext &ctx)
{
    if (!ctx.data || !ctx.geometry)
        throw ParameterError("evaluate: data and geometry are required");
    if (needs_covariances(id) && !ctx.covariances)
        throw ParameterError("evaluate: detector " + to_string(id) + " needs the true covariances");
    DetectorOutput out;
    out.detector = id;
    switch (id)
    {
    case DetectorId::Mglrt:
        out.statistic = log_mglrt_fast(*ctx.data, *ctx.geometry);
        break;
    case DetectorId::MglrtDirect:
        out.statistic = log_mglrt_direct(*ctx.data, *ctx.geometry);
        break;
    case DetectorId::Cfar:
        out.statistic = log_cfar_statistic(*ctx.data, ctx.covariances->interference, *ctx.geometry);
        break;
    case DetectorId::Normalized:
        if (!ctx.log_te_max)
            throw ParameterError("evaluate: normalized detector needs a calibrated Te_max");
        out.statistic = log_normalized_statistic(log_mglrt_fast(*ctx.data, *ctx.geometry), *ctx.log_te_max);
        break;
    case DetectorId::Genie:
        out.statistic = genie_glrt(*ctx.data, *ctx.geometry, *ctx.covariances);
        break;
    }
    return out;
}

} // namespace userdet
