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

#include <doctest.h>

#include <cmath>

using namespace userdet;
using namespace testing_support;

TEST_CASE("system parameter invariants")
{
    CHECK_NOTHROW(toy_params().validate());
    CHECK_NOTHROW(default_params().validate());

    SystemParams p = toy_params();
    CHECK(p.window_length() == 8);
    CHECK(p.signal_dim() == 6);
    CHECK(default_params().window_length() == 60);
    CHECK(default_params().signal_dim() == 46);

    p.windows = 7; // below L N M
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = toy_params();
    p.pulse_chips = 2; // (L-1) N = 4 is not > 2P
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = toy_params();
    p.active_windows = 0;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p.active_windows = 17;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = toy_params();
    p.window_symbols = 1;
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = toy_params();
    p.rolloff = 1.5;
    CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("lq of small matrices")
{
    ComplexMatrix X(2, 2);
    X << 1, 0, 0, 2;
    const auto lq = lq_decompose(X);
    CHECK(std::abs(lq.lower(0, 0) - Complex(1, 0)) < 1e-14);
    CHECK(std::abs(lq.lower(1, 1) - Complex(2, 0)) < 1e-14);
    CHECK(std::abs(lq.lower(1, 0)) < 1e-14);

    // One row: L is its norm, whatever the phase.
    ComplexMatrix row(1, 2);
    row << 0, Complex(0, 3);
    CHECK(std::abs(lq_lower(row)(0, 0) - Complex(3, 0)) < 1e-14);

    CHECK_THROWS_AS(lq_decompose(ComplexMatrix(3, 2)), ParameterError);
}

TEST_CASE("lq reconstructs random wide matrices")
{
    std::mt19937_64 rng(11);
    const ComplexMatrix X = random_matrix(4, 8, rng);
    const auto lq = lq_decompose(X);
    CHECK(rel_err(lq.lower * lq.ortho_rows, X) <= 1e-10);
    CHECK((lq.ortho_rows * lq.ortho_rows.adjoint() - ComplexMatrix::Identity(4, 4)).norm() <= 1e-10);
    for (int i = 0; i < 4; ++i)
    {
        CHECK(lq.lower(i, i).imag() == 0.0);
        CHECK(lq.lower(i, i).real() >= 0.0);
        for (int j = i + 1; j < 4; ++j)
            CHECK(lq.lower(i, j) == Complex(0, 0));
    }
    // Deterministic kernels give bit-identical factors.
    CHECK(lq_lower(X) == lq_lower(X));
}

TEST_CASE("pseudo-determinant")
{
    CHECK(pdet(ComplexMatrix::Identity(3, 3)) == doctest::Approx(1.0));
    ComplexMatrix D = ComplexMatrix::Zero(3, 3);
    D(0, 0) = 2;
    D(1, 1) = 3;
    CHECK(pdet(D) == doctest::Approx(6.0));
    CHECK(pdet(D, 0) == 1.0);

    // |G G^H|_p = |G^H G|, the latter through an LU determinant.
    std::mt19937_64 rng(5);
    const ComplexMatrix G = random_matrix(5, 3, rng);
    const double oracle = (G.adjoint() * G).determinant().real();
    CHECK(pdet(G * G.adjoint(), 3) == doctest::Approx(oracle).epsilon(1e-10));

    // Product of the r largest squared singular values.
    const ComplexMatrix X = random_matrix(6, 9, rng);
    Eigen::JacobiSVD<ComplexMatrix> svd(X);
    double logsv = 0.0;
    for (int i = 0; i < 4; ++i)
        logsv += 2.0 * std::log(svd.singularValues()(i));
    CHECK(log_pdet(X * X.adjoint(), 4) == doctest::Approx(logsv).epsilon(1e-8));

    ComplexMatrix skew(2, 2);
    skew << 1, 2, 0, 1;
    CHECK_THROWS_AS(pdet(skew), ParameterError);
    ComplexMatrix neg = ComplexMatrix::Identity(2, 2);
    neg(1, 1) = -1;
    CHECK_THROWS_AS(pdet(neg), NumericalDomainError);
}

TEST_CASE("orthonormal split")
{
    ComplexMatrix e2 = ComplexMatrix::Zero(2, 1);
    e2(1, 0) = 1;
    const auto b = orthobasis_split(e2);
    const ComplexMatrix P = e2 * pinv(e2);
    const ComplexMatrix rotated = b.ubar.adjoint() * P * b.ubar;
    CHECK(std::abs(rotated(0, 0)) < 1e-12);
    CHECK(std::abs(rotated(1, 1) - Complex(1, 0)) < 1e-12);

    std::mt19937_64 rng(7);
    const ComplexMatrix C = random_matrix(8, 3, rng);
    const auto s = orthobasis_split(C);
    CHECK((s.ubar * s.ubar.adjoint() - ComplexMatrix::Identity(8, 8)).norm() <= 1e-10);
    CHECK((C * pinv(C) - s.range * s.range.adjoint()).norm() <= 1e-10);
    CHECK((s.complement.adjoint() * C).norm() <= 1e-10);

    // Orthonormal columns: the projector is C C^H.
    const ComplexMatrix Qc = random_unitary(5, rng).leftCols(2);
    const auto o = orthobasis_split(Qc);
    CHECK((o.range * o.range.adjoint() - Qc * Qc.adjoint()).norm() <= 1e-10);

    ComplexMatrix deficient(4, 2);
    deficient << 1, 2, 1, 2, 0, 0, 3, 6;
    CHECK_THROWS_AS(orthobasis_split(deficient), DegenerateCodeError);
}

TEST_CASE("cholesky")
{
    const ComplexMatrix P = cholesky_lower(4.0 * ComplexMatrix::Identity(2, 2));
    CHECK((P - 2.0 * ComplexMatrix::Identity(2, 2)).norm() < 1e-14);

    ComplexMatrix H(2, 2);
    H << 2, 1, 1, 2;
    const ComplexMatrix L = cholesky_lower(H);
    // By hand: l11 = sqrt 2, l21 = 1 / sqrt 2, l22 = sqrt(2 - 1/2).
    CHECK(L(0, 0).real() == doctest::Approx(1.41421).epsilon(1e-5));
    CHECK(L(1, 0).real() == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(L(1, 1).real() == doctest::Approx(1.22474).epsilon(1e-5));
    CHECK(std::abs(L(0, 1)) == 0.0);

    std::mt19937_64 rng(9);
    const ComplexMatrix A = random_matrix(6, 6, rng);
    const ComplexMatrix S = A * A.adjoint() + ComplexMatrix::Identity(6, 6);
    const ComplexMatrix F = cholesky_lower(S);
    CHECK(rel_err(F * F.adjoint(), S) <= 1e-10);

    ComplexMatrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(cholesky_lower(indefinite), NumericalDomainError);
}

TEST_CASE("pseudo-inverse")
{
    ComplexMatrix c = ComplexMatrix::Zero(3, 1);
    c(0, 0) = 2;
    const ComplexMatrix pi = pinv(c);
    CHECK(std::abs(pi(0, 0) - Complex(0.5, 0)) < 1e-14);
    CHECK(std::abs(pi(0, 1)) < 1e-14);
    CHECK(std::abs(pi(0, 2)) < 1e-14);

    std::mt19937_64 rng(13);
    const ComplexMatrix Qc = random_unitary(4, rng).leftCols(2);
    CHECK((pinv(Qc) - Qc.adjoint()).norm() <= 1e-10);

    // The four Moore-Penrose identities.
    const ComplexMatrix C = random_matrix(6, 4, rng);
    const ComplexMatrix X = pinv(C);
    CHECK((C * X * C - C).norm() <= 1e-10 * C.norm());
    CHECK((X * C * X - X).norm() <= 1e-10 * X.norm());
    CHECK(((C * X).adjoint() - C * X).norm() <= 1e-10);
    CHECK(((X * C).adjoint() - X * C).norm() <= 1e-10);

    ComplexMatrix deficient(3, 2);
    deficient << 1, 2, 2, 4, 3, 6;
    CHECK_THROWS_AS(pinv(deficient), DegenerateCodeError);
}

TEST_CASE("decibel conversions")
{
    CHECK(db_to_linear(20.0) == doctest::Approx(100.0));
    CHECK(linear_to_db(0.1) == doctest::Approx(-10.0));
}
