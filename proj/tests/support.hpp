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

namespace testing_support
{

using namespace userdet;

inline SystemParams toy_params(int users = 1)
{
    SystemParams p;
    p.processing_gain = 4;
    p.samples_per_chip = 1;
    p.window_symbols = 2;
    p.pulse_chips = 1;
    p.windows = 16;
    p.active_windows = 16;
    p.users = users;
    p.paths = 2;
    p.snr = db_to_linear(10.0);
    return p;
}

inline SystemParams default_params(int users = 1)
{
    SystemParams p;
    p.users = users;
    p.snr = db_to_linear(10.0);
    return p;
}

inline ComplexMatrix random_matrix(int rows, int cols, std::mt19937_64 &rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix X(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            X(i, j) = Complex(n(rng), n(rng));
    return X;
}

inline ComplexMatrix random_unitary(int n, std::mt19937_64 &rng)
{
    Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(n, n, rng));
    return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

inline double rel_err(const ComplexMatrix &a, const ComplexMatrix &b)
{
    return (a - b).norm() / std::max(1e-300, b.norm());
}

} // namespace testing_support
