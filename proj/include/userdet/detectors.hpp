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

#include "userdet/channel.hpp"
#include "userdet/codebook.hpp"
#include "userdet/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace userdet
{

// All statistics are carried in the log domain; thresholds live in the
// same domain and the decision is H1 iff statistic > threshold.
enum class DetectorId
{
    Mglrt,       // QR route
    MglrtDirect, // determinant route
    Cfar,        // MGLRT divided by the true-covariance factor
    Normalized,  // MGLRT divided by the calibrated worst-case factor
    Genie        // known-covariance GLRT
};

std::string to_string(DetectorId id);
DetectorId detector_from_string(const std::string &s);
const std::vector<DetectorId> &all_detectors();

struct DetectorOutput
{
    DetectorId detector = DetectorId::Mglrt;
    double statistic = 0.0; // natural-log domain
    std::optional<ComplexMatrix> signal_estimate;
};

/// ln T with T = |R R^H| / |(I - C C^+) R R^H (I - C C^+)|_p, both
/// pseudo-determinants taken with their generic ranks LNM and LNM - D.
/// Throws DegenerateDataError if R R^H is singular.
double log_mglrt_direct(const ComplexMatrix &R, const CodeGeometry &geometry);

/// ln T from the lower LQ factor of Ubar^H R: the sum of 2 ln l_ii over the
/// trailing D diagonal positions. O(Q (LNM)^2).
double log_mglrt_fast(const ComplexMatrix &R, const CodeGeometry &geometry);

// C^+ R, the sieve-constrained estimate of the user-0 signal block.
ComplexMatrix estimate_signal(const ComplexMatrix &R, const CodeGeometry &geometry);

// ln T_e: Cholesky of Ubar^H M Ubar, sum of 2 ln p_ii over the trailing D
// positions.
double log_covariance_factor(const ComplexMatrix &true_cov, const CodeGeometry &geometry);

// ln T_CFAR = ln T - ln T_e.
double log_cfar_statistic(const ComplexMatrix &R, const ComplexMatrix &true_cov, const CodeGeometry &geometry);

// ln T_n = ln T - ln T_e,max.
double log_normalized_statistic(double log_t, double log_te_max);

/// Genie GLRT in log form:
///   sum_q r^H (M_w^-1 - M_z^-1) r + sum_q r^H M_z^-1 C (C^H M_z^-1 C)^-1 C^H M_z^-1 r
/// evaluated with Cholesky solves.
double genie_glrt(const ComplexMatrix &R, const CodeGeometry &geometry, const GenieCovariances &cov);

// Per-trial context for the dispatcher. Covariances are needed by cfar and
// genie; log_te_max by normalized.
struct DetectorContext
{
    const ComplexMatrix *data = nullptr;
    const CodeGeometry *geometry = nullptr;
    const GenieCovariances *covariances = nullptr;
    std::optional<double> log_te_max;
};

DetectorOutput evaluate(DetectorId id, const DetectorContext &ctx);

bool needs_covariances(DetectorId id);

} // namespace userdet
