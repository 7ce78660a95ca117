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

#include <cstdint>
#include <string>
#include <vector>

namespace userdet
{

struct SelftestOptions
{
    std::uint64_t seed = 20260401;
    int threads = 1;
    // Test hook: scrambles the geometry handed to the fast statistic.
    bool corrupt_geometry = false;
};

struct SelftestCheck
{
    std::string name;
    bool passed = false;
    std::string detail;
};

// Oracle suite at toy dimensions: fast vs direct statistic, matrix
// assembly vs chip-level convolution, Jakes lag-1 correlation and Pfa
// self-consistency.
std::vector<SelftestCheck> run_selftest(const SelftestOptions &options);

} // namespace userdet
