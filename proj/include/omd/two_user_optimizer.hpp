// SPDX-License-Identifier: Apache-2.0
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

#ifndef OMD_TWO_USER_OPTIMIZER_HPP
#define OMD_TWO_USER_OPTIMIZER_HPP

#include <optional>

#include "omd/convex_subproblem.hpp"
#include "omd/rate_model.hpp"
#include "omd/waterfilling.hpp"

namespace omd {

struct TwoUserSolution {
    HermitianPsd covariance;
    double rate = 0.0;
    Regime regime = Regime::SingleUser;
    // Weight on the own-capacity constraint: 1 for SD, 0 for JD, interior for
    // the dual SD case, empty for SUD.
    std::optional<double> mu1;
    ThresholdSet thresholds;
    bool bisection_fallback = false;
};

struct TwoUserOptions {
    double tol_mu = 1e-6;
    double tol_g = 1e-6;
    SubproblemOptions inner{};
};

struct DualSearch {
    double mu1 = 0.0;
    HermitianPsd covariance;
    double subgradient = 0.0; // log|I + (I + H11 S H11^H)^{-1} H21 S2 H21^H| - r2 at the result
    int iterations = 0;
};

// Maximizer of  mu1 log|I + A| + (1 - mu1) log|I + A + B|,  A = H11 S H11^H,
// B = H21 S2 H21^H. Endpoints use the closed-form water-filling solutions.
HermitianPsd weighted_sd_jd_covariance(const TwoUserContext &ctx, double mu1,
                                       const SubproblemOptions &inner = {},
                                       const std::optional<ComplexMatrix> &warm = std::nullopt);

// Bisection on mu1 for the dual SD case. Throws BisectionFailed when the
// subgradient does not change sign on [0, 1].
DualSearch bisect_mu1(const TwoUserContext &ctx, const TwoUserOptions &opt = {});

// User 1's best response with opportunistic multiuser detection.
TwoUserSolution solve_p1(const TwoUserContext &ctx, const TwoUserOptions &opt = {});

} // namespace omd

#endif
