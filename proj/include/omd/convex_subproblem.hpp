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

#ifndef OMD_CONVEX_SUBPROBLEM_HPP
#define OMD_CONVEX_SUBPROBLEM_HPP

#include <optional>
#include <vector>

#include "omd/matrix_core.hpp"

namespace omd {

// One weighted term  weight * log|base + map S map^H|.
struct LogDetTerm {
    double weight = 0.0;
    ComplexMatrix base; // Hermitian PD (identity plus interference)
    ComplexMatrix map;  // receiver rows x transmit antennas
};

// maximize sum_n weight_n (log|B_n + H_n S H_n^H| - log|B_n|)
// subject to tr S <= power, S >= 0. Weights are nonnegative and sum to one.
struct LogDetObjective {
    std::vector<LogDetTerm> terms;
    double power = 0.0;

    void validate() const;
    Index transmit_dim() const;

    // Objective with the constant log|B_n| offsets removed.
    double value(const ComplexMatrix &s) const;
};

struct SubproblemOptions {
    double tol = 1e-8; // on the unit-step projected-gradient norm
    int max_iter = 5000;
    std::optional<ComplexMatrix> initial; // warm start; projected onto the feasible set
};

struct SubproblemResult {
    HermitianPsd covariance;
    double value = 0.0;
    double step_norm = 0.0; // final projected-gradient norm
    int iterations = 0;
    bool converged = false; // false means max_iter was hit; best iterate returned
};

// Projected gradient ascent with Armijo backtracking (halving, sufficient
// increase 1e-4). Trial steps start from a Barzilai-Borwein estimate.
SubproblemResult solve(const LogDetObjective &obj, const SubproblemOptions &opt = {});

// sum_n weight_n H_n^H (B_n + H_n S H_n^H)^{-1} H_n
ComplexMatrix gradient(const LogDetObjective &obj, const ComplexMatrix &s);

// Frobenius-nearest point of {S >= 0, tr S <= power}.
HermitianPsd project_psd_trace(const ComplexMatrix &m, double power);

} // namespace omd

#endif
