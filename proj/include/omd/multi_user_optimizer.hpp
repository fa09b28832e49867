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

#ifndef OMD_MULTI_USER_OPTIMIZER_HPP
#define OMD_MULTI_USER_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "omd/convex_subproblem.hpp"
#include "omd/rate_model.hpp"

namespace omd {

inline constexpr int kMaxUsers = 8;

struct Interferer {
    int user = 0;
    ComplexMatrix h; // into the adapting user's receiver
    HermitianPsd s;
    double rate = 0.0;
};

// Everything the adapting user needs: its own direct channel and power, and
// the frozen covariances and rates of the K - 1 other users.
struct ReceiverView {
    int user = 1;
    ComplexMatrix h_direct;
    double power = 0.0;
    std::vector<Interferer> interferers;

    void validate() const;
    Index receive_dim() const { return h_direct.rows(); }
};

struct Certificate {
    std::vector<int> subset;
    double rate_sum = 0.0;
    double capacity = 0.0;
};

struct DecodableSet {
    std::vector<int> members;    // ascending user ids
    std::vector<int> complement; // ascending user ids
    std::vector<Certificate> certificates;
};

// Reorders the candidate subsets (bitmasks over the current candidate list)
// before each scan. Only used to check order independence.
using SubsetReorder = std::function<void(std::vector<std::uint32_t> &)>;

// Iterative pruning: scan nonempty subsets of the candidate set V and, at the
// first subset whose sum rate exceeds its capacity with everything outside V
// as noise, drop it from V and rescan. The survivor is the unique largest
// decodable set.
DecodableSet find_optimal_decodable_set(const ReceiverView &view,
                                        const SubsetReorder &reorder = {});

// I + sum over the given interferers of H S H^H.
ComplexMatrix noise_covariance(const ReceiverView &view, const std::vector<int> &undecoded);

struct SubsetDual {
    std::vector<int> subset; // J_n as user ids, empty for the own-capacity constraint
    double mu = 0.0;
};

struct KUserOptions {
    SubproblemOptions inner{};
    int max_iter = 2000;
    // Ellipsoid stop: geometric mean of the semi-axes relative to the start.
    double volume_tol = 1e-8;
    // Stop once the best dual value is within this of the best primal value.
    double gap_tol = 1e-10;
    double order_tol = 1e-6;
    bool compute_order = true;
};

struct KUserSolution {
    int user = 1;
    HermitianPsd covariance;
    double rate = 0.0;
    DecodableSet decodable_set;
    std::vector<SubsetDual> duals;
    // Groups in decoding order; the adapting user is in the last group.
    std::vector<std::vector<int>> decode_order;
    std::map<int, double> rates; // every MAC member including the adapting user
    double dual_value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Rate the adapting user gets with covariance s1 given its decodable set:
// the tightest of the MAC constraints that involve its own signal.
double k_user_rate(const ReceiverView &view, const DecodableSet &set, const HermitianPsd &s1);

// Constraint values f_J(s1) = log|I + Phi^{-1}(H S1 H^H + sum_J ...)| - sum_J r_i
// for every J over the decodable set, indexed by bitmask over set.members.
std::vector<double> k_user_constraints(const ReceiverView &view, const DecodableSet &set,
                                       const HermitianPsd &s1);

// Best response of the adapting user with opportunistic multiuser detection.
KUserSolution solve_p4(const ReceiverView &view, const KUserOptions &opt = {});

// MAC region of the adapting user and its decodable set, with every other
// interferer folded into the noise covariance.
MacRegionSpec mac_region(const ReceiverView &view, const DecodableSet &set,
                         const HermitianPsd &s1);

// Ordered partition of the MAC members, finest first, such that decoding the
// groups in order (each jointly, later groups as noise) supports the rate
// point. Throws OrderNotFound if none does.
std::vector<std::vector<int>> extract_decode_order(const KUserSolution &sol,
                                                   const MacRegionSpec &spec,
                                                   double tol = 1e-6);

} // namespace omd

#endif
