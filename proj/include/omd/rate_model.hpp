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

#ifndef OMD_RATE_MODEL_HPP
#define OMD_RATE_MODEL_HPP

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "omd/matrix_core.hpp"

namespace omd {

// Absolute slack on every rate inequality (region membership, branch and
// regime boundaries). Boundaries themselves count as inside.
inline constexpr double kRateBoundaryTol = 1e-12;

// What user 1 sees while it adapts: the direct and cross channels into its
// receiver plus user 2's frozen covariance and rate.
struct TwoUserContext {
    ComplexMatrix h11; // M1 x N1
    ComplexMatrix h21; // M1 x N2
    HermitianPsd s2;   // N2 x N2
    double r2 = 0.0;   // nats
    double p1 = 0.0;

    // Throws InvalidConfig / DimensionMismatch when the fields do not fit.
    void validate() const;

    // I + H21 S2 H21^H minus the identity, i.e. H21 S2 H21^H.
    ComplexMatrix interference() const;
};

enum class RateBranch { Strong, Moderate, Weak };
enum class Regime { SdClosedForm, SdDual, JointDecoding, SingleUser };

std::string_view to_string(RateBranch b);
std::string_view to_string(Regime r);

struct OmdRate {
    double rate = 0.0;
    RateBranch branch = RateBranch::Weak;
};

// Largest user-2 rate decodable at user 1 while user 1's own signal is
// treated as noise: log|I + (I + H11 S1 H11^H)^{-1} H21 S2 H21^H|.
double r2_decodable_under(const TwoUserContext &ctx, const HermitianPsd &s1);

// log|I + H21 S2 H21^H|, the rate user 2 can have and still be decoded by
// user 1 jointly.
double r2_joint_limit(const TwoUserContext &ctx);

// User 1's rate for a given S1 with opportunistic multiuser detection:
// own capacity when user 2 is successively decodable, sum capacity minus r2
// when only joint decoding works, whitened capacity otherwise.
OmdRate omd_rate(const TwoUserContext &ctx, const HermitianPsd &s1);

// Whitened (single-user decoder) capacity for S1.
double sud_rate(const TwoUserContext &ctx, const HermitianPsd &s1);

struct ThresholdSet {
    double r2_b = 0.0;     // joint decodability limit
    double r2_a_bar = 0.0; // successive limit at the JD covariance
    double r2_a_hat = 0.0; // successive limit at the SD covariance
    Regime regime = Regime::SingleUser;
};

// Regime classification from the three candidate covariances. s_jd is the
// sum-capacity maximizer, which coincides with s_sud.
ThresholdSet thresholds(const TwoUserContext &ctx, const HermitianPsd &s_sud,
                        const HermitianPsd &s_sd, const HermitianPsd &s_jd);

// Regime for r2 given already computed thresholds.
Regime classify_regime(double r2, double r2_a_hat, double r2_a_bar, double r2_b);

// Transmitters seen by one receiver, together with the noise covariance Phi
// that collects every undecoded signal plus the unit white noise.
struct MacMember {
    int user = 0;
    ComplexMatrix h; // receiver rows x member transmit antennas
    HermitianPsd s;
};

struct MacRegionSpec {
    std::vector<MacMember> members;
    ComplexMatrix noise_cov; // Phi, Hermitian PD

    // Rank function C(J) = log|I + Phi^{-1} sum_{i in J} H_i S_i H_i^H| for J a
    // bitmask over members (bit m = members[m]).
    double capacity(std::uint32_t subset) const;
};

struct MacMembership {
    bool member = true;
    // Violating subsets as user ids, ordered by size then lexicographically.
    std::vector<std::vector<int>> violated_subsets;
};

inline constexpr std::size_t kMaxMacMembers = 12;

// Every nonempty subset J must satisfy sum_{i in J} r_i <= C(J). `rates` is
// keyed by user id; missing users count as rate 0.
MacMembership mac_member(const MacRegionSpec &spec, const std::map<int, double> &rates,
                         double tol = kRateBoundaryTol);

// Nonempty subsets of an n-element set as bitmasks, by size then
// lexicographic order of the element indices.
std::vector<std::uint32_t> subsets_by_size(std::size_t n);

} // namespace omd

#endif
