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

#include "omd/rate_model.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace omd {

std::string_view to_string(RateBranch b) {
    switch (b) {
    case RateBranch::Strong:
        return "strong";
    case RateBranch::Moderate:
        return "moderate";
    case RateBranch::Weak:
        return "weak";
    }
    return "unknown";
}

std::string_view to_string(Regime r) {
    switch (r) {
    case Regime::SdClosedForm:
        return "SD";
    case Regime::SdDual:
        return "SD-dual";
    case Regime::JointDecoding:
        return "JD";
    case Regime::SingleUser:
        return "SUD";
    }
    return "unknown";
}

void TwoUserContext::validate() const {
    if (h11.size() == 0 || h21.size() == 0)
        throw InvalidConfig("TwoUserContext: empty channel matrix");
    if (!all_finite(h11) || !all_finite(h21))
        throw InvalidConfig("TwoUserContext: non-finite channel entry");
    if (h21.rows() != h11.rows())
        throw DimensionMismatch("TwoUserContext: H11 and H21 must share the receiver dimension");
    if (s2.dim() != h21.cols())
        throw DimensionMismatch("TwoUserContext: S2 must be " + std::to_string(h21.cols()) + "x" +
                                std::to_string(h21.cols()));
    if (!(r2 >= 0.0) || !std::isfinite(r2))
        throw InvalidConfig("TwoUserContext: r2 must be finite and nonnegative");
    if (!(p1 >= 0.0) || !std::isfinite(p1))
        throw InvalidConfig("TwoUserContext: P1 must be finite and nonnegative");
}

ComplexMatrix TwoUserContext::interference() const {
    return congruence(h21, s2.matrix());
}

namespace {

void check_s1(const TwoUserContext &ctx, const HermitianPsd &s1) {
    if (s1.dim() != ctx.h11.cols())
        throw DimensionMismatch("S1 must be " + std::to_string(ctx.h11.cols()) + "x" +
                                std::to_string(ctx.h11.cols()));
    if (s1.trace() > ctx.p1 + 1e-9)
        throw InfeasibleCovariance("S1 trace " + std::to_string(s1.trace()) +
                                   " exceeds the power budget " + std::to_string(ctx.p1));
}

struct LogDets {
    double own;  // log|I + A|
    double sum;  // log|I + A + B|
    double intf; // log|I + B|
};

LogDets two_user_logdets(const TwoUserContext &ctx, const HermitianPsd &s1) {
    const ComplexMatrix a = congruence(ctx.h11, s1.matrix());
    const ComplexMatrix b = ctx.interference();
    return {logdet(a, LogDetMode::ShiftedIdentity), logdet(a + b, LogDetMode::ShiftedIdentity),
            logdet(b, LogDetMode::ShiftedIdentity)};
}

} // namespace

double r2_decodable_under(const TwoUserContext &ctx, const HermitianPsd &s1) {
    const LogDets ld = two_user_logdets(ctx, s1);
    return std::max(ld.sum - ld.own, 0.0);
}

double r2_joint_limit(const TwoUserContext &ctx) {
    return logdet(ctx.interference(), LogDetMode::ShiftedIdentity);
}

double sud_rate(const TwoUserContext &ctx, const HermitianPsd &s1) {
    check_s1(ctx, s1);
    const LogDets ld = two_user_logdets(ctx, s1);
    return std::max(ld.sum - ld.intf, 0.0);
}

OmdRate omd_rate(const TwoUserContext &ctx, const HermitianPsd &s1) {
    ctx.validate();
    check_s1(ctx, s1);
    const LogDets ld = two_user_logdets(ctx, s1);
    const double r2_a = ld.sum - ld.own;
    const double r2_b = ld.intf;
    if (ctx.r2 <= r2_a + kRateBoundaryTol)
        return {ld.own, RateBranch::Strong};
    if (ctx.r2 <= r2_b + kRateBoundaryTol)
        return {ld.sum - ctx.r2, RateBranch::Moderate};
    return {std::max(ld.sum - ld.intf, 0.0), RateBranch::Weak};
}

Regime classify_regime(double r2, double r2_a_hat, double r2_a_bar, double r2_b) {
    if (r2 > r2_b + kRateBoundaryTol)
        return Regime::SingleUser;
    if (r2 > r2_a_bar + kRateBoundaryTol)
        return Regime::JointDecoding;
    if (r2 < r2_a_hat - kRateBoundaryTol)
        return Regime::SdClosedForm;
    // Empty dual interval: SD and JD covariances give the same threshold.
    if (r2_a_bar - r2_a_hat <= kRateBoundaryTol)
        return Regime::SdClosedForm;
    return Regime::SdDual;
}

ThresholdSet thresholds(const TwoUserContext &ctx, const HermitianPsd &s_sud,
                        const HermitianPsd &s_sd, const HermitianPsd &s_jd) {
    ctx.validate();
    (void)s_sud; // identical to s_jd; kept for the explicit three-candidate call shape
    ThresholdSet t;
    t.r2_b = r2_joint_limit(ctx);
    t.r2_a_bar = r2_decodable_under(ctx, s_jd);
    t.r2_a_hat = r2_decodable_under(ctx, s_sd);
    t.regime = classify_regime(ctx.r2, t.r2_a_hat, t.r2_a_bar, t.r2_b);
    return t;
}

double MacRegionSpec::capacity(std::uint32_t subset) const {
    if (members.empty() || subset == 0)
        return 0.0;
    ComplexMatrix received = ComplexMatrix::Zero(noise_cov.rows(), noise_cov.cols());
    for (std::size_t m = 0; m < members.size(); ++m) {
        if (subset & (1u << m))
            received += congruence(members[m].h, members[m].s.matrix());
    }
    // log|Phi + R| - log|Phi| == log|I + Phi^{-1} R|
    return std::max(logdet(noise_cov + received) - logdet(noise_cov), 0.0);
}

std::vector<std::uint32_t> subsets_by_size(std::size_t n) {
    std::vector<std::uint32_t> out;
    if (n == 0)
        return out;
    out.reserve((std::size_t{1} << n) - 1);
    std::vector<std::size_t> pick;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t left) {
        if (left == 0) {
            std::uint32_t mask = 0;
            for (std::size_t i : pick)
                mask |= 1u << i;
            out.push_back(mask);
            return;
        }
        for (std::size_t i = start; i + left <= n; ++i) {
            pick.push_back(i);
            rec(i + 1, left - 1);
            pick.pop_back();
        }
    };
    for (std::size_t size = 1; size <= n; ++size)
        rec(0, size);
    return out;
}

MacMembership mac_member(const MacRegionSpec &spec, const std::map<int, double> &rates,
                         double tol) {
    if (spec.members.size() > kMaxMacMembers)
        throw InvalidConfig("mac_member: at most " + std::to_string(kMaxMacMembers) +
                            " members supported");
    MacMembership out;
    for (std::uint32_t mask : subsets_by_size(spec.members.size())) {
        double sum = 0.0;
        std::vector<int> ids;
        for (std::size_t m = 0; m < spec.members.size(); ++m) {
            if (!(mask & (1u << m)))
                continue;
            ids.push_back(spec.members[m].user);
            if (auto it = rates.find(spec.members[m].user); it != rates.end())
                sum += it->second;
        }
        if (sum > spec.capacity(mask) + tol) {
            out.member = false;
            out.violated_subsets.push_back(std::move(ids));
        }
    }
    return out;
}

} // namespace omd
