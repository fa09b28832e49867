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

#include "omd/two_user_optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace omd {

namespace {

// min(log|I + A|, log|I + A + B| - r2)
double min_expression(const TwoUserContext &ctx, const HermitianPsd &s1) {
    const ComplexMatrix a = congruence(ctx.h11, s1.matrix());
    const double own = logdet(a, LogDetMode::ShiftedIdentity);
    const double joint = logdet(a + ctx.interference(), LogDetMode::ShiftedIdentity) - ctx.r2;
    return std::min(own, joint);
}

double subgradient_at(const TwoUserContext &ctx, const HermitianPsd &s1) {
    return r2_decodable_under(ctx, s1) - ctx.r2;
}

} // namespace

HermitianPsd weighted_sd_jd_covariance(const TwoUserContext &ctx, double mu1,
                                       const SubproblemOptions &inner,
                                       const std::optional<ComplexMatrix> &warm) {
    const ComplexMatrix b = ctx.interference();
    if (mu1 >= 1.0)
        return waterfill(ctx.h11, ctx.p1).covariance;
    if (mu1 <= 0.0)
        return sud_best_response(ctx.h11, b, ctx.p1).covariance;

    const Index m = ctx.h11.rows();
    ComplexMatrix joint_base = b;
    joint_base.diagonal().array() += 1.0;
    LogDetObjective obj;
    obj.power = ctx.p1;
    obj.terms.push_back({mu1, ComplexMatrix::Identity(m, m), ctx.h11});
    obj.terms.push_back({1.0 - mu1, joint_base, ctx.h11});

    SubproblemOptions opt = inner;
    if (warm)
        opt.initial = warm;
    return solve(obj, opt).covariance;
}

DualSearch bisect_mu1(const TwoUserContext &ctx, const TwoUserOptions &opt) {
    ctx.validate();
    const HermitianPsd s_jd = weighted_sd_jd_covariance(ctx, 0.0, opt.inner);
    const HermitianPsd s_sd = weighted_sd_jd_covariance(ctx, 1.0, opt.inner);
    const double g_lo = subgradient_at(ctx, s_jd); // nonnegative inside the dual interval
    const double g_hi = subgradient_at(ctx, s_sd); // nonpositive inside the dual interval

    if (g_lo < -opt.tol_g || g_hi > opt.tol_g)
        throw BisectionFailed("bisect_mu1: subgradient does not bracket zero (g(0) = " +
                              std::to_string(g_lo) + ", g(1) = " + std::to_string(g_hi) + ")");
    if (std::abs(g_hi) <= opt.tol_g)
        return {1.0, s_sd, g_hi, 0};
    if (std::abs(g_lo) <= opt.tol_g)
        return {0.0, s_jd, g_lo, 0};

    double lo = 0.0;
    double hi = 1.0;
    DualSearch best{0.5, s_jd, g_lo, 0};
    ComplexMatrix warm = (s_jd.matrix() + s_sd.matrix()) * 0.5;
    int it = 0;
    while (hi - lo > opt.tol_mu) {
        ++it;
        const double mid = 0.5 * (lo + hi);
        const HermitianPsd s = weighted_sd_jd_covariance(ctx, mid, opt.inner, warm);
        const double g = subgradient_at(ctx, s);
        best = {mid, s, g, it};
        warm = s.matrix();
        if (std::abs(g) <= opt.tol_g)
            break;
        if (g > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    best.iterations = it;
    return best;
}

TwoUserSolution solve_p1(const TwoUserContext &ctx, const TwoUserOptions &opt) {
    ctx.validate();
    const WaterfillResult sud = sud_best_response(ctx.h11, ctx.interference(), ctx.p1);
    const WaterfillResult sd = waterfill(ctx.h11, ctx.p1);

    TwoUserSolution out;
    out.thresholds = thresholds(ctx, sud.covariance, sd.covariance, sud.covariance);
    out.regime = out.thresholds.regime;

    switch (out.regime) {
    case Regime::SingleUser:
        out.covariance = sud.covariance;
        out.rate = sud.rate;
        break;
    case Regime::JointDecoding:
        out.covariance = sud.covariance;
        out.rate = sud.rate + out.thresholds.r2_b - ctx.r2;
        out.mu1 = 0.0;
        break;
    case Regime::SdClosedForm:
        out.covariance = sd.covariance;
        out.rate = sd.rate;
        out.mu1 = 1.0;
        break;
    case Regime::SdDual:
        try {
            const DualSearch ds = bisect_mu1(ctx, opt);
            out.covariance = ds.covariance;
            out.mu1 = ds.mu1;
            // Both constraints are active at the optimum; the min keeps the
            // reported point inside the region despite the bisection tolerance.
            out.rate = min_expression(ctx, ds.covariance);
        } catch (const BisectionFailed &) {
            const double at_sd = min_expression(ctx, sd.covariance);
            const double at_jd = min_expression(ctx, sud.covariance);
            out.bisection_fallback = true;
            if (at_sd >= at_jd) {
                out.covariance = sd.covariance;
                out.rate = at_sd;
                out.mu1 = 1.0;
            } else {
                out.covariance = sud.covariance;
                out.rate = at_jd;
                out.mu1 = 0.0;
            }
        }
        break;
    }
    out.rate = std::max(out.rate, 0.0);
    return out;
}

} // namespace omd
