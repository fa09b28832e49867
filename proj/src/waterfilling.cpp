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

#include "omd/waterfilling.hpp"

#include <cmath>
#include <string>

namespace omd {

namespace {

// Singular values at or below this fraction of the largest are treated as
// zero gain; 1/sigma^2 is meaningless there.
constexpr double kZeroGain = 1e-13;

} // namespace

WaterfillResult waterfill(const ComplexMatrix &h_eff, double power) {
    if (!(power >= 0.0) || !std::isfinite(power))
        throw InvalidConfig("waterfill: power must be finite and nonnegative, got " +
                            std::to_string(power));

    const Svd dec = svd(h_eff);
    const Index t = dec.sigma.size();
    WaterfillResult out;
    out.singular_values = dec.sigma;
    out.power_alloc = RealVector::Zero(t);

    const double top = t > 0 ? dec.sigma(0) : 0.0;
    Index usable = 0;
    while (usable < t && dec.sigma(usable) > kZeroGain * std::max(1.0, top))
        ++usable;

    if (power == 0.0 || usable == 0) {
        out.covariance = HermitianPsd::zero(h_eff.cols());
        return out;
    }

    // Largest active set whose weakest mode still sits below the water level.
    double inv_sum = 0.0;
    for (Index i = 0; i < usable; ++i)
        inv_sum += 1.0 / (dec.sigma(i) * dec.sigma(i));
    Index active = usable;
    double level = 0.0;
    for (; active >= 1; --active) {
        level = (power + inv_sum) / static_cast<double>(active);
        const double floor = 1.0 / (dec.sigma(active - 1) * dec.sigma(active - 1));
        if (level > floor)
            break;
        inv_sum -= floor;
    }

    double rate = 0.0;
    for (Index i = 0; i < active; ++i) {
        const double g = dec.sigma(i) * dec.sigma(i);
        out.power_alloc(i) = std::max(level - 1.0 / g, 0.0);
        rate += std::log1p(g * out.power_alloc(i));
    }
    out.water_level = level;
    out.rate = rate;

    const ComplexMatrix s = dec.v * out.power_alloc.cast<Complex>().asDiagonal() * dec.v.adjoint();
    out.covariance = HermitianPsd(hermitian_part(s));
    return out;
}

WaterfillResult sud_best_response(const ComplexMatrix &h_direct,
                                  const ComplexMatrix &interference_cov, double power) {
    ComplexMatrix noise = interference_cov;
    if (noise.rows() != h_direct.rows() || noise.cols() != h_direct.rows())
        throw DimensionMismatch("sud_best_response: interference covariance must be " +
                                std::to_string(h_direct.rows()) + "x" +
                                std::to_string(h_direct.rows()));
    noise.diagonal().array() += 1.0;
    return waterfill(whiten(noise, h_direct), power);
}

} // namespace omd
