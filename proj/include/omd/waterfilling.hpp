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

#ifndef OMD_WATERFILLING_HPP
#define OMD_WATERFILLING_HPP

#include "omd/matrix_core.hpp"

namespace omd {

// Optimal single-user MIMO input over a (possibly whitened) channel.
struct WaterfillResult {
    HermitianPsd covariance;
    RealVector power_alloc;     // p_i per eigenmode, aligned with singular_values
    double water_level = 0.0;   // mu; 0 when nothing is allocated
    double rate = 0.0;          // nats
    RealVector singular_values; // descending
};

// Water-filling over H_eff under total power P: p_i = (mu - 1/sigma_i^2)^+.
// Modes with zero gain get no power. P = 0 or a zero channel yields the
// all-zero input.
WaterfillResult waterfill(const ComplexMatrix &h_eff, double power);

// Best response treating the interference covariance (sum of H_j S_j H_j^H)
// as colored Gaussian noise on top of unit white noise.
WaterfillResult sud_best_response(const ComplexMatrix &h_direct,
                                  const ComplexMatrix &interference_cov, double power);

} // namespace omd

#endif
