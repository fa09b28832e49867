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

#include "doctest.h"

#include "omd/convex_subproblem.hpp"
#include "omd/waterfilling.hpp"
#include "support.hpp"

using namespace omd;
using namespace omd::testing;

namespace {

ComplexMatrix diag2(double a, double b) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

} // namespace

TEST_CASE("single identity-based term reproduces water-filling") {
    Rng rng(73);
    for (int t = 0; t < 20; ++t) {
        const ComplexMatrix h = random_channel(rng, 2, 2);
        const double p = rng.uniform(0.5, 20.0);
        LogDetObjective obj{{{1.0, ComplexMatrix::Identity(2, 2), h}}, p};
        const SubproblemResult r = solve(obj);
        CHECK(r.converged);
        CHECK(std::abs(r.value - waterfill(h, p).rate) < 1e-6);
    }
}

TEST_CASE("zero power gives the zero covariance") {
    Rng rng(79);
    LogDetObjective obj = random_objective(rng, 2, 2, 2);
    obj.power = 0.0;
    const SubproblemResult r = solve(obj);
    CHECK(max_abs(r.covariance.matrix()) == 0.0);
    CHECK(r.value == 0.0);
}

TEST_CASE("a zero weight drops its term") {
    Rng rng(83);
    for (int t = 0; t < 20; ++t) {
        const ComplexMatrix h = random_channel(rng, 2, 2);
        const ComplexMatrix b2 = ComplexMatrix::Identity(2, 2) + random_psd(rng, 2, 2.0);
        const double p = rng.uniform(0.5, 20.0);
        LogDetObjective obj{{{0.0, ComplexMatrix::Identity(2, 2), h}, {1.0, b2, h}}, p};
        const SubproblemResult r = solve(obj);
        const WaterfillResult wf = waterfill(whiten(b2, h), p);
        CHECK(std::abs(r.value - wf.rate) < 1e-6);
    }
}

TEST_CASE("gradient at the origin of the identity problem is the identity") {
    LogDetObjective obj{{{1.0, ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)}}, 1.0};
    CHECK((gradient(obj, ComplexMatrix::Zero(2, 2)) - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("scalar gradient of ln(1 + S) at S = 1") {
    LogDetObjective obj{{{1.0, ComplexMatrix::Identity(1, 1), ComplexMatrix::Identity(1, 1)}}, 2.0};
    CHECK(std::abs(gradient(obj, ComplexMatrix::Identity(1, 1))(0, 0) - Complex(0.5, 0.0)) < 1e-14);
}

TEST_CASE("gradient is Hermitian and matches central differences") {
    Rng rng(89);
    for (int t = 0; t < 200; ++t) {
        const Index m = rng.integer(1, 3);
        const Index n = rng.integer(1, 3);
        const LogDetObjective obj = random_objective(rng, rng.integer(1, 4), m, n);
        const ComplexMatrix s = random_feasible(rng, n, obj.power, false);
        const ComplexMatrix g = gradient(obj, s);
        CHECK(is_hermitian(g));
        CHECK(max_abs(g - fd_gradient(obj, s, 1e-6)) < 1e-5);
    }
}

TEST_CASE("projection examples") {
    Rng rng(97);
    const ComplexMatrix feasible = random_feasible(rng, 3, 2.0, false);
    CHECK(max_abs(project_psd_trace(feasible, 2.0).matrix() - feasible) < 1e-10);
    CHECK(max_abs(project_psd_trace(diag2(3.0, -1.0), 2.0).matrix() - diag2(2.0, 0.0)) < 1e-12);
    CHECK(max_abs(project_psd_trace(diag2(1.0, 1.0), 1.0).matrix() - diag2(0.5, 0.5)) < 1e-12);
}

TEST_CASE("projection is idempotent and nonexpansive") {
    Rng rng(101);
    for (int t = 0; t < 500; ++t) {
        const Index n = rng.integer(1, 4);
        const double p = rng.uniform(0.0, 5.0);
        const ComplexMatrix a = random_hermitian(rng, n) * 3.0;
        const ComplexMatrix b = random_hermitian(rng, n) * 3.0;
        const HermitianPsd pa = project_psd_trace(a, p);
        const HermitianPsd pb = project_psd_trace(b, p);
        CHECK(pa.trace() <= p + 1e-9);
        CHECK(eigh(pa.matrix()).values.minCoeff() >= -1e-12);
        CHECK(max_abs(project_psd_trace(pa.matrix(), p).matrix() - pa.matrix()) < 1e-10);
        CHECK((pa.matrix() - pb.matrix()).norm() <= (a - b).norm() + 1e-10);
    }
}

TEST_CASE("objective is concave along random chords") {
    Rng rng(103);
    for (int t = 0; t < 300; ++t) {
        const LogDetObjective obj = random_objective(rng, rng.integer(1, 4), 2, 2);
        const ComplexMatrix sa = random_feasible(rng, 2, obj.power, false);
        const ComplexMatrix sb = random_feasible(rng, 2, obj.power, false);
        for (double lambda : {0.25, 0.5, 0.75}) {
            const double mixed = obj.value(lambda * sa + (1.0 - lambda) * sb);
            CHECK(mixed >= lambda * obj.value(sa) + (1.0 - lambda) * obj.value(sb) - 1e-9);
        }
    }
}

TEST_CASE("solver beats random feasible points and is first-order stationary") {
    Rng rng(107);
    for (int t = 0; t < 10; ++t) {
        const LogDetObjective obj = random_objective(rng, rng.integer(2, 4), 2, 2);
        const SubproblemResult r = solve(obj);
        CHECK(r.converged);
        CHECK(r.step_norm <= 1e-8);
        CHECK(r.covariance.trace() <= obj.power + 1e-9);
        CHECK(std::abs(r.value - ref_value(obj, r.covariance.matrix())) < 1e-9);
        const double best = sampled_max(rng, 2, obj.power, 10000,
                                        [&](const ComplexMatrix &s) { return ref_value(obj, s); });
        CHECK(r.value >= best - 1e-6);
    }
}

TEST_CASE("malformed objectives are rejected") {
    LogDetObjective obj{{{0.7, ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)}}, 1.0};
    CHECK_THROWS_AS(solve(obj), InvalidConfig);
    obj.terms[0].weight = 1.0;
    obj.power = -1.0;
    CHECK_THROWS_AS(solve(obj), InvalidConfig);
}
