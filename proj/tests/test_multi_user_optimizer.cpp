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

#include <algorithm>

#include "omd/two_user_optimizer.hpp"
#include "omd/waterfilling.hpp"
#include "support.hpp"

using namespace omd;
using namespace omd::testing;

namespace {

bool contains_all(const std::vector<int> &outer, const std::vector<int> &inner) {
    return std::all_of(inner.begin(), inner.end(), [&](int u) {
        return std::find(outer.begin(), outer.end(), u) != outer.end();
    });
}

// Each group decoded jointly with every later group as noise, checked through
// reference determinants.
bool order_supports(const ReceiverView &v, const std::vector<int> &members, const ComplexMatrix &s1,
                    double r1, const std::vector<std::vector<int>> &order, double tol) {
    const Index m = v.receive_dim();
    ComplexMatrix phi = ComplexMatrix::Identity(m, m);
    for (const Interferer &i : v.interferers)
        if (std::find(members.begin(), members.end(), i.user) == members.end())
            phi += hsh(i.h, i.s.matrix());
    auto rx = [&](int u) -> ComplexMatrix {
        if (u == v.user)
            return hsh(v.h_direct, s1);
        for (const Interferer &i : v.interferers)
            if (i.user == u)
                return hsh(i.h, i.s.matrix());
        return ComplexMatrix::Zero(m, m);
    };
    auto rate = [&](int u) {
        if (u == v.user)
            return r1;
        for (const Interferer &i : v.interferers)
            if (i.user == u)
                return i.rate;
        return 0.0;
    };
    for (std::size_t g = 0; g < order.size(); ++g) {
        ComplexMatrix noise = phi;
        for (std::size_t later = g + 1; later < order.size(); ++later)
            for (int u : order[later])
                noise += rx(u);
        const auto &grp = order[g];
        for (std::uint32_t j = 1; j < (1u << grp.size()); ++j) {
            ComplexMatrix load = noise;
            double sum = 0.0;
            for (std::size_t i = 0; i < grp.size(); ++i)
                if (j >> i & 1u) {
                    load += rx(grp[i]);
                    sum += rate(grp[i]);
                }
            if (sum > ref_logdet(load) - ref_logdet(noise) + tol)
                return false;
        }
    }
    return true;
}

ReceiverView two_user_view(const TwoUserContext &ctx) {
    ReceiverView v;
    v.h_direct = ctx.h11;
    v.power = ctx.p1;
    v.interferers = {{2, ctx.h21, ctx.s2, ctx.r2}};
    return v;
}

} // namespace

TEST_CASE("zero-rate interferers are all decodable") {
    const DecodableSet d = find_optimal_decodable_set(scalar_view(1.0, 1.0, {3.0, 1.0, 2.0}, {0.0, 0.0, 0.0}));
    CHECK(d.members == std::vector<int>{2, 3, 4});
    CHECK(d.complement.empty());
}

TEST_CASE("scalar three-user decodable sets") {
    const DecodableSet both = find_optimal_decodable_set(scalar_view(1.0, 1.0, {3.0, 1.0}, {0.5, 0.3}));
    CHECK(both.members == std::vector<int>{2, 3});
    REQUIRE(both.certificates.size() == 3);
    for (const Certificate &c : both.certificates)
        CHECK(c.rate_sum <= c.capacity + 1e-9);

    const DecodableSet one = find_optimal_decodable_set(scalar_view(1.0, 1.0, {3.0, 1.0}, {0.5, 0.8}));
    CHECK(one.members == std::vector<int>{2});
    CHECK(one.complement == std::vector<int>{3});
    REQUIRE(one.certificates.size() == 1);
    CHECK(std::abs(one.certificates[0].capacity - std::log(2.5)) < 1e-12);
}

TEST_CASE("decodable set agrees with exhaustive search and is order independent") {
    Rng rng(157);
    for (int t = 0; t < 300; ++t) {
        const int k = rng.integer(2, 5);
        const ReceiverView v = random_view(rng, k, rng.integer(1, 2));
        const DecodableSet d = find_optimal_decodable_set(v);

        const auto all = ref_all_decodable(v);
        CHECK(d.members == ref_largest_decodable(v));
        for (const auto &s : all)
            CHECK(contains_all(d.members, s));

        // Certificates cover every nonempty subset and each one holds.
        CHECK(d.certificates.size() == (std::size_t{1} << d.members.size()) - 1);
        for (const Certificate &c : d.certificates)
            CHECK(c.rate_sum <= c.capacity + 1e-9);

        // Adding any excluded user breaks decodability.
        for (int u : d.complement) {
            std::uint32_t mask = 0;
            for (std::size_t i = 0; i < v.interferers.size(); ++i) {
                const int id = v.interferers[i].user;
                if (id == u || std::find(d.members.begin(), d.members.end(), id) != d.members.end())
                    mask |= 1u << i;
            }
            CHECK_FALSE(ref_decodable(v, mask));
        }

        for (int r = 0; r < 10; ++r) {
            const DecodableSet shuffled = find_optimal_decodable_set(
                v, [&](std::vector<std::uint32_t> &subsets) {
                    std::shuffle(subsets.begin(), subsets.end(), rng.engine());
                });
            CHECK(shuffled.members == d.members);
        }
    }
}

TEST_CASE("no decodable interferer reduces to the single-user response") {
    Rng rng(163);
    for (int t = 0; t < 20; ++t) {
        ReceiverView v = random_view(rng, 3, 2);
        for (Interferer &i : v.interferers)
            i.rate = 100.0;
        const KUserSolution sol = solve_p4(v);
        REQUIRE(sol.decodable_set.members.empty());
        const WaterfillResult sud = sud_best_response(v.h_direct, noise_covariance(v, {2, 3}) -
                                                          ComplexMatrix::Identity(2, 2),
                                                      v.power);
        CHECK(std::abs(sol.rate - sud.rate) < 1e-9);
        CHECK(max_abs(sol.covariance.matrix() - sud.covariance.matrix()) < 1e-9);
        CHECK(sol.decode_order == std::vector<std::vector<int>>{{1}});
    }
}

TEST_CASE("two users: K-user solver agrees with the two-user solver") {
    Rng rng(167);
    for (int t = 0; t < 100; ++t) {
        TwoUserContext ctx = random_context(rng);
        ctx.r2 = rng.uniform(0.0, 1.2) * r2_joint_limit(ctx);
        const TwoUserSolution two = solve_p1(ctx);
        const KUserSolution k = solve_p4(two_user_view(ctx));
        CHECK(std::abs(two.rate - k.rate) < 1e-4);
        CHECK((two.covariance.matrix() - k.covariance.matrix()).norm() < 1e-3);
    }
}

TEST_CASE("scalar three users with small rates: own capacity binds") {
    const ReceiverView v = scalar_view(2.0, 1.5, {3.0, 1.0}, {0.05, 0.02});
    const KUserSolution sol = solve_p4(v);
    CHECK(sol.decodable_set.members == std::vector<int>{2, 3});
    CHECK(std::abs(sol.rate - std::log(1.0 + 2.0 * 1.5)) < 1e-9);
    CHECK(std::abs(sol.covariance.matrix()(0, 0).real() - 1.5) < 1e-9);
    // Fully successive: three singleton groups, user 1 last.
    REQUIRE(sol.decode_order.size() == 3);
    for (const auto &g : sol.decode_order)
        CHECK(g.size() == 1);
    CHECK(sol.decode_order.back() == std::vector<int>{1});
    CHECK(order_supports(v, {2, 3}, sol.covariance.matrix(), sol.rate, sol.decode_order, 1e-9));
}

TEST_CASE("two-user decode orders for the strong and moderate cases") {
    // Strong: r2 = 0.5 <= ln 2.5, so user 2 is peeled off first.
    const KUserSolution strong = solve_p4(two_user_view(scalar_context(0.5)));
    CHECK(strong.decode_order == std::vector<std::vector<int>>{{2}, {1}});
    // Moderate: only joint decoding supports r2 = 1.2.
    const KUserSolution moderate = solve_p4(two_user_view(scalar_context(1.2)));
    CHECK(moderate.decode_order == std::vector<std::vector<int>>{{1, 2}});
    CHECK(std::abs(moderate.rate - (std::log(5.0) - 1.2)) < 1e-9);
}

TEST_CASE("K-user solutions: region membership, duals and slackness") {
    Rng rng(173);
    int interior = 0;
    for (int t = 0; t < 40; ++t) {
        const ReceiverView v = random_view(rng, rng.integer(3, 4), 2);
        const KUserSolution sol = solve_p4(v);

        double total = 0.0;
        for (const SubsetDual &d : sol.duals) {
            CHECK(d.mu >= 0.0);
            total += d.mu;
        }
        CHECK(std::abs(total - 1.0) < 1e-6);

        const MacRegionSpec spec = mac_region(v, sol.decodable_set, sol.covariance);
        CHECK(mac_member(spec, sol.rates, 1e-6).member);

        const std::vector<double> f = k_user_constraints(v, sol.decodable_set, sol.covariance);
        REQUIRE(f.size() == sol.duals.size());
        const double tightest = *std::min_element(f.begin(), f.end());
        CHECK(std::abs(tightest - sol.rate) < 1e-5);
        CHECK(std::abs(ref_k_user_rate(v, sol.decodable_set.members, sol.covariance.matrix()) -
                       sol.rate) < 1e-9);
        for (std::size_t n = 0; n < f.size(); ++n)
            if (sol.duals[n].mu > 1e-4)
                CHECK(f[n] - sol.rate <= 1e-4);

        CHECK(sol.covariance.trace() <= v.power + 1e-9);
        CHECK(order_supports(v, sol.decodable_set.members, sol.covariance.matrix(), sol.rate,
                             sol.decode_order, 1e-6));
        CHECK(sol.decode_order.back().end() !=
              std::find(sol.decode_order.back().begin(), sol.decode_order.back().end(), 1));
        interior += sol.decodable_set.members.size() >= 2 ? 1 : 0;
    }
    CHECK(interior > 0);
}

TEST_CASE("K-user rate beats random covariances") {
    Rng rng(179);
    int tested = 0;
    while (tested < 8) {
        const ReceiverView v = random_view(rng, 3, 2);
        const KUserSolution sol = solve_p4(v);
        if (sol.decodable_set.members.empty())
            continue;
        const double best = sampled_max(rng, 2, v.power, 20000, [&](const ComplexMatrix &s) {
            return ref_k_user_rate(v, sol.decodable_set.members, s);
        });
        CHECK(sol.rate >= best - 1e-3);
        ++tested;
    }
}

TEST_CASE("too many users are rejected") {
    std::vector<double> g(kMaxUsers, 1.0);
    CHECK_THROWS_AS(solve_p4(scalar_view(1.0, 1.0, g, g)), InvalidConfig);
    g.pop_back();
    CHECK_NOTHROW(find_optimal_decodable_set(scalar_view(1.0, 1.0, g, std::vector<double>(g.size(), 0.0))));
}
