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

#include "omd/multi_user_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "omd/waterfilling.hpp"

namespace omd {

void ReceiverView::validate() const {
    if (h_direct.size() == 0)
        throw InvalidConfig("ReceiverView: empty direct channel");
    if (!(power >= 0.0) || !std::isfinite(power))
        throw InvalidConfig("ReceiverView: power must be finite and nonnegative");
    if (static_cast<int>(interferers.size()) + 1 > kMaxUsers)
        throw InvalidConfig("ReceiverView: at most " + std::to_string(kMaxUsers) +
                            " users are supported");
    std::set<int> ids{user};
    for (const Interferer &i : interferers) {
        if (!ids.insert(i.user).second)
            throw InvalidConfig("ReceiverView: duplicate user id " + std::to_string(i.user));
        if (i.h.rows() != h_direct.rows())
            throw DimensionMismatch("ReceiverView: interferer " + std::to_string(i.user) +
                                    " does not land in the receiver space");
        if (i.s.dim() != i.h.cols())
            throw DimensionMismatch("ReceiverView: covariance of user " + std::to_string(i.user) +
                                    " does not match its channel");
        if (!(i.rate >= 0.0) || !std::isfinite(i.rate))
            throw InvalidConfig("ReceiverView: rates must be finite and nonnegative");
    }
}

namespace {

std::vector<std::size_t> sorted_positions(const ReceiverView &view) {
    std::vector<std::size_t> pos(view.interferers.size());
    for (std::size_t i = 0; i < pos.size(); ++i)
        pos[i] = i;
    std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
        return view.interferers[a].user < view.interferers[b].user;
    });
    return pos;
}

const Interferer &by_id(const ReceiverView &view, int user) {
    for (const Interferer &i : view.interferers)
        if (i.user == user)
            return i;
    throw InvalidConfig("ReceiverView: unknown user id " + std::to_string(user));
}

ComplexMatrix received(const Interferer &i) {
    return congruence(i.h, i.s.matrix());
}

} // namespace

ComplexMatrix noise_covariance(const ReceiverView &view, const std::vector<int> &undecoded) {
    const Index m = view.receive_dim();
    ComplexMatrix phi = ComplexMatrix::Identity(m, m);
    for (int u : undecoded)
        phi += received(by_id(view, u));
    return phi;
}

DecodableSet find_optimal_decodable_set(const ReceiverView &view, const SubsetReorder &reorder) {
    view.validate();
    const Index m = view.receive_dim();

    std::vector<std::size_t> candidates = sorted_positions(view);
    std::vector<ComplexMatrix> rx(view.interferers.size());
    for (std::size_t i = 0; i < rx.size(); ++i)
        rx[i] = received(view.interferers[i]);
    ComplexMatrix phi = ComplexMatrix::Identity(m, m);

    while (!candidates.empty()) {
        const double ld_phi = logdet(phi);
        std::vector<std::uint32_t> order = subsets_by_size(candidates.size());
        if (reorder)
            reorder(order);

        std::uint32_t violating = 0;
        for (std::uint32_t mask : order) {
            double sum = 0.0;
            ComplexMatrix load = phi;
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                if (!(mask & (1u << c)))
                    continue;
                sum += view.interferers[candidates[c]].rate;
                load += rx[candidates[c]];
            }
            if (sum > logdet(load) - ld_phi + kRateBoundaryTol) {
                violating = mask;
                break;
            }
        }
        if (violating == 0)
            break;

        std::vector<std::size_t> kept;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (violating & (1u << c))
                phi += rx[candidates[c]];
            else
                kept.push_back(candidates[c]);
        }
        candidates = std::move(kept);
    }

    DecodableSet out;
    std::vector<bool> is_member(view.interferers.size(), false);
    for (std::size_t c : candidates) {
        is_member[c] = true;
        out.members.push_back(view.interferers[c].user);
    }
    for (std::size_t p : sorted_positions(view))
        if (!is_member[p])
            out.complement.push_back(view.interferers[p].user);

    const double ld_phi = logdet(phi);
    for (std::uint32_t mask : subsets_by_size(candidates.size())) {
        Certificate cert;
        ComplexMatrix load = phi;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (!(mask & (1u << c)))
                continue;
            cert.subset.push_back(view.interferers[candidates[c]].user);
            cert.rate_sum += view.interferers[candidates[c]].rate;
            load += rx[candidates[c]];
        }
        cert.capacity = logdet(load) - ld_phi;
        out.certificates.push_back(std::move(cert));
    }
    return out;
}

namespace {

constexpr double kBisectionWidth = 1e-12;

// Per-constraint data for the MAC constraints that include the adapting user.
struct ConstraintSet {
    std::vector<ComplexMatrix> bases; // Phi + sum_J H S H^H
    std::vector<double> offsets;      // log|B_n| - log|Phi| - sum_J r_i
    std::vector<std::vector<int>> subsets;
    double ld_phi = 0.0;
};

ConstraintSet build_constraints(const ReceiverView &view, const DecodableSet &set) {
    ConstraintSet cs;
    const ComplexMatrix phi = noise_covariance(view, set.complement);
    cs.ld_phi = logdet(phi);
    const std::size_t u = set.members.size();
    const std::uint32_t count = 1u << u;
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        ComplexMatrix base = phi;
        double rate_sum = 0.0;
        std::vector<int> ids;
        for (std::size_t c = 0; c < u; ++c) {
            if (!(mask & (1u << c)))
                continue;
            const Interferer &i = by_id(view, set.members[c]);
            base += received(i);
            rate_sum += i.rate;
            ids.push_back(i.user);
        }
        cs.offsets.push_back(logdet(base) - cs.ld_phi - rate_sum);
        cs.bases.push_back(std::move(base));
        cs.subsets.push_back(std::move(ids));
    }
    return cs;
}

std::vector<double> constraint_values(const ReceiverView &view, const ConstraintSet &cs,
                                      const ComplexMatrix &s1) {
    const ComplexMatrix a = congruence(view.h_direct, s1);
    std::vector<double> f(cs.bases.size());
    for (std::size_t n = 0; n < f.size(); ++n)
        f[n] = logdet(cs.bases[n] + a) - logdet(cs.bases[n]) + cs.offsets[n];
    return f;
}

struct DualPoint {
    HermitianPsd s;
    std::vector<double> f;
    double dual = 0.0;
    double primal = 0.0;
};

class DualEvaluator {
  public:
    DualEvaluator(const ReceiverView &view, const ConstraintSet &cs, const SubproblemOptions &inner)
        : view_(view), cs_(cs), inner_(inner) {}

    DualPoint operator()(const std::vector<double> &mu) {
        std::size_t positive = 0;
        std::size_t last = 0;
        for (std::size_t n = 0; n < mu.size(); ++n)
            if (mu[n] > 0.0) {
                ++positive;
                last = n;
            }

        HermitianPsd s;
        if (positive == 1) {
            s = waterfill(whiten(cs_.bases[last], view_.h_direct), view_.power).covariance;
        } else {
            LogDetObjective obj;
            obj.power = view_.power;
            for (std::size_t n = 0; n < mu.size(); ++n)
                obj.terms.push_back({mu[n], cs_.bases[n], view_.h_direct});
            SubproblemOptions opt = inner_;
            if (warm_)
                opt.initial = warm_;
            s = solve(obj, opt).covariance;
            warm_ = s.matrix();
        }

        DualPoint p{s, constraint_values(view_, cs_, s.matrix()), 0.0, 0.0};
        p.primal = *std::min_element(p.f.begin(), p.f.end());
        for (std::size_t n = 0; n < mu.size(); ++n)
            p.dual += mu[n] * p.f[n];
        return p;
    }

  private:
    const ReceiverView &view_;
    const ConstraintSet &cs_;
    SubproblemOptions inner_;
    std::optional<ComplexMatrix> warm_;
};

} // namespace

std::vector<double> k_user_constraints(const ReceiverView &view, const DecodableSet &set,
                                       const HermitianPsd &s1) {
    return constraint_values(view, build_constraints(view, set), s1.matrix());
}

double k_user_rate(const ReceiverView &view, const DecodableSet &set, const HermitianPsd &s1) {
    const std::vector<double> f = k_user_constraints(view, set, s1);
    return std::max(*std::min_element(f.begin(), f.end()), 0.0);
}

MacRegionSpec mac_region(const ReceiverView &view, const DecodableSet &set,
                         const HermitianPsd &s1) {
    MacRegionSpec spec;
    spec.noise_cov = noise_covariance(view, set.complement);
    spec.members.push_back({view.user, view.h_direct, s1});
    for (int u : set.members) {
        const Interferer &i = by_id(view, u);
        spec.members.push_back({i.user, i.h, i.s});
    }
    return spec;
}

KUserSolution solve_p4(const ReceiverView &view, const KUserOptions &opt) {
    view.validate();
    KUserSolution out;
    out.user = view.user;
    out.decodable_set = find_optimal_decodable_set(view);

    const ConstraintSet cs = build_constraints(view, out.decodable_set);
    const std::size_t count = cs.bases.size();
    DualEvaluator evaluate(view, cs, opt.inner);

    DualPoint best_primal;
    best_primal.primal = -std::numeric_limits<double>::infinity();
    std::vector<double> best_mu;
    double best_dual = std::numeric_limits<double>::infinity();

    auto record = [&](const std::vector<double> &mu, DualPoint p) {
        if (p.dual < best_dual) {
            best_dual = p.dual;
            best_mu = mu;
        }
        if (p.primal > best_primal.primal)
            best_primal = std::move(p);
    };
    auto gap_closed = [&] { return best_dual - best_primal.primal <= opt.gap_tol; };

    if (count == 1) {
        const std::vector<double> mu{1.0};
        record(mu, evaluate(mu));
        out.converged = true;
    } else if (count == 2) {
        // One free weight: the ellipsoid method degenerates to bisection.
        const std::vector<double> at_one{1.0, 0.0};
        const std::vector<double> at_zero{0.0, 1.0};
        DualPoint p1 = evaluate(at_one);
        const bool stop_one = p1.f[0] - p1.f[1] <= 0.0;
        record(at_one, std::move(p1));
        if (!stop_one) {
            DualPoint p0 = evaluate(at_zero);
            const bool stop_zero = p0.f[0] - p0.f[1] >= 0.0;
            record(at_zero, std::move(p0));
            if (!stop_zero) {
                double lo = 0.0;
                double hi = 1.0;
                while (out.iterations < opt.max_iter && hi - lo > kBisectionWidth &&
                       !gap_closed()) {
                    ++out.iterations;
                    const double mid = 0.5 * (lo + hi);
                    const std::vector<double> mu{mid, 1.0 - mid};
                    DualPoint p = evaluate(mu);
                    const double slope = p.f[0] - p.f[1];
                    record(mu, std::move(p));
                    if (slope > 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
            }
        }
        out.converged = true;
    } else {
        // Ellipsoid over the first count - 1 weights; the last is 1 - sum.
        const Index dim = static_cast<Index>(count - 1);
        const double nd = static_cast<double>(dim);
        Eigen::VectorXd center = Eigen::VectorXd::Constant(dim, 1.0 / static_cast<double>(count));
        Eigen::MatrixXd shape = Eigen::MatrixXd::Identity(dim, dim);
        double log_det_shape = 0.0;
        const double log_stop = 2.0 * nd * std::log(opt.volume_tol);

        for (; out.iterations < opt.max_iter; ++out.iterations) {
            if (log_det_shape < log_stop || gap_closed()) {
                out.converged = true;
                break;
            }
            Eigen::VectorXd cut(dim);
            Index negative = -1;
            center.minCoeff(&negative);
            if (center(negative) < 0.0) {
                cut.setZero();
                cut(negative) = -1.0;
            } else if (center.sum() > 1.0) {
                cut.setOnes();
            } else {
                std::vector<double> mu(count);
                for (Index i = 0; i < dim; ++i)
                    mu[static_cast<std::size_t>(i)] = center(i);
                mu.back() = std::max(1.0 - center.sum(), 0.0);
                DualPoint p = evaluate(mu);
                for (Index i = 0; i < dim; ++i)
                    cut(i) = p.f[static_cast<std::size_t>(i)] - p.f.back();
                record(mu, std::move(p));
                if (cut.norm() == 0.0) {
                    out.converged = true;
                    break;
                }
            }

            const Eigen::VectorXd pa = shape * cut;
            const double scale = std::sqrt(cut.dot(pa));
            if (!(scale > 0.0))
                break;
            const Eigen::VectorXd step = pa / scale;
            center -= step / (nd + 1.0);
            shape = (nd * nd / (nd * nd - 1.0)) *
                    (shape - (2.0 / (nd + 1.0)) * step * step.transpose());
            shape = 0.5 * (shape + shape.transpose());
            log_det_shape += nd * std::log(nd * nd / (nd * nd - 1.0)) +
                             std::log1p(-2.0 / (nd + 1.0));
        }
    }

    out.covariance = best_primal.s;
    out.rate = std::max(best_primal.primal, 0.0);
    out.dual_value = best_dual;
    for (std::size_t n = 0; n < count; ++n)
        out.duals.push_back({cs.subsets[n], best_mu.empty() ? 0.0 : best_mu[n]});

    out.rates[view.user] = out.rate;
    for (int u : out.decodable_set.members)
        out.rates[u] = by_id(view, u).rate;

    if (opt.compute_order)
        out.decode_order =
            extract_decode_order(out, mac_region(view, out.decodable_set, out.covariance),
                                 opt.order_tol);
    return out;
}

namespace {

bool group_supported(const MacRegionSpec &spec, const std::map<int, double> &rates,
                     const std::vector<std::size_t> &group, const ComplexMatrix &noise,
                     double tol) {
    const double ld_noise = logdet(noise);
    for (std::uint32_t mask : subsets_by_size(group.size())) {
        ComplexMatrix load = noise;
        double sum = 0.0;
        for (std::size_t g = 0; g < group.size(); ++g) {
            if (!(mask & (1u << g)))
                continue;
            const MacMember &m = spec.members[group[g]];
            load += congruence(m.h, m.s.matrix());
            if (auto it = rates.find(m.user); it != rates.end())
                sum += it->second;
        }
        if (sum > logdet(load) - ld_noise + tol)
            return false;
    }
    return true;
}

} // namespace

std::vector<std::vector<int>> extract_decode_order(const KUserSolution &sol,
                                                   const MacRegionSpec &spec, double tol) {
    const std::size_t n = spec.members.size();
    if (n == 0 || n > kMaxMacMembers)
        throw OrderNotFound("extract_decode_order: unsupported member count");
    std::size_t own = n;
    for (std::size_t i = 0; i < n; ++i)
        if (spec.members[i].user == sol.user)
            own = i;
    if (own == n)
        throw OrderNotFound("extract_decode_order: adapting user is not a MAC member");

    std::vector<ComplexMatrix> rx(n);
    for (std::size_t i = 0; i < n; ++i)
        rx[i] = congruence(spec.members[i].h, spec.members[i].s.matrix());

    // Finest partitions first: successive decoding where it suffices, joint
    // groups only where needed. The adapting user always sits in the last group.
    for (std::size_t groups = n; groups >= 1; --groups) {
        std::vector<std::size_t> assign(n, 0);
        const std::size_t others = n - 1;
        std::size_t combos = 1;
        for (std::size_t i = 0; i < others; ++i)
            combos *= groups;
        for (std::size_t code = 0; code < combos; ++code) {
            std::size_t c = code;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == own) {
                    assign[i] = groups - 1;
                    continue;
                }
                assign[i] = c % groups;
                c /= groups;
            }
            std::vector<std::vector<std::size_t>> parts(groups);
            for (std::size_t i = 0; i < n; ++i)
                parts[assign[i]].push_back(i);
            if (std::any_of(parts.begin(), parts.end(), [](const auto &p) { return p.empty(); }))
                continue;

            bool ok = true;
            for (std::size_t g = 0; g < groups && ok; ++g) {
                ComplexMatrix noise = spec.noise_cov;
                for (std::size_t later = g + 1; later < groups; ++later)
                    for (std::size_t i : parts[later])
                        noise += rx[i];
                ok = group_supported(spec, sol.rates, parts[g], noise, tol);
            }
            if (!ok)
                continue;

            std::vector<std::vector<int>> order;
            for (const auto &p : parts) {
                std::vector<int> ids;
                for (std::size_t i : p)
                    ids.push_back(spec.members[i].user);
                std::sort(ids.begin(), ids.end());
                order.push_back(std::move(ids));
            }
            return order;
        }
        if (groups == 1)
            break;
    }
    throw OrderNotFound("extract_decode_order: no ordered partition supports the rate point");
}

} // namespace omd
