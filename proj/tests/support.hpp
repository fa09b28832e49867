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

#ifndef OMD_TESTS_SUPPORT_HPP
#define OMD_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "omd/convex_subproblem.hpp"
#include "omd/multi_user_optimizer.hpp"
#include "omd/rate_model.hpp"

namespace omd::testing {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    std::mt19937_64 &engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

// CN(0, variance) entries.
inline ComplexMatrix random_channel(Rng &rng, Index rows, Index cols, double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            m(i, j) = Complex(s * rng.normal(), s * rng.normal());
    return m;
}

inline ComplexMatrix random_hermitian(Rng &rng, Index n) {
    const ComplexMatrix g = random_channel(rng, n, n, 2.0);
    return (g + g.adjoint()) * 0.5;
}

// Haar-ish unitary from the QR of a Gaussian matrix.
inline ComplexMatrix random_unitary(Rng &rng, Index n) {
    Eigen::HouseholderQR<ComplexMatrix> qr(random_channel(rng, n, n));
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
    const ComplexMatrix r = qr.matrixQR();
    for (Index j = 0; j < n; ++j) {
        const double a = std::abs(r(j, j));
        if (a > 0.0)
            q.col(j) *= r(j, j) / a;
    }
    return q;
}

// Random point of {S >= 0, tr S <= power}: random eigenbasis, eigenvalues
// uniform on the simplex of total `power` (or a random fraction of it when
// `full` is false).
inline ComplexMatrix random_feasible(Rng &rng, Index n, double power, bool full = true) {
    std::vector<double> e(static_cast<std::size_t>(n));
    double total = 0.0;
    for (double &x : e) {
        x = -std::log(rng.uniform(1e-300, 1.0));
        total += x;
    }
    const double budget = full ? power : power * rng.uniform();
    const ComplexMatrix u = random_unitary(rng, n);
    ComplexMatrix d = ComplexMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        d(i, i) = e[static_cast<std::size_t>(i)] / total * budget;
    const ComplexMatrix s = u * d * u.adjoint();
    return (s + s.adjoint()) * 0.5;
}

inline ComplexMatrix random_psd(Rng &rng, Index n, double scale = 1.0) {
    const ComplexMatrix g = random_channel(rng, n, n, scale);
    return g * g.adjoint();
}

// Reference log-determinants through LU, independent of the library's
// Cholesky path.
inline double ref_logdet(const ComplexMatrix &m) {
    return std::log(std::abs(m.fullPivLu().determinant()));
}

inline double ref_logdet_shift(const ComplexMatrix &m) {
    return ref_logdet(ComplexMatrix::Identity(m.rows(), m.cols()) + m);
}

inline ComplexMatrix hsh(const ComplexMatrix &h, const ComplexMatrix &s) {
    return h * s * h.adjoint();
}

// min(log|I + A|, log|I + A + B| - r2) for the two-user link.
inline double ref_min_expression(const TwoUserContext &ctx, const ComplexMatrix &s1) {
    const ComplexMatrix a = hsh(ctx.h11, s1);
    const ComplexMatrix b = hsh(ctx.h21, ctx.s2.matrix());
    return std::min(ref_logdet_shift(a), ref_logdet_shift(a + b) - ctx.r2);
}

// Largest value of f over `samples` random feasible covariances.
inline double sampled_max(Rng &rng, Index n, double power, int samples,
                          const std::function<double(const ComplexMatrix &)> &f) {
    double best = -1e300;
    for (int i = 0; i < samples; ++i)
        best = std::max(best, f(random_feasible(rng, n, power, i % 10 != 0)));
    return best;
}

// Feasible point near m: clamp eigenvalues at zero, then rescale the trace
// to the full budget (or only down to it when `full` is false).
inline ComplexMatrix clamp_feasible(const ComplexMatrix &m, double power, bool full = false) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((m + m.adjoint()) * 0.5);
    RealVector e = es.eigenvalues().cwiseMax(0.0);
    if (e.sum() > power || (full && e.sum() > 0.0))
        e *= power / e.sum();
    const ComplexMatrix s = es.eigenvectors() * e.cast<Complex>().asDiagonal() *
                            es.eigenvectors().adjoint();
    return (s + s.adjoint()) * 0.5;
}

// Random search with the same evaluation budget as sampled_max: half global
// draws, half random perturbations of the incumbent with a shrinking radius.
// The local phase stays on the full-power face, where every objective in
// this suite (nondecreasing in S) attains its maximum. Derivative free, so it
// shares nothing with the solvers under test.
inline double refined_sampled_max(Rng &rng, Index n, double power, int samples,
                                  const std::function<double(const ComplexMatrix &)> &f) {
    ComplexMatrix best_s = ComplexMatrix::Zero(n, n);
    double best = f(best_s);
    const int global = samples / 2;
    for (int i = 1; i < global; ++i) {
        const ComplexMatrix s = random_feasible(rng, n, power, i % 10 != 0);
        const double v = f(s);
        if (v > best) {
            best = v;
            best_s = s;
        }
    }
    double radius = 0.1 * std::max(power, 1e-12);
    for (int i = global; i < samples; ++i) {
        ComplexMatrix step = random_hermitian(rng, n) * radius;
        const ComplexMatrix s = clamp_feasible(best_s + step, power, true);
        const double v = f(s);
        if (v > best) {
            best = v;
            best_s = s;
            radius *= 2.0;
        } else {
            radius = std::max(radius * 0.99, 1e-9 * power);
        }
    }
    return best;
}

// Decodability of candidate set V (bitmask over view.interferers): every
// nonempty J in V must satisfy sum r <= log|Phi + sum_J| - log|Phi| with
// everything outside V in Phi.
inline bool ref_decodable(const ReceiverView &v, std::uint32_t set) {
    const Index m = v.receive_dim();
    ComplexMatrix phi = ComplexMatrix::Identity(m, m);
    for (std::size_t i = 0; i < v.interferers.size(); ++i)
        if (!(set >> i & 1u))
            phi += hsh(v.interferers[i].h, v.interferers[i].s.matrix());
    const double base = ref_logdet(phi);
    for (std::uint32_t j = set; j != 0; j = (j - 1) & set) {
        ComplexMatrix total = phi;
        double rate_sum = 0.0;
        for (std::size_t i = 0; i < v.interferers.size(); ++i)
            if (j >> i & 1u) {
                total += hsh(v.interferers[i].h, v.interferers[i].s.matrix());
                rate_sum += v.interferers[i].rate;
            }
        if (rate_sum > ref_logdet(total) - base + 1e-12)
            return false;
    }
    return true;
}

// Every decodable candidate set, as ascending user-id lists.
inline std::vector<std::vector<int>> ref_all_decodable(const ReceiverView &v) {
    std::vector<std::vector<int>> out;
    const std::uint32_t n = static_cast<std::uint32_t>(v.interferers.size());
    for (std::uint32_t set = 0; set < (1u << n); ++set)
        if (ref_decodable(v, set)) {
            std::vector<int> ids;
            for (std::uint32_t i = 0; i < n; ++i)
                if (set >> i & 1u)
                    ids.push_back(v.interferers[i].user);
            std::sort(ids.begin(), ids.end());
            out.push_back(ids);
        }
    return out;
}

inline std::vector<int> ref_largest_decodable(const ReceiverView &v) {
    std::vector<int> best;
    for (const auto &s : ref_all_decodable(v))
        if (s.size() > best.size())
            best = s;
    return best;
}

// min over J in `members` of log|Phi + H S H^H + sum_J| - log|Phi| - sum_J r,
// with Phi collecting the interferers not in `members`.
inline double ref_k_user_rate(const ReceiverView &v, const std::vector<int> &members,
                              const ComplexMatrix &s1) {
    const Index m = v.receive_dim();
    ComplexMatrix phi = ComplexMatrix::Identity(m, m);
    std::vector<const Interferer *> in;
    for (const Interferer &i : v.interferers) {
        if (std::find(members.begin(), members.end(), i.user) != members.end())
            in.push_back(&i);
        else
            phi += hsh(i.h, i.s.matrix());
    }
    const ComplexMatrix own = phi + hsh(v.h_direct, s1);
    const double base = ref_logdet(phi);
    double worst = 1e300;
    for (std::uint32_t j = 0; j < (1u << in.size()); ++j) {
        ComplexMatrix total = own;
        double rate_sum = 0.0;
        for (std::size_t i = 0; i < in.size(); ++i)
            if (j >> i & 1u) {
                total += hsh(in[i]->h, in[i]->s.matrix());
                rate_sum += in[i]->rate;
            }
        worst = std::min(worst, ref_logdet(total) - base - rate_sum);
    }
    return worst;
}

// Single-antenna view with interferer received powers `gains` (|h|^2 S).
inline ReceiverView scalar_view(double direct_gain, double power, const std::vector<double> &gains,
                                const std::vector<double> &rates) {
    ReceiverView v;
    v.user = 1;
    v.h_direct = ComplexMatrix::Constant(1, 1, std::sqrt(direct_gain));
    v.power = power;
    for (std::size_t i = 0; i < gains.size(); ++i)
        v.interferers.push_back({static_cast<int>(i) + 2, ComplexMatrix::Constant(1, 1, 1.0),
                                 HermitianPsd::scaled_identity(1, gains[i]), rates[i]});
    return v;
}

inline TwoUserContext scalar_context(double r2) {
    return TwoUserContext{ComplexMatrix::Constant(1, 1, 1.0), ComplexMatrix::Constant(1, 1, 1.0),
                          HermitianPsd::scaled_identity(1, 3.0), r2, 1.0};
}

// Random 2x2 context with user 2's covariance of trace p2 and r2 unset.
inline TwoUserContext random_context(Rng &rng, Index m = 2, Index n1 = 2, Index n2 = 2,
                                     double p1 = 0.0, double p2 = 0.0) {
    if (p1 <= 0.0)
        p1 = rng.uniform(0.5, 20.0);
    if (p2 <= 0.0)
        p2 = rng.uniform(0.5, 20.0);
    return TwoUserContext{random_channel(rng, m, n1), random_channel(rng, m, n2),
                          HermitianPsd(random_feasible(rng, n2, p2)), 0.0, p1};
}

// Random K-user receiver view; rates drawn around each interferer's
// single-user decodable level so that decodable sets of every size appear.
inline ReceiverView random_view(Rng &rng, int users, Index antennas) {
    ReceiverView v;
    v.user = 1;
    v.h_direct = random_channel(rng, antennas, antennas);
    v.power = rng.uniform(0.5, 10.0);
    for (int k = 2; k <= users; ++k) {
        Interferer i;
        i.user = k;
        i.h = random_channel(rng, antennas, antennas, rng.uniform(0.2, 3.0));
        i.s = HermitianPsd(random_feasible(rng, antennas, rng.uniform(0.5, 10.0)));
        i.rate = rng.uniform(0.0, 1.2) * ref_logdet_shift(hsh(i.h, i.s.matrix())) /
                 static_cast<double>(users - 1) * 1.5;
        v.interferers.push_back(std::move(i));
    }
    return v;
}

inline LogDetObjective random_objective(Rng &rng, int terms, Index m, Index n) {
    LogDetObjective obj;
    obj.power = rng.uniform(0.5, 10.0);
    double total = 0.0;
    std::vector<double> w;
    for (int i = 0; i < terms; ++i) {
        w.push_back(rng.uniform(0.05, 1.0));
        total += w.back();
    }
    for (int i = 0; i < terms; ++i)
        obj.terms.push_back({w[static_cast<std::size_t>(i)] / total,
                             ComplexMatrix::Identity(m, m) + random_psd(rng, m, rng.uniform(0.0, 3.0)),
                             random_channel(rng, m, n)});
    return obj;
}

// Objective through reference determinants.
inline double ref_value(const LogDetObjective &obj, const ComplexMatrix &s) {
    double v = 0.0;
    for (const LogDetTerm &t : obj.terms)
        v += t.weight * (ref_logdet(t.base + hsh(t.map, s)) - ref_logdet(t.base));
    return v;
}

// Central-difference gradient, recovered entrywise from Hermitian directions.
inline ComplexMatrix fd_gradient(const LogDetObjective &obj, const ComplexMatrix &s, double step) {
    const Index n = s.rows();
    ComplexMatrix g(n, n);
    auto directional = [&](const ComplexMatrix &e) {
        return (ref_value(obj, s + step * e) - ref_value(obj, s - step * e)) / (2.0 * step);
    };
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            ComplexMatrix e = ComplexMatrix::Zero(n, n);
            if (i == j) {
                e(i, i) = 1.0;
                g(i, i) = directional(e);
                continue;
            }
            e(i, j) = 1.0;
            e(j, i) = 1.0;
            const double re = directional(e) / 2.0;
            e(i, j) = Complex(0.0, 1.0);
            e(j, i) = Complex(0.0, -1.0);
            // tr(G E) = i (G_ji - G_ij) = 2 Im G_ij for Hermitian G
            const double im = directional(e) / 2.0;
            g(i, j) = Complex(re, im);
        }
    return g;
}

} // namespace omd::testing

#endif
