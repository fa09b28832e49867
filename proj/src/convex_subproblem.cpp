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

#include "omd/convex_subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace omd {

void LogDetObjective::validate() const {
    if (terms.empty())
        throw InvalidConfig("LogDetObjective: no terms");
    if (!(power >= 0.0) || !std::isfinite(power))
        throw InvalidConfig("LogDetObjective: power must be finite and nonnegative");
    double total = 0.0;
    const Index n = terms.front().map.cols();
    for (const LogDetTerm &t : terms) {
        if (!(t.weight >= 0.0))
            throw InvalidConfig("LogDetObjective: negative weight");
        total += t.weight;
        if (t.map.cols() != n)
            throw DimensionMismatch("LogDetObjective: terms disagree on the transmit dimension");
        if (t.base.rows() != t.map.rows() || t.base.cols() != t.map.rows())
            throw DimensionMismatch("LogDetObjective: base must be square with the map's row count");
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidConfig("LogDetObjective: weights sum to " + std::to_string(total) +
                            ", expected 1");
}

Index LogDetObjective::transmit_dim() const {
    return terms.empty() ? 0 : terms.front().map.cols();
}

double LogDetObjective::value(const ComplexMatrix &s) const {
    double v = 0.0;
    for (const LogDetTerm &t : terms) {
        if (t.weight == 0.0)
            continue;
        v += t.weight * (logdet(t.base + congruence(t.map, s)) - logdet(t.base));
    }
    return v;
}

ComplexMatrix gradient(const LogDetObjective &obj, const ComplexMatrix &s) {
    const Index n = obj.transmit_dim();
    ComplexMatrix g = ComplexMatrix::Zero(n, n);
    for (const LogDetTerm &t : obj.terms) {
        if (t.weight == 0.0)
            continue;
        const ComplexMatrix k = t.base + congruence(t.map, s);
        g += t.weight * (t.map.adjoint() * solve_pd(k, t.map));
    }
    return hermitian_part(g);
}

HermitianPsd project_psd_trace(const ComplexMatrix &m, double power) {
    if (!(power >= 0.0))
        throw InvalidConfig("project_psd_trace: negative power");
    const Eigh dec = eigh(m);
    RealVector lambda = dec.values.cwiseMax(0.0);
    const double total = lambda.sum();
    if (total > power) {
        // Uniform shift tau with sum (lambda_i - tau)^+ = power; values are descending.
        double prefix = 0.0;
        double tau = 0.0;
        const Index n = lambda.size();
        for (Index k = 0; k < n; ++k) {
            prefix += lambda(k);
            const double candidate = (prefix - power) / static_cast<double>(k + 1);
            if (k + 1 == n || lambda(k + 1) <= candidate) {
                tau = candidate;
                break;
            }
        }
        lambda = (lambda.array() - tau).cwiseMax(0.0).matrix();
    }
    const ComplexMatrix s =
        dec.vectors * lambda.cast<Complex>().asDiagonal() * dec.vectors.adjoint();
    return HermitianPsd(hermitian_part(s));
}

namespace {

double inner(const ComplexMatrix &a, const ComplexMatrix &b) {
    return (a.adjoint() * b).trace().real();
}

// Effective objective: terms with zero weight removed.
LogDetObjective active_terms(const LogDetObjective &obj) {
    LogDetObjective out;
    out.power = obj.power;
    for (const LogDetTerm &t : obj.terms)
        if (t.weight > 0.0)
            out.terms.push_back(t);
    return out;
}

} // namespace

SubproblemResult solve(const LogDetObjective &obj_in, const SubproblemOptions &opt) {
    obj_in.validate();
    const LogDetObjective obj = active_terms(obj_in);
    const Index n = obj.transmit_dim();

    SubproblemResult out;
    if (obj.power == 0.0) {
        out.covariance = HermitianPsd::zero(n);
        out.converged = true;
        return out;
    }

    ComplexMatrix s = opt.initial && opt.initial->rows() == n && opt.initial->cols() == n
                          ? project_psd_trace(*opt.initial, obj.power).matrix()
                          : ComplexMatrix::Identity(n, n) * Complex(obj.power / n, 0.0);
    double f = obj.value(s);
    ComplexMatrix g = gradient(obj, s);
    double step = 1.0;
    bool have_bb = false;

    constexpr double kSufficient = 1e-4;
    constexpr int kMaxHalvings = 80;

    int it = 0;
    double pg_norm = 0.0;
    for (; it < opt.max_iter; ++it) {
        pg_norm = (project_psd_trace(s + g, obj.power).matrix() - s).norm();
        if (pg_norm <= opt.tol) {
            out.converged = true;
            break;
        }
        if (!have_bb)
            step = std::max(1.0, obj.power / std::max(g.norm(), 1e-300));

        ComplexMatrix trial;
        double f_trial = f;
        bool accepted = false;
        for (int h = 0; h < kMaxHalvings; ++h) {
            trial = project_psd_trace(s + step * g, obj.power).matrix();
            f_trial = obj.value(trial);
            if (f_trial >= f + kSufficient * inner(g, trial - s)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || (trial - s).norm() == 0.0) {
            // No representable ascent left: stationary to machine precision.
            out.converged = true;
            break;
        }

        const ComplexMatrix g_trial = gradient(obj, trial);
        const ComplexMatrix ds = trial - s;
        const double curvature = -inner(ds, g_trial - g);
        if (curvature > 0.0) {
            step = std::clamp(inner(ds, ds) / curvature, 1e-12, 1e12);
            have_bb = true;
        } else {
            step *= 2.0;
        }
        s = trial;
        f = f_trial;
        g = g_trial;
    }

    out.covariance = HermitianPsd(hermitian_part(s));
    out.value = f;
    out.step_norm = pg_norm;
    out.iterations = it;
    return out;
}

} // namespace omd
