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

#include "omd/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace omd {

namespace {

void require_square(const ComplexMatrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

} // namespace

HermitianPsd::HermitianPsd(const ComplexMatrix &m) {
    require_square(m, "HermitianPsd");
    if (!all_finite(m))
        throw InfeasibleCovariance("HermitianPsd: non-finite entry");
    if (!is_hermitian(m))
        throw InfeasibleCovariance("HermitianPsd: matrix is not Hermitian");

    ComplexMatrix h = hermitian_part(m);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const RealVector &lambda = es.eigenvalues(); // ascending
    const double top = lambda(lambda.size() - 1);
    const double floor = -kPsdTol * (1.0 + std::max(top, 0.0));
    if (lambda(0) < floor)
        throw InfeasibleCovariance("HermitianPsd: smallest eigenvalue " + std::to_string(lambda(0)) +
                                   " is below the PSD tolerance");
    if (lambda(0) < 0.0) {
        RealVector clamped = lambda.cwiseMax(0.0);
        h = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint();
        h = hermitian_part(h);
    }
    m_ = std::move(h);
}

HermitianPsd HermitianPsd::zero(Index dim) {
    return HermitianPsd(ComplexMatrix::Zero(dim, dim), Trusted{});
}

HermitianPsd HermitianPsd::scaled_identity(Index dim, double scale) {
    if (scale < 0.0)
        throw InfeasibleCovariance("HermitianPsd: negative identity scale");
    return HermitianPsd(ComplexMatrix::Identity(dim, dim) * Complex(scale, 0.0), Trusted{});
}

double max_abs(const ComplexMatrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix &m) {
    return m.allFinite();
}

bool is_hermitian(const ComplexMatrix &m, double tol) {
    if (m.rows() != m.cols())
        return false;
    return max_abs(m - m.adjoint()) <= tol * (1.0 + max_abs(m));
}

ComplexMatrix hermitian_part(const ComplexMatrix &m) {
    return (m + m.adjoint()) * 0.5;
}

ComplexMatrix congruence(const ComplexMatrix &h, const ComplexMatrix &s) {
    if (h.cols() != s.rows() || s.rows() != s.cols())
        throw DimensionMismatch("congruence: H is " + std::to_string(h.rows()) + "x" +
                                std::to_string(h.cols()) + ", S is " + std::to_string(s.rows()) +
                                "x" + std::to_string(s.cols()));
    return hermitian_part(h * s * h.adjoint());
}

double logdet(const ComplexMatrix &m, LogDetMode mode) {
    require_square(m, "logdet");
    ComplexMatrix a = hermitian_part(m);
    if (mode == LogDetMode::ShiftedIdentity)
        a.diagonal().array() += 1.0;
    if (!all_finite(a))
        throw NonPositiveDefinite("logdet: non-finite entry (overflow in the argument?)");

    Eigen::LLT<ComplexMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw NonPositiveDefinite("logdet: non-positive pivot in Cholesky factorization");
    const auto diag = llt.matrixLLT().diagonal();
    double acc = 0.0;
    for (Index i = 0; i < diag.size(); ++i) {
        const double d = diag(i).real();
        if (!(d > 0.0))
            throw NonPositiveDefinite("logdet: non-positive pivot in Cholesky factorization");
        acc += 2.0 * std::log(d);
    }
    return acc;
}

double logdet(const HermitianPsd &m, LogDetMode mode) {
    return logdet(m.matrix(), mode);
}

Eigh eigh(const ComplexMatrix &m) {
    require_square(m, "eigh");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m));
    const Index n = m.rows();
    Eigh out{RealVector(n), ComplexMatrix(n, n)};
    // Eigen returns ascending order
    for (Index i = 0; i < n; ++i) {
        out.values(i) = es.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

Svd svd(const ComplexMatrix &h) {
    const Index t = std::min(h.rows(), h.cols());
    Eigen::JacobiSVD<ComplexMatrix> js(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Svd out{js.matrixU(), js.singularValues(), js.matrixV()};

    // JacobiSVD already sorts descending; keep the contract explicit.
    std::vector<Index> order(static_cast<std::size_t>(t));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return out.sigma(a) > out.sigma(b); });
    Svd sorted{ComplexMatrix(h.rows(), t), RealVector(t), ComplexMatrix(h.cols(), t)};
    for (Index i = 0; i < t; ++i) {
        const Index src = order[static_cast<std::size_t>(i)];
        sorted.sigma(i) = out.sigma(src);
        sorted.u.col(i) = out.u.col(src);
        sorted.v.col(i) = out.v.col(src);
    }
    return sorted;
}

ComplexMatrix sqrt_psd(const ComplexMatrix &m) {
    require_square(m, "sqrt_psd");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m));
    const RealVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return hermitian_part(es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint());
}

ComplexMatrix inverse_sqrt_pd(const ComplexMatrix &m) {
    require_square(m, "inverse_sqrt_pd");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m));
    if (!(es.eigenvalues()(0) > 0.0))
        throw NonPositiveDefinite("inverse_sqrt_pd: matrix is not positive definite");
    const RealVector inv_root = es.eigenvalues().cwiseSqrt().cwiseInverse();
    return hermitian_part(es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().adjoint());
}

ComplexMatrix whiten(const ComplexMatrix &noise_cov, const ComplexMatrix &h) {
    require_square(noise_cov, "whiten");
    if (noise_cov.rows() != h.rows())
        throw DimensionMismatch("whiten: noise covariance is " + std::to_string(noise_cov.rows()) +
                                "x" + std::to_string(noise_cov.cols()) + " but channel has " +
                                std::to_string(h.rows()) + " rows");
    return inverse_sqrt_pd(noise_cov) * h;
}

ComplexMatrix solve_pd(const ComplexMatrix &m, const ComplexMatrix &b) {
    require_square(m, "solve_pd");
    if (m.rows() != b.rows())
        throw DimensionMismatch("solve_pd: row count mismatch");
    Eigen::LLT<ComplexMatrix> llt(hermitian_part(m));
    if (llt.info() != Eigen::Success)
        throw NonPositiveDefinite("solve_pd: matrix is not positive definite");
    return llt.solve(b);
}

} // namespace omd
