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

#ifndef OMD_MATRIX_CORE_HPP
#define OMD_MATRIX_CORE_HPP

#include <complex>

#include <Eigen/Dense>

#include "omd/errors.hpp"

namespace omd {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;

// Hermitian positive-semidefinite matrix (transmit covariance, noise
// covariance). Construction symmetrizes the input and clamps eigenvalues
// in [-tol, 0) to zero; anything further from the cone is rejected.
class HermitianPsd {
  public:
    HermitianPsd() = default;
    explicit HermitianPsd(const ComplexMatrix &m);

    static HermitianPsd zero(Index dim);
    static HermitianPsd scaled_identity(Index dim, double scale);

    const ComplexMatrix &matrix() const { return m_; }
    Index dim() const { return m_.rows(); }
    double trace() const { return m_.trace().real(); }

  private:
    struct Trusted {};
    HermitianPsd(ComplexMatrix m, Trusted) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

enum class LogDetMode { Plain, ShiftedIdentity };

double max_abs(const ComplexMatrix &m);
bool all_finite(const ComplexMatrix &m);
bool is_hermitian(const ComplexMatrix &m, double tol = kHermitianTol);

// (M + M^H) / 2
ComplexMatrix hermitian_part(const ComplexMatrix &m);

// H S H^H
ComplexMatrix congruence(const ComplexMatrix &h, const ComplexMatrix &s);

// Natural-log determinant of M (Plain, M must be PD) or of I + M
// (ShiftedIdentity). Cholesky based; throws NonPositiveDefinite on a
// non-positive pivot.
double logdet(const ComplexMatrix &m, LogDetMode mode = LogDetMode::Plain);
double logdet(const HermitianPsd &m, LogDetMode mode);

struct Eigh {
    RealVector values;    // descending
    ComplexMatrix vectors; // columns match values
};

Eigh eigh(const ComplexMatrix &m);

struct Svd {
    ComplexMatrix u;  // rows x T
    RealVector sigma; // T, descending, T = min(rows, cols)
    ComplexMatrix v;  // cols x T
};

Svd svd(const ComplexMatrix &h);

// Principal square root and its inverse for a Hermitian PSD / PD argument.
ComplexMatrix sqrt_psd(const ComplexMatrix &m);
ComplexMatrix inverse_sqrt_pd(const ComplexMatrix &m);

// noise_cov^{-1/2} * H with the Hermitian principal root.
ComplexMatrix whiten(const ComplexMatrix &noise_cov, const ComplexMatrix &h);

// Solve M X = B for Hermitian PD M.
ComplexMatrix solve_pd(const ComplexMatrix &m, const ComplexMatrix &b);

} // namespace omd

#endif
