// Copyright 2026 The qfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Random inputs and independent reference computations shared by the unit
// tests and the acceptance runner.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "qfilter/qfilter.hpp"

namespace qfilter::testing {

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline BlochVector random_bloch(Rng& rng, double max_norm = 1.0) {
  std::normal_distribution<double> g;
  Eigen::Vector3d v(g(rng), g(rng), g(rng));
  v.normalize();
  const double r = max_norm * std::cbrt(uniform(rng, 0.0, 1.0));
  return BlochVector(r * v(0), r * v(1), r * v(2));
}

inline DensityMatrix random_qubit(Rng& rng) { return bloch_to_density(random_bloch(rng)); }

/// G G^dagger / Tr, G complex Gaussian: full rank almost surely.
inline DensityMatrix random_density(Rng& rng, int dim) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
  Eigen::MatrixXcd rho = m * m.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(ComplexMatrix(rho));
}

/// Q factor of a complex Gaussian matrix, phases fixed by R's diagonal.
inline ComplexMatrix random_unitary(Rng& rng, int dim) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return ComplexMatrix(q);
}

/// exp(-i alpha Y (x) Y) by its power series.
inline Eigen::MatrixXcd taylor_coupling(double alpha, int terms = 60) {
  const Eigen::MatrixXcd yy = kron(Eigen::MatrixXcd(pauli_y()), Eigen::MatrixXcd(pauli_y()));
  const Eigen::MatrixXcd x = Complex(0, -alpha) * yy;
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(4, 4), sum = term;
  for (int n = 1; n < terms; ++n) {
    term = (term * x / static_cast<double>(n)).eval();
    sum += term;
  }
  return sum;
}

/// Log density of N(0, S) at v through a Cholesky factor of S.
inline double gaussian_log_density(const Eigen::MatrixXd& S, const Eigen::VectorXd& v) {
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  const Eigen::VectorXd z = llt.matrixL().solve(v);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + logdet + static_cast<double>(v.size()) * std::log(2.0 * std::numbers::pi));
}

/// Covariance of (x_1..x_n) for the stationary linear-Gaussian pair.
inline Eigen::MatrixXd linear_observation_covariance(const LinearGaussianModel& m, int n) {
  const double var_s = m.prior_variance();
  Eigen::MatrixXd S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) = m.A * m.A * std::pow(m.a, std::abs(i - j)) * var_s + (i == j ? m.B * m.B : 0.0);
  return S;
}

/// Posterior variance of the stationary Kalman recursion: with M the
/// predicted variance, A^2 M^2 + (B^2 (1 - a^2) - A^2 b^2) M - b^2 B^2 = 0
/// and P = M B^2 / (A^2 M + B^2).
inline double riccati_posterior_variance(const LinearGaussianModel& m) {
  const double qa = m.A * m.A, qb = m.B * m.B * (1.0 - m.a * m.a) - m.A * m.A * m.b * m.b, qc = -m.b * m.b * m.B * m.B;
  const double M = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
  return M * m.B * m.B / (m.A * m.A * M + m.B * m.B);
}

inline LinearGaussianModel random_linear(Rng& rng) {
  return {uniform(rng, -0.95, 0.95), uniform(rng, 0.1, 2.0), uniform(rng, 0.2, 2.0), uniform(rng, 0.1, 2.0)};
}

}  // namespace qfilter::testing
