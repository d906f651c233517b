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

/*! \file quantum.hpp
    \brief Small-matrix quantum mechanics for the weak-measurement chain.

    Only two dimensions exist here: a qubit (2) and a qubit pair (4). Two-qubit
    states are always ordered system-outer, ancilla-inner, i.e. basis index
    2*s + m for system level s and ancilla level m. Projectors on the ancilla
    are I (x) P and the partial traces below follow the same convention.
*/

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "qfilter/error.hpp"

namespace qfilter {

using Complex = std::complex<double>;

namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double min_eigenvalue = -1e-10;
inline constexpr double bloch_norm = 1e-12;
inline constexpr double unitary = 1e-10;
inline constexpr double projector = 1e-12;
inline constexpr double zero_probability = 1e-14;
}  // namespace tol

/// Dense complex matrix of dimension 2 or 4 with finite entries.
class ComplexMatrix {
 public:
  using Storage = Eigen::MatrixXcd;

  explicit ComplexMatrix(Storage m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4)) {
      throw DimensionError("ComplexMatrix must be 2x2 or 4x4, got " + std::to_string(m_.rows()) + "x" +
                           std::to_string(m_.cols()));
    }
    for (Eigen::Index i = 0; i < m_.size(); ++i) {
      const Complex z = m_.data()[i];
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw InvalidStateError("ComplexMatrix has a non-finite entry");
      }
    }
  }

  static ComplexMatrix identity(int dim) { return ComplexMatrix(Storage::Identity(dim, dim)); }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Storage& data() const noexcept { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

 private:
  Storage m_;
};

inline double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Eigen::MatrixXcd& m, double eps = tol::hermitian) {
  return max_abs_diff(m, m.adjoint()) <= eps;
}

inline bool is_unitary(const ComplexMatrix& w, double eps = tol::unitary) {
  const auto& m = w.data();
  return max_abs_diff(m * m.adjoint(), Eigen::MatrixXcd::Identity(m.rows(), m.cols())) <= eps;
}

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
    const auto& d = m_.data();
    if (!is_hermitian(d)) throw InvalidStateError("density matrix is not Hermitian");
    if (std::abs(d.trace() - Complex(1.0, 0.0)) > tol::trace) {
      throw InvalidStateError("density matrix trace differs from 1");
    }
    if (min_eigenvalue() < tol::min_eigenvalue) {
      throw InvalidStateError("density matrix has a negative eigenvalue");
    }
  }

  /// Builds a state from a matrix that is a density matrix up to rounding:
  /// the Hermitian part is taken and the trace rescaled to 1. The eigenvalue
  /// check is skipped; use only on results of trace-preserving maps.
  static DensityMatrix assume_valid(const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw InvalidStateError("state has non-positive trace");
    h /= tr;
    return DensityMatrix(Unchecked{}, ComplexMatrix(std::move(h)));
  }

  static DensityMatrix maximally_mixed(int dim) {
    return DensityMatrix(ComplexMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim)));
  }

  int dim() const noexcept { return m_.dim(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  const Eigen::MatrixXcd& data() const noexcept { return m_.data(); }
  Complex operator()(int r, int c) const { return m_(r, c); }

  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_.data(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  double min_eigenvalue() const { return eigenvalues().minCoeff(); }

 private:
  struct Unchecked {};
  DensityMatrix(Unchecked, ComplexMatrix m) : m_(std::move(m)) {}

  ComplexMatrix m_;
};

/// Bloch vector of a qubit, norm at most 1.
class BlochVector {
 public:
  BlochVector(double t1, double t2, double t3) : theta_{t1, t2, t3} {
    for (double t : theta_) {
      if (!std::isfinite(t)) throw InvalidStateError("Bloch vector has a non-finite component");
    }
    if (norm() > 1.0 + tol::bloch_norm) throw InvalidStateError("Bloch vector norm exceeds 1");
  }
  explicit BlochVector(const std::array<double, 3>& t) : BlochVector(t[0], t[1], t[2]) {}

  double operator[](std::size_t i) const { return theta_.at(i); }
  const std::array<double, 3>& components() const noexcept { return theta_; }
  double norm() const { return std::sqrt(theta_[0] * theta_[0] + theta_[1] * theta_[1] + theta_[2] * theta_[2]); }

 private:
  std::array<double, 3> theta_;
};

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

inline Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

/// (I + theta . sigma) / 2
inline DensityMatrix bloch_to_density(const BlochVector& theta) {
  Eigen::MatrixXcd m = 0.5 * (Eigen::Matrix2cd::Identity() + theta[0] * pauli_x() + theta[1] * pauli_y() +
                              theta[2] * pauli_z());
  return DensityMatrix(ComplexMatrix(std::move(m)));
}

/// theta_i = Tr(rho sigma_i)
inline BlochVector density_to_bloch(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw DimensionError("density_to_bloch needs a 2x2 state");
  const Eigen::MatrixXcd& m = rho.data();
  const double t1 = (m * pauli_x()).trace().real();
  const double t2 = (m * pauli_y()).trace().real();
  const double t3 = (m * pauli_z()).trace().real();
  // Rounding can push a pure state a few ulp outside the ball.
  const double n = std::sqrt(t1 * t1 + t2 * t2 + t3 * t3);
  if (n > 1.0 && n <= 1.0 + tol::bloch_norm) return BlochVector(t1 / n, t2 / n, t3 / n);
  return BlochVector(t1, t2, t3);
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// system (x) ancilla
inline DensityMatrix kron(const DensityMatrix& system, const DensityMatrix& ancilla) {
  if (system.dim() != 2 || ancilla.dim() != 2) throw DimensionError("kron expects two qubit states");
  return DensityMatrix::assume_valid(kron(system.data(), ancilla.data()));
}

/// W = exp(-i a_y h sigma_y (x) sigma_y). Since (sigma_y (x) sigma_y)^2 = I the
/// exponential is cos(alpha) I - i sin(alpha) sigma_y (x) sigma_y, alpha = a_y h.
inline ComplexMatrix coupling_unitary(double a_y, double h) {
  const double alpha = a_y * h;
  const Eigen::MatrixXcd yy = kron(Eigen::MatrixXcd(pauli_y()), Eigen::MatrixXcd(pauli_y()));
  Eigen::MatrixXcd w = std::cos(alpha) * Eigen::MatrixXcd::Identity(4, 4) - Complex(0, std::sin(alpha)) * yy;
  return ComplexMatrix(std::move(w));
}

/// Real rotation mixing |00> and |11>, leaving |01>, |10> untouched.
inline ComplexMatrix swap_like_unitary(double phi) {
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(4, 4);
  const double c = std::cos(phi), s = std::sin(phi);
  w(0, 0) = c;
  w(0, 3) = s;
  w(1, 1) = 1;
  w(2, 2) = 1;
  w(3, 0) = -s;
  w(3, 3) = c;
  return ComplexMatrix(std::move(w));
}

/// W rho W^dagger
inline DensityMatrix evolve(const DensityMatrix& rho, const ComplexMatrix& w) {
  if (rho.dim() != w.dim()) throw DimensionError("evolve: state and unitary dimensions differ");
  if (!is_unitary(w)) throw ContractViolation("evolve: matrix is not unitary");
  return DensityMatrix::assume_valid(w.data() * rho.data() * w.data().adjoint());
}

enum class Observable { x, z };

inline Observable parse_observable(std::string_view tag) {
  if (tag == "x") return Observable::x;
  if (tag == "z") return Observable::z;
  throw ContractViolation("unknown observable '" + std::string(tag) + "' (expected x or z)");
}

inline const char* to_string(Observable o) { return o == Observable::x ? "x" : "z"; }

/// Orthogonal projector carrying the eigenvalue (+1 or -1) it reports.
class Projector {
 public:
  Projector(ComplexMatrix m, int label) : m_(std::move(m)), label_(label) {
    if (label != 1 && label != -1) throw ContractViolation("projector label must be +1 or -1");
    const auto& d = m_.data();
    if (!is_hermitian(d, tol::projector)) throw ContractViolation("projector is not Hermitian");
    if (max_abs_diff(d * d, d) > tol::projector) throw ContractViolation("projector is not idempotent");
  }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  const Eigen::MatrixXcd& data() const noexcept { return m_.data(); }
  int label() const noexcept { return label_; }
  int dim() const noexcept { return m_.dim(); }

 private:
  ComplexMatrix m_;
  int label_;
};

/// Ancilla eigenprojections I (x) P+ and I (x) P- of sigma_x or sigma_z.
inline std::pair<Projector, Projector> projector_set(Observable obs) {
  Eigen::MatrixXcd plus(2, 2), minus(2, 2);
  if (obs == Observable::x) {
    plus << 0.5, 0.5, 0.5, 0.5;
    minus << 0.5, -0.5, -0.5, 0.5;
  } else {
    plus << 1, 0, 0, 0;
    minus << 0, 0, 0, 1;
  }
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
  return {Projector(ComplexMatrix(kron(id, plus)), +1), Projector(ComplexMatrix(kron(id, minus)), -1)};
}

struct MeasurementOutcome {
  int label;
  double probability;
  DensityMatrix post_state;
};

inline double outcome_probability(const DensityMatrix& rho, const Projector& p) {
  if (rho.dim() != p.dim()) throw DimensionError("measure: state and projector dimensions differ");
  return (rho.data() * p.data()).trace().real();
}

/// von Neumann update P rho P / Tr(rho P).
inline MeasurementOutcome measure(const DensityMatrix& rho, const Projector& p) {
  const double prob = outcome_probability(rho, p);
  if (prob < tol::zero_probability) {
    throw ZeroProbabilityError("outcome " + std::to_string(p.label()) + " has zero probability");
  }
  Eigen::MatrixXcd post = p.data() * rho.data() * p.data();
  return {p.label(), std::min(prob, 1.0), DensityMatrix::assume_valid(post)};
}

inline void require_complete(std::span<const Projector> projectors) {
  if (projectors.empty()) throw ContractViolation("empty projector set");
  const int dim = projectors.front().dim();
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& p : projectors) {
    if (p.dim() != dim) throw DimensionError("projector set mixes dimensions");
    sum += p.data();
  }
  if (max_abs_diff(sum, Eigen::MatrixXcd::Identity(dim, dim)) > tol::projector) {
    throw ContractViolation("projector set does not sum to the identity");
  }
}

/// Born-rule draw over a complete projector set.
inline MeasurementOutcome sample_outcome(const DensityMatrix& rho, std::span<const Projector> projectors, Rng& rng) {
  require_complete(projectors);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t chosen = projectors.size();
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const double p = std::max(0.0, outcome_probability(rho, projectors[i]));
    acc += p;
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  if (chosen == projectors.size()) {
    // u landed in the rounding gap above the total; take the last outcome
    // with non-zero weight.
    for (std::size_t i = projectors.size(); i-- > 0;) {
      if (outcome_probability(rho, projectors[i]) >= tol::zero_probability) {
        chosen = i;
        break;
      }
    }
  }
  return measure(rho, projectors[chosen]);
}

inline MeasurementOutcome sample_outcome(const DensityMatrix& rho, const std::pair<Projector, Projector>& set,
                                         Rng& rng) {
  const std::array<Projector, 2> ps{set.first, set.second};
  return sample_outcome(rho, std::span<const Projector>(ps), rng);
}

enum class Keep { system, ancilla };

inline DensityMatrix partial_trace(const DensityMatrix& rho, Keep keep) {
  if (rho.dim() != 4) throw DimensionError("partial_trace needs a 4x4 state");
  const Eigen::MatrixXcd& m = rho.data();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 2; ++k) {
        out(a, b) += keep == Keep::system ? m(2 * a + k, 2 * b + k) : m(2 * k + a, 2 * k + b);
      }
    }
  }
  return DensityMatrix::assume_valid(out);
}

/// One round of the indirect measurement: prepare system (x) ancilla, evolve,
/// measure the ancilla, return the reduced system state.
struct WeakStep {
  int label;
  double probability;
  DensityMatrix system;
};

inline WeakStep weak_measurement_step(const DensityMatrix& system, const DensityMatrix& ancilla,
                                      const ComplexMatrix& w, const std::pair<Projector, Projector>& projectors,
                                      Rng& rng) {
  const DensityMatrix evolved = evolve(kron(system, ancilla), w);
  MeasurementOutcome out = sample_outcome(evolved, projectors, rng);
  return {out.label, out.probability, partial_trace(out.post_state, Keep::system)};
}

}  // namespace qfilter
