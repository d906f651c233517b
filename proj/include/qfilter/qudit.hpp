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

/*! \file qudit.hpp
    \brief Spin-3/2 qudit viewed as two artificial qubits.

    Matrix index i = 0..3 carries the spin projection 3/2, 1/2, -1/2, -3/2.
    Under this labeling the index splits as i = 2 s + m, so the first
    artificial qubit (the unobserved one) sums over m and the second (the
    accessible levels, playing the ancilla) sums over s.
*/

#include <array>
#include <utility>
#include <vector>

#include "qfilter/quantum.hpp"

namespace qfilter {

/// Spin projections indexed by matrix row.
inline constexpr std::array<double, 4> kSpinLabels{1.5, 0.5, -0.5, -1.5};

inline int spin_index(double label) {
  for (int i = 0; i < 4; ++i) {
    if (kSpinLabels[static_cast<std::size_t>(i)] == label) return i;
  }
  throw DimensionError("spin label must be one of 3/2, 1/2, -1/2, -3/2");
}

class QuditState {
 public:
  explicit QuditState(DensityMatrix rho) : rho_(std::move(rho)) {
    if (rho_.dim() != 4) throw DimensionError("qudit state must be 4x4");
  }

  const DensityMatrix& density() const noexcept { return rho_; }
  const Eigen::MatrixXcd& data() const noexcept { return rho_.data(); }

  /// rho_{m1, m2} addressed by spin projections.
  Complex at(double m1, double m2) const { return rho_(spin_index(m1), spin_index(m2)); }

  /// Level populations ordered 3/2, 1/2, -1/2, -3/2.
  std::array<double, 4> populations() const {
    return {rho_(0, 0).real(), rho_(1, 1).real(), rho_(2, 2).real(), rho_(3, 3).real()};
  }

 private:
  DensityMatrix rho_;
};

inline QuditState relabel(const DensityMatrix& rho) { return QuditState(rho); }
inline DensityMatrix inverse_relabel(const QuditState& q) { return q.density(); }

/// First: rho_{3/2,3/2}+rho_{1/2,1/2} in the corner, second:
/// rho_{3/2,3/2}+rho_{-1/2,-1/2}. These coincide with the keep=system and
/// keep=ancilla partial traces.
inline std::pair<DensityMatrix, DensityMatrix> artificial_qubits(const QuditState& q) {
  const Eigen::MatrixXcd& r = q.data();
  Eigen::MatrixXcd first(2, 2), second(2, 2);
  first << r(0, 0) + r(1, 1), r(0, 2) + r(1, 3),
           r(2, 0) + r(3, 1), r(2, 2) + r(3, 3);
  second << r(0, 0) + r(2, 2), r(0, 1) + r(2, 3),
            r(1, 0) + r(3, 2), r(1, 1) + r(3, 3);
  return {DensityMatrix::assume_valid(first), DensityMatrix::assume_valid(second)};
}

/// Two disjoint index pairs covering 0..3. Side `first` is assigned outcome
/// +1 by coarse_correlation.
struct Partition {
  std::array<int, 2> first;
  std::array<int, 2> second;

  void validate() const {
    std::array<int, 4> seen{};
    for (int i : {first[0], first[1], second[0], second[1]}) {
      if (i < 0 || i > 3) throw ContractViolation("partition index out of range");
      if (seen[static_cast<std::size_t>(i)]++) throw ContractViolation("partition repeats a level");
    }
  }

  int side(int level) const { return level == first[0] || level == first[1] ? +1 : -1; }

  /// {3/2, -1/2} vs {1/2, -3/2}: fourth and second levels against the rest.
  /// Marginal of the accessible (ancilla) artificial qubit.
  static Partition levels_4_2() { return {{0, 2}, {1, 3}}; }
  /// {3/2, 1/2} vs {-1/2, -3/2}: marginal of the unobserved artificial qubit.
  static Partition levels_4_3() { return {{0, 1}, {2, 3}}; }
  /// Two-coin reading of the four outcomes (11, 12, 21, 22).
  static Partition first_coin() { return levels_4_3(); }
  static Partition second_coin() { return levels_4_2(); }
};

struct CoarseGraining {
  Partition partition;
  std::array<double, 2> probabilities;
};

inline void require_distribution(const std::array<double, 4>& p) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ContractViolation("probabilities must be finite and nonnegative");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ContractViolation("probabilities must sum to 1");
}

inline CoarseGraining coarse_grain(const std::array<double, 4>& p, const Partition& part) {
  require_distribution(p);
  part.validate();
  const auto at = [&](int i) { return p[static_cast<std::size_t>(i)]; };
  return {part, {at(part.first[0]) + at(part.first[1]), at(part.second[0]) + at(part.second[1])}};
}

/// E[AB] - E[A]E[B], A and B the +-1 sides of the two partitions.
inline double coarse_correlation(const std::array<double, 4>& p, const Partition& a, const Partition& b) {
  require_distribution(p);
  a.validate();
  b.validate();
  double ea = 0.0, eb = 0.0, eab = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double w = p[static_cast<std::size_t>(i)];
    ea += w * a.side(i);
    eb += w * b.side(i);
    eab += w * a.side(i) * b.side(i);
  }
  return eab - ea * eb;
}

/// Whether q equals the product of its artificial qubits within `eps`.
inline bool is_product(const QuditState& q, double eps = 1e-12) {
  const auto [s, m] = artificial_qubits(q);
  return max_abs_diff(q.data(), kron(s.data(), m.data())) <= eps;
}

enum class QuditRegime { product, non_product };

inline const char* to_string(QuditRegime r) { return r == QuditRegime::product ? "product" : "non-product"; }

struct QuditStep {
  int label;
  double probability;
  /// State the next round starts from.
  QuditState state;
};

/// Weak measurement of a single qudit through its accessible levels.
///
/// Each round evolves the full 4x4 state under W, measures I (x) P on the
/// accessible levels, keeps the unobserved artificial qubit of the post
/// state and re-prepares the accessible levels in the initial ancilla state.
/// For q = relabel(rho_S (x) rho_M) this is the two-qubit chain step for
/// step, including the random draws.
class QuditObservationModel {
 public:
  QuditObservationModel(QuditState initial, ComplexMatrix evolution, Observable observable)
      : initial_(std::move(initial)),
        ancilla_(artificial_qubits(initial_).second),
        w_(std::move(evolution)),
        projectors_(projector_set(observable)),
        regime_(is_product(initial_) ? QuditRegime::product : QuditRegime::non_product) {
    if (w_.dim() != 4) throw DimensionError("qudit evolution must be 4x4");
    if (!is_unitary(w_)) throw ContractViolation("qudit evolution is not unitary");
  }

  const QuditState& initial() const noexcept { return initial_; }
  const DensityMatrix& ancilla() const noexcept { return ancilla_; }
  QuditRegime regime() const noexcept { return regime_; }

  /// P(+1), P(-1) for the next round from q.
  std::pair<double, double> outcome_probabilities(const QuditState& q) const {
    const DensityMatrix evolved = evolve(q.density(), w_);
    return {outcome_probability(evolved, projectors_.first), outcome_probability(evolved, projectors_.second)};
  }

  QuditStep step(const QuditState& q, Rng& rng) const {
    const DensityMatrix evolved = evolve(q.density(), w_);
    MeasurementOutcome out = sample_outcome(evolved, projectors_, rng);
    const DensityMatrix system = artificial_qubits(QuditState(out.post_state)).first;
    return {out.label, out.probability, QuditState(kron(system, ancilla_))};
  }

  std::vector<QuditStep> run(std::size_t rounds, Rng& rng) const {
    std::vector<QuditStep> out;
    out.reserve(rounds);
    QuditState q = initial_;
    for (std::size_t k = 0; k < rounds; ++k) {
      out.push_back(step(q, rng));
      q = out.back().state;
    }
    return out;
  }

 private:
  QuditState initial_;
  DensityMatrix ancilla_;
  ComplexMatrix w_;
  std::pair<Projector, Projector> projectors_;
  QuditRegime regime_;
};

}  // namespace qfilter
