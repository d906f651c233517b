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

#include <gtest/gtest.h>

#include "support.hpp"

using namespace qfilter;
using namespace qfilter::testing;

namespace {

Eigen::MatrixXcd diag4(double a, double b, double c, double d) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  m(3, 3) = d;
  return m;
}

}  // namespace

TEST(Bloch, MaximallyMixedAndPure) {
  const DensityMatrix mixed = bloch_to_density(BlochVector(0, 0, 0));
  EXPECT_LT(max_abs_diff(mixed.data(), Eigen::MatrixXcd::Identity(2, 2) / 2.0), 1e-15);

  const DensityMatrix up = bloch_to_density(BlochVector(0, 0, 1));
  EXPECT_NEAR(up(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(up(1, 1).real(), 0.0, 1e-15);
  const auto ev = up.eigenvalues();
  EXPECT_NEAR(ev.minCoeff(), 0.0, 1e-14);
  EXPECT_NEAR(ev.maxCoeff(), 1.0, 1e-14);
}

TEST(Bloch, RoundTripOnRandomVectors) {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const BlochVector t = random_bloch(rng);
    const BlochVector back = density_to_bloch(bloch_to_density(t));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(back[k], t[k], 1e-12);
  }
}

TEST(Bloch, RejectsOutsideBall) {
  EXPECT_THROW(BlochVector(1.0, 0.1, 0.0), InvalidStateError);
  EXPECT_THROW(BlochVector(std::nan(""), 0.0, 0.0), InvalidStateError);
}

TEST(DensityMatrix, RejectsInvalidMatrices) {
  Eigen::MatrixXcd not_hermitian(2, 2);
  not_hermitian << 0.5, 0.1, 0.2, 0.5;
  EXPECT_THROW(DensityMatrix(ComplexMatrix(not_hermitian)), InvalidStateError);

  Eigen::MatrixXcd bad_trace = Eigen::MatrixXcd::Identity(2, 2);
  EXPECT_THROW(DensityMatrix(ComplexMatrix(bad_trace)), InvalidStateError);

  Eigen::MatrixXcd negative(2, 2);
  negative << 1.2, 0, 0, -0.2;
  EXPECT_THROW(DensityMatrix(ComplexMatrix(negative)), InvalidStateError);

  EXPECT_THROW(ComplexMatrix(Eigen::MatrixXcd::Identity(3, 3)), DimensionError);
}

TEST(Kron, OrdersSystemOutside) {
  // rho_S = diag(r11, r22), rho_M = diag(R11, R22): the joint diagonal runs
  // r11 R11, r11 R22, r22 R11, r22 R22.
  const double r11 = 0.7, R11 = 0.2;
  const DensityMatrix s = bloch_to_density(BlochVector(0, 0, 2 * r11 - 1));
  const DensityMatrix m = bloch_to_density(BlochVector(0, 0, 2 * R11 - 1));
  const DensityMatrix j = kron(s, m);
  const Eigen::MatrixXcd want = diag4(r11 * R11, r11 * (1 - R11), (1 - r11) * R11, (1 - r11) * (1 - R11));
  EXPECT_LT(max_abs_diff(j.data(), want), 1e-15);
}

TEST(Kron, TraceAndPartialTraceInvertProduct) {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const DensityMatrix s = random_qubit(rng), m = random_qubit(rng);
    const DensityMatrix j = kron(s, m);
    EXPECT_NEAR(j.data().trace().real(), 1.0, 1e-12);
    EXPECT_LT(max_abs_diff(partial_trace(j, Keep::system).data(), s.data()), 1e-12);
    EXPECT_LT(max_abs_diff(partial_trace(j, Keep::ancilla).data(), m.data()), 1e-12);
  }
}

TEST(PartialTrace, ResultIsAState) {
  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    const DensityMatrix rho = random_density(rng, 4);
    for (Keep k : {Keep::system, Keep::ancilla}) {
      const DensityMatrix r = partial_trace(rho, k);
      EXPECT_TRUE(is_hermitian(r.data()));
      EXPECT_NEAR(r.data().trace().real(), 1.0, 1e-12);
      EXPECT_GE(r.min_eigenvalue(), -1e-12);
    }
  }
  EXPECT_THROW(partial_trace(DensityMatrix::maximally_mixed(2), Keep::system), DimensionError);
}

TEST(CouplingUnitary, MatchesPowerSeries) {
  for (double alpha : {0.0, 0.3, std::numbers::pi / 4, std::numbers::pi / 2, 2.1, std::numbers::pi}) {
    const ComplexMatrix w = coupling_unitary(1.0, alpha);
    EXPECT_LT(max_abs_diff(w.data(), taylor_coupling(alpha)), 1e-12) << "alpha " << alpha;
    EXPECT_TRUE(is_unitary(w));
  }
  EXPECT_LT(max_abs_diff(coupling_unitary(1.0, 0.0).data(), Eigen::MatrixXcd::Identity(4, 4)), 1e-15);
  EXPECT_LT(max_abs_diff(coupling_unitary(1.0, std::numbers::pi).data(), -Eigen::MatrixXcd::Identity(4, 4)), 1e-15);
  // Only the product a_y h matters.
  EXPECT_LT(max_abs_diff(coupling_unitary(2.0, 0.25).data(), coupling_unitary(0.5, 1.0).data()), 1e-15);
}

TEST(Evolve, PreservesSpectrum) {
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    const DensityMatrix rho = random_density(rng, 4);
    const DensityMatrix out = evolve(rho, random_unitary(rng, 4));
    EXPECT_LT((out.eigenvalues() - rho.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Evolve, RejectsNonUnitaryAndDimensionMismatch) {
  Eigen::MatrixXcd not_unitary = Eigen::MatrixXcd::Identity(4, 4);
  not_unitary(0, 0) = 2.0;
  EXPECT_THROW(evolve(DensityMatrix::maximally_mixed(4), ComplexMatrix(not_unitary)), ContractViolation);
  EXPECT_THROW(evolve(DensityMatrix::maximally_mixed(2), coupling_unitary(1, 0.2)), DimensionError);
}

TEST(Evolve, IdentityAndCancellingPair) {
  Rng rng(15);
  const DensityMatrix rho = random_density(rng, 4);
  EXPECT_LT(max_abs_diff(evolve(rho, ComplexMatrix::identity(4)).data(), rho.data()), 1e-15);
  const ComplexMatrix w = random_unitary(rng, 4);
  const ComplexMatrix w_inv(w.data().adjoint());
  EXPECT_LT(max_abs_diff(evolve(evolve(rho, w), w_inv).data(), rho.data()), 1e-12);
}

TEST(Projector, Validation) {
  Eigen::MatrixXcd half = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  EXPECT_THROW(Projector(ComplexMatrix(half), 1), ContractViolation);
  EXPECT_THROW(Projector(ComplexMatrix::identity(2), 0), ContractViolation);
  const auto [p, m] = projector_set(Observable::z);
  const std::array<Projector, 1> incomplete{p};
  EXPECT_THROW(require_complete(incomplete), ContractViolation);
  const std::array<Projector, 2> complete{p, m};
  EXPECT_NO_THROW(require_complete(complete));
  EXPECT_THROW(parse_observable("y"), ContractViolation);
}

TEST(Measure, ProbabilitiesSumToOneAndRepeatIsCertain) {
  Rng rng(16);
  for (Observable obs : {Observable::x, Observable::z}) {
    const auto [p, m] = projector_set(obs);
    for (int i = 0; i < 300; ++i) {
      const DensityMatrix rho = random_density(rng, 4);
      EXPECT_NEAR(outcome_probability(rho, p) + outcome_probability(rho, m), 1.0, 1e-12);
      const MeasurementOutcome out = measure(rho, p);
      EXPECT_NEAR(out.post_state.data().trace().real(), 1.0, 1e-12);
      EXPECT_NEAR(outcome_probability(out.post_state, p), 1.0, 1e-12);
      EXPECT_GE(out.post_state.min_eigenvalue(), -1e-12);
    }
  }
}

TEST(Measure, ZeroProbabilityOutcomeThrows) {
  const auto [p, m] = projector_set(Observable::z);
  // Ancilla in |0>: outcome -1 is impossible.
  const DensityMatrix rho = kron(DensityMatrix::maximally_mixed(2), bloch_to_density(BlochVector(0, 0, 1)));
  EXPECT_THROW(measure(rho, m), ZeroProbabilityError);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_outcome(rho, projector_set(Observable::z), rng).label, 1);
}

TEST(Measure, SamplingFrequenciesFollowBornRule) {
  Rng rng(17);
  const DensityMatrix rho = random_density(rng, 4);
  const auto set = projector_set(Observable::x);
  const double p_plus = outcome_probability(rho, set.first);
  const int n = 40000;
  int plus = 0;
  for (int i = 0; i < n; ++i) plus += sample_outcome(rho, set, rng).label > 0;
  const double se = std::sqrt(p_plus * (1 - p_plus) / n);
  EXPECT_NEAR(plus / static_cast<double>(n), p_plus, 5 * se);
}

TEST(Measure, SameSeedSameOutcomes) {
  Rng a(99), b(99);
  Rng src(5);
  const DensityMatrix rho = random_density(src, 4);
  const auto set = projector_set(Observable::x);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(sample_outcome(rho, set, a).label, sample_outcome(rho, set, b).label);
}

// System theta_S = [0, s, 0], ancilla theta_M = [0, 0, c], sigma_x on the
// ancilla at coupling angle pi/4: P(+-) = (1 +- s c)/2 and the system's y
// component moves to (s +- c)/(1 +- c s).
TEST(WeakMeasurement, ProbeAngleGivesProductProbabilityAndMobiusUpdate) {
  Rng rng(18);
  const auto set = projector_set(Observable::x);
  const ComplexMatrix w = coupling_unitary(1.0, kProbeAngle);
  for (int i = 0; i < 200; ++i) {
    const double s = uniform(rng, -0.99, 0.99), c = uniform(rng, -0.99, 0.99);
    const DensityMatrix joint = evolve(kron(bloch_to_density(BlochVector(0, s, 0)),
                                            bloch_to_density(BlochVector(0, 0, c))), w);
    EXPECT_NEAR(outcome_probability(joint, set.first), 0.5 * (1 + s * c), 1e-12);
    EXPECT_NEAR(outcome_probability(joint, set.second), 0.5 * (1 - s * c), 1e-12);
    for (const Projector& p : {set.first, set.second}) {
      const BlochVector after = density_to_bloch(partial_trace(measure(joint, p).post_state, Keep::system));
      EXPECT_NEAR(after[1], mobius_update(s, c, p.label()), 1e-12);
      EXPECT_NEAR(after[0], 0.0, 1e-12);
      EXPECT_NEAR(after[2], 0.0, 1e-12);
    }
  }
}

// At a_y h = pi/2 the coupling is -i Y(x)Y, a product of local unitaries:
// the sigma_x outcome only reveals the ancilla, P(+-) = (1 -+ theta_M1)/2.
TEST(WeakMeasurement, RightAngleCouplingCarriesNoSystemInformation) {
  Rng rng(19);
  const auto set = projector_set(Observable::x);
  const ComplexMatrix w = coupling_unitary(1.0, std::numbers::pi / 2);
  for (int i = 0; i < 200; ++i) {
    const BlochVector ts = random_bloch(rng), tm = random_bloch(rng);
    const DensityMatrix joint = evolve(kron(bloch_to_density(ts), bloch_to_density(tm)), w);
    EXPECT_NEAR(outcome_probability(joint, set.first), 0.5 * (1 - tm[0]), 1e-12);
  }
}

TEST(WeakMeasurement, StepReturnsValidReducedState) {
  Rng rng(20);
  const auto set = projector_set(Observable::x);
  for (int i = 0; i < 100; ++i) {
    const WeakStep st = weak_measurement_step(random_qubit(rng), random_qubit(rng), random_unitary(rng, 4), set, rng);
    EXPECT_TRUE(st.label == 1 || st.label == -1);
    EXPECT_GT(st.probability, 0.0);
    EXPECT_NEAR(st.system.data().trace().real(), 1.0, 1e-12);
    EXPECT_GE(st.system.min_eigenvalue(), -1e-12);
  }
}

// Decohered product diag(p11, p22, p33, p44) under the rotation mixing |00>
// and |11>, then sigma_z on the ancilla.
TEST(SwapLikeEvolution, DiagonalStateClosedForms) {
  Rng rng(21);
  const auto [zp, zm] = projector_set(Observable::z);
  for (int i = 0; i < 100; ++i) {
    const double r11 = uniform(rng, 0, 1), R11 = uniform(rng, 0, 1), phi = uniform(rng, -3, 3);
    const double p11 = r11 * R11, p22 = r11 * (1 - R11), p33 = (1 - r11) * R11, p44 = (1 - r11) * (1 - R11);
    const DensityMatrix rho(ComplexMatrix(diag4(p11, p22, p33, p44)));
    const DensityMatrix out = evolve(rho, swap_like_unitary(phi));
    const double c2 = std::cos(phi) * std::cos(phi), s2 = std::sin(phi) * std::sin(phi);
    Eigen::MatrixXcd want = diag4(p44 * s2 + p11 * c2, p22, p33, p11 * s2 + p44 * c2);
    want(0, 3) = want(3, 0) = -(p11 - p44) * std::sin(2 * phi) / 2;
    EXPECT_LT(max_abs_diff(out.data(), want), 1e-12);

    const double n_plus = p44 * s2 + p11 * c2 + p33, n_minus = p22 + p11 * s2 + p44 * c2;
    EXPECT_NEAR(outcome_probability(out, zp), n_plus, 1e-12);
    EXPECT_LT(max_abs_diff(measure(out, zp).post_state.data(), diag4(p44 * s2 + p11 * c2, 0, p33, 0) / n_plus), 1e-12);
    EXPECT_LT(max_abs_diff(measure(out, zm).post_state.data(), diag4(0, p22, 0, p11 * s2 + p44 * c2) / n_minus), 1e-12);
  }
}
