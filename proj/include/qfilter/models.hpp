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

/*! \file models.hpp
    \brief Partially observed Markov pairs (s_k, x_k) with scalar hidden state.

    Three observation models are provided:
      - LinearGaussianModel: s_k = a s_{k-1} + b xi_k,  x_k = A s_k + B eta_k
      - QubitChainModel: the aggregated weak-measurement chain of a qubit
        probed N times per block by an ancilla with coupling c, together with
        the exact per-measurement (Moebius) chain it approximates
      - ChiSquaredModel: b(x_k) = s_k eta_k with eta_k chi-squared, t dof

    Each model exposes its observation density f(x|s) and its exponential
    family factorization f(x|s) = C(s) h(x) exp(T(x) Q(s)).
*/

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfilter/error.hpp"
#include "qfilter/quantum.hpp"

namespace qfilter {

inline double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sd);
}

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ContractViolation(std::string(what) + " is not finite");
}

/// Gaussian transition kernel s_next ~ N(mean, sd^2). sd == 0 is a point mass.
struct GaussianKernel {
  double mean;
  double sd;
};

/// f(x|s) = C(s) h(x) exp(T(x) Q(s)).
///
/// `log_h_prime` is d/dx ln h(x) and `T_prime` is dT/dx; both enter the
/// optimal filtering equation. `Q_inverse` is only meaningful on the range of Q.
struct ExpFamilyDecomposition {
  std::function<double(double)> log_C_tilde;
  std::function<double(double)> log_h;
  std::function<double(double)> T;
  std::function<double(double)> T_prime;
  std::function<double(double)> log_h_prime;
  std::function<double(double)> Q;
  std::function<double(double)> Q_inverse;
  bool q_is_identity = false;

  double C_tilde(double s) const { return std::exp(log_C_tilde(s)); }
  double h(double x) const { return std::exp(log_h(x)); }
  // Summed in log space: C_tilde and h can under/overflow separately in the tails.
  double density(double x, double s) const { return std::exp(log_C_tilde(s) + log_h(x) + T(x) * Q(s)); }
};

/// Hidden/observed pair plus the metadata needed to reproduce it.
struct Trajectory {
  std::vector<double> hidden;
  std::vector<double> observed;
  std::uint64_t seed = 0;
  std::string model_id;
  double initial_state = 0.0;
  std::size_t clamp_count = 0;
  std::vector<std::pair<std::string, double>> parameters;

  std::size_t size() const noexcept { return hidden.size(); }

  void validate() const {
    if (hidden.size() != observed.size()) throw LengthMismatchError("trajectory hidden/observed lengths differ");
    for (std::size_t k = 0; k < hidden.size(); ++k) {
      if (!std::isfinite(hidden[k]) || !std::isfinite(observed[k])) {
        throw InvalidStateError("trajectory entry " + std::to_string(k) + " is not finite");
      }
    }
  }
};

// --------------------------------------------------------------------------
// Linear-Gaussian pair

struct LinearGaussianModel {
  double a = 0.0;
  double b = 1.0;
  double A = 1.0;
  double B = 1.0;

  static constexpr const char* id = "linear";

  void validate() const {
    for (double v : {a, b, A, B}) require_finite(v, "linear model coefficient");
    if (!(std::abs(a) < 1.0)) throw InvalidModelError("linear model needs |a| < 1");
    if (b < 0.0) throw InvalidModelError("linear model needs b >= 0");
    if (!(B > 0.0)) throw InvalidModelError("linear model needs B > 0");
  }

  double prior_variance() const { return b * b / (1.0 - a * a); }

  GaussianKernel transition(double s_prev) const { return {a * s_prev, b}; }

  double transition_density(double s_next, double s_prev) const {
    require_finite(s_next, "s_next");
    require_finite(s_prev, "s_prev");
    if (b == 0.0) throw DegenerateModelError("linear transition with b = 0 is a point mass");
    return normal_pdf(s_next, a * s_prev, b);
  }

  double observation_density(double x, double s) const {
    require_finite(x, "x");
    require_finite(s, "s");
    return normal_pdf(x, A * s, B);
  }

  /// h(x) = exp(-x^2/2B^2), T(x) = A x / B^2, Q(s) = s.
  ExpFamilyDecomposition decomposition() const {
    const double A_ = A, B2 = B * B;
    ExpFamilyDecomposition d;
    d.log_C_tilde = [A_, B2](double s) {
      return -A_ * A_ * s * s / (2.0 * B2) - 0.5 * std::log(2.0 * std::numbers::pi * B2);
    };
    d.log_h = [B2](double x) { return -x * x / (2.0 * B2); };
    d.T = [A_, B2](double x) { return A_ * x / B2; };
    d.T_prime = [A_, B2](double) { return A_ / B2; };
    d.log_h_prime = [B2](double x) { return -x / B2; };
    d.Q = [](double s) { return s; };
    d.Q_inverse = [](double q) { return q; };
    d.q_is_identity = true;
    return d;
  }

  std::vector<std::pair<std::string, double>> parameters() const {
    return {{"a", a}, {"b", b}, {"A", A}, {"B", B}};
  }
};

/// Draws s_0 ~ N(0, b^2/(1-a^2)) unless `forced_s0` is given, then T steps of
/// the recursion. hidden/observed hold s_1..s_T and x_1..x_T.
inline Trajectory simulate_linear(const LinearGaussianModel& m, std::size_t T, Rng& rng,
                                  std::optional<double> forced_s0 = std::nullopt) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Trajectory tr;
  tr.model_id = LinearGaussianModel::id;
  tr.parameters = m.parameters();
  double s = forced_s0 ? *forced_s0 : std::sqrt(m.prior_variance()) * normal(rng);
  tr.initial_state = s;
  tr.hidden.reserve(T);
  tr.observed.reserve(T);
  for (std::size_t k = 0; k < T; ++k) {
    s = m.a * s + m.b * normal(rng);
    const double x = m.A * s + m.B * normal(rng);
    tr.hidden.push_back(s);
    tr.observed.push_back(x);
  }
  return tr;
}

// --------------------------------------------------------------------------
// Qubit weak-measurement chain

/// Coupling angle a_y h at which one ancilla sigma_x measurement yields
/// P(+-1) = (1 +- theta_S2 c)/2 and theta_S2 -> (theta_S2 +- c)/(1 +- c theta_S2).
inline constexpr double kProbeAngle = std::numbers::pi / 4.0;

/// Hidden s_k is the y Bloch component of the unobserved qubit, c the ancilla
/// z component, N the number of ancilla measurements per block. The block
/// observation x_k = x_{k+} - x_{k-} is approximated as N(N c s_k, N).
struct QubitChainModel {
  double c = 0.1;
  int N = 100;
  double clamp_eps = 1e-6;

  static constexpr const char* id = "qubit";

  void validate() const {
    require_finite(c, "qubit coupling c");
    if (!(std::abs(c) < 1.0)) throw InvalidModelError("qubit model needs |c| < 1");
    if (N < 1) throw InvalidModelError("qubit model needs N >= 1");
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw InvalidModelError("qubit clamp_eps must lie in (0, 0.5)");
  }

  double drift(double s) const { return s + N * c * c * s * (1.0 - s * s); }
  double noise_scale(double s) const { return std::abs(c) * (1.0 - s * s); }

  /// s' = s + N c^2 s (1-s^2) + omega c (1-s^2), omega ~ N(0, N).
  GaussianKernel transition(double s_prev) const {
    return {drift(s_prev), noise_scale(s_prev) * std::sqrt(static_cast<double>(N))};
  }

  double transition_density(double s_next, double s_prev) const {
    require_finite(s_next, "s_next");
    require_finite(s_prev, "s_prev");
    const GaussianKernel k = transition(s_prev);
    if (k.sd == 0.0) throw DegenerateModelError("qubit transition is a point mass at this state");
    return normal_pdf(s_next, k.mean, k.sd);
  }

  double observation_gain() const { return N * c; }
  double observation_variance() const { return static_cast<double>(N); }

  double observation_density(double x, double s) const {
    require_finite(x, "x");
    require_finite(s, "s");
    return normal_pdf(x, observation_gain() * s, std::sqrt(observation_variance()));
  }

  ExpFamilyDecomposition decomposition() const {
    return LinearGaussianModel{0.0, 0.0, observation_gain(), std::sqrt(observation_variance())}.decomposition();
  }

  std::vector<std::pair<std::string, double>> parameters() const {
    return {{"c", c}, {"N", static_cast<double>(N)}, {"clamp_eps", clamp_eps}};
  }
};

/// Euler-form block chain. Hidden values leaving [-1+eps, 1-eps] are clamped
/// and counted. State and observation noise are independent draws.
inline Trajectory simulate_qubit_chain(const QubitChainModel& m, std::size_t T, double s0, Rng& rng) {
  if (!(std::abs(s0) <= 1.0)) throw InvalidStateError("qubit chain needs |s0| <= 1");
  std::normal_distribution<double> omega(0.0, std::sqrt(static_cast<double>(m.N)));
  Trajectory tr;
  tr.model_id = QubitChainModel::id;
  tr.parameters = m.parameters();
  tr.initial_state = s0;
  const double lo = -1.0 + m.clamp_eps, hi = 1.0 - m.clamp_eps;
  double s = s0;
  for (std::size_t k = 0; k < T; ++k) {
    s = m.drift(s) + omega(rng) * m.c * (1.0 - s * s);
    // +-1 are fixed points of the map and are left alone.
    if ((s < lo || s > hi) && std::abs(s) != 1.0) {
      s = std::clamp(s, lo, hi);
      ++tr.clamp_count;
    }
    tr.hidden.push_back(s);
    tr.observed.push_back(m.observation_gain() * s + omega(rng));
  }
  return tr;
}

/// Exact update of the system's y Bloch component after one ancilla outcome.
inline double mobius_update(double s, double c, int label) {
  return label > 0 ? (s + c) / (1.0 + c * s) : (s - c) / (1.0 - c * s);
}

/// Exact chain: each block performs N indirect measurements, each one
/// sampled from the two-qubit simulation (system theta = [0, s, 0], ancilla
/// theta = [0, 0, c], coupling angle kProbeAngle, sigma_x on the ancilla).
/// hidden[k] is s after block k, observed[k] the outcome difference.
inline Trajectory simulate_microstep_chain(const QubitChainModel& m, std::size_t blocks, double s0, Rng& rng) {
  if (!(std::abs(s0) < 1.0)) throw InvalidStateError("micro-step chain needs |s0| < 1");
  const DensityMatrix ancilla = bloch_to_density(BlochVector(0.0, 0.0, m.c));
  const ComplexMatrix w = coupling_unitary(1.0, kProbeAngle);
  const auto projectors = projector_set(Observable::x);
  Trajectory tr;
  tr.model_id = "qubit-micro";
  tr.parameters = m.parameters();
  tr.initial_state = s0;
  double s = s0;
  for (std::size_t k = 0; k < blocks; ++k) {
    int x = 0;
    for (int i = 0; i < m.N; ++i) {
      const DensityMatrix system = bloch_to_density(BlochVector(0.0, s, 0.0));
      const DensityMatrix joint = evolve(kron(system, ancilla), w);
      const MeasurementOutcome out = sample_outcome(joint, projectors, rng);
      s = mobius_update(s, m.c, out.label);
      x += out.label;
    }
    tr.hidden.push_back(s);
    tr.observed.push_back(static_cast<double>(x));
  }
  return tr;
}

// --------------------------------------------------------------------------
// Chi-squared multiplicative model

/// Invertible differentiable b(x) on (domain_lo, domain_hi).
struct ScalarBijection {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> second_derivative;
  std::function<double(double)> inverse;
  double domain_lo = -INFINITY;
  double domain_hi = INFINITY;

  bool in_domain(double x) const { return x > domain_lo && x < domain_hi; }

  static ScalarBijection identity_positive() {
    return {"identity", [](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; },
            [](double y) { return y; }, 0.0, INFINITY};
  }

  static ScalarBijection exponential() {
    return {"exp",
            [](double x) { return std::exp(x); },
            [](double x) { return std::exp(x); },
            [](double x) { return std::exp(x); },
            [](double y) { return std::log(y); },
            -INFINITY,
            INFINITY};
  }
};

/// b(x_k) = s_k eta_k, eta_k ~ chi^2_t, s_k > 0.
struct ChiSquaredModel {
  double t = 4.0;
  ScalarBijection b = ScalarBijection::identity_positive();

  static constexpr const char* id = "chi-squared";

  void validate() const {
    require_finite(t, "degrees of freedom");
    if (!(t > 0.0)) throw InvalidModelError("chi-squared model needs t > 0");
    if (!b.value || !b.derivative || !b.second_derivative || !b.inverse) {
      throw InvalidModelError("chi-squared model needs b, b', b'' and b^-1");
    }
    // Spot check invertibility on a grid of y = b(x) values.
    for (int i = 1; i <= 20; ++i) {
      const double y = 0.25 * i;
      const double x = b.inverse(y);
      if (!b.in_domain(x) || std::abs(b.value(x) - y) > 1e-9 * std::max(1.0, y) ||
          std::abs(b.inverse(b.value(x)) - x) > 1e-9 * std::max(1.0, std::abs(x))) {
        throw InvalidModelError("b(x) is not invertible near y = " + std::to_string(y));
      }
    }
  }

  double log_norm() const { return 0.5 * t * std::log(2.0) + std::lgamma(0.5 * t); }

  /// Change of variables: f(x|s) = p_eta(b(x)/s) |b'(x)| / s. Zero outside
  /// the support s > 0, b(x) > 0.
  double observation_density(double x, double s) const {
    require_finite(x, "x");
    require_finite(s, "s");
    if (s <= 0.0 || !b.in_domain(x)) return 0.0;
    const double y = b.value(x);
    if (y <= 0.0) return 0.0;
    const double u = y / s;
    const double log_p = (0.5 * t - 1.0) * std::log(u) - 0.5 * u - log_norm();
    return std::exp(log_p) * std::abs(b.derivative(x)) / s;
  }

  /// C(s) = s^{-t/2} / (2^{t/2} Gamma(t/2)), h(x) = b(x)^{t/2-1} |b'(x)|,
  /// T(x) = b(x)/2, Q(s) = -1/s. The minus sign of exp(-b/(2s)) lives in Q.
  ExpFamilyDecomposition decomposition() const {
    const double t_ = t, ln = log_norm();
    const ScalarBijection bb = b;
    ExpFamilyDecomposition d;
    d.log_C_tilde = [t_, ln](double s) { return -0.5 * t_ * std::log(s) - ln; };
    d.log_h = [t_, bb](double x) {
      return (0.5 * t_ - 1.0) * std::log(bb.value(x)) + std::log(std::abs(bb.derivative(x)));
    };
    d.T = [bb](double x) { return 0.5 * bb.value(x); };
    d.T_prime = [bb](double x) { return 0.5 * bb.derivative(x); };
    d.log_h_prime = [t_, bb](double x) {
      return (0.5 * t_ - 1.0) * bb.derivative(x) / bb.value(x) + bb.second_derivative(x) / bb.derivative(x);
    };
    d.Q = [](double s) { return -1.0 / s; };
    d.Q_inverse = [](double q) { return -1.0 / q; };
    return d;
  }

  std::vector<std::pair<std::string, double>> parameters() const { return {{"t", t}}; }
};

}  // namespace qfilter
