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

/*! \file filters.hpp
    \brief Estimators of the hidden sequence and the risk functional.

    - Kalman recursion for the linear-Gaussian pair, plus its linearized
      (extended) form for the qubit block chain.
    - Grid posterior recursion: the exact Bayesian update of w_k(s | x_1^k)
      on a fixed node set, with trapezoid quadrature. Knows the prior and the
      transition density.
    - Optimal filtering equation: E(Q(s_k) | x_1^k) from the logarithmic
      derivative of the predictive density f(x_k | x_1^{k-1}) and the
      exponential-family factorization of f(x|s) alone.
*/

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qfilter/error.hpp"
#include "qfilter/kde.hpp"
#include "qfilter/models.hpp"

namespace qfilter {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// --------------------------------------------------------------------------
// Kalman

struct KalmanState {
  double mean = 0.0;
  double variance = 0.0;
};

struct KalmanStep {
  KalmanState predicted;
  double predictive_mean;      ///< E(x_k | x_1^{k-1})
  double predictive_variance;  ///< Var(x_k | x_1^{k-1})
  KalmanState updated;
};

/// State of s_0: the stationary prior N(0, b^2/(1-a^2)).
inline KalmanState kalman_initial_state(const LinearGaussianModel& m) { return {0.0, m.prior_variance()}; }

inline KalmanStep kalman_step(const LinearGaussianModel& m, const KalmanState& prev, double x) {
  KalmanStep st{};
  st.predicted = {m.a * prev.mean, m.a * m.a * prev.variance + m.b * m.b};
  st.predictive_mean = m.A * st.predicted.mean;
  st.predictive_variance = m.A * m.A * st.predicted.variance + m.B * m.B;
  const double gain = st.predicted.variance * m.A / st.predictive_variance;
  st.updated.mean = st.predicted.mean + gain * (x - st.predictive_mean);
  st.updated.variance = std::max(0.0, (1.0 - gain * m.A) * st.predicted.variance);
  return st;
}

struct KalmanOutput {
  std::vector<double> estimates;
  std::vector<KalmanStep> steps;
};

inline KalmanOutput kalman_filter(const LinearGaussianModel& m, std::span<const double> observed) {
  m.validate();
  KalmanOutput out;
  out.estimates.reserve(observed.size());
  out.steps.reserve(observed.size());
  KalmanState st = kalman_initial_state(m);
  for (double x : observed) {
    const KalmanStep step = kalman_step(m, st, x);
    st = step.updated;
    out.steps.push_back(step);
    out.estimates.push_back(st.mean);
  }
  return out;
}

/// Kalman filter on the qubit chain under the Gaussian block approximation
/// x_k = N c s_k + omega_k, with the drift linearized about the running mean.
/// Starts from the uniform prior on [-1, 1] (mean 0, variance 1/3).
inline KalmanOutput linearized_kalman(const QubitChainModel& m, std::span<const double> observed) {
  m.validate();
  KalmanOutput out;
  const double gain_obs = m.observation_gain();
  const double noise_obs = m.observation_variance();
  KalmanState st{0.0, 1.0 / 3.0};
  for (double x : observed) {
    KalmanStep step{};
    const double mu = st.mean;
    const double jac = 1.0 + m.N * m.c * m.c * (1.0 - 3.0 * mu * mu);
    const GaussianKernel k = m.transition(mu);
    step.predicted = {std::clamp(k.mean, -1.0, 1.0), jac * jac * st.variance + k.sd * k.sd};
    step.predictive_mean = gain_obs * step.predicted.mean;
    step.predictive_variance = gain_obs * gain_obs * step.predicted.variance + noise_obs;
    const double gain = step.predicted.variance * gain_obs / step.predictive_variance;
    step.updated.mean = std::clamp(step.predicted.mean + gain * (x - step.predictive_mean), -1.0, 1.0);
    step.updated.variance = std::max(0.0, (1.0 - gain * gain_obs) * step.predicted.variance);
    st = step.updated;
    out.steps.push_back(step);
    out.estimates.push_back(st.mean);
  }
  return out;
}

// --------------------------------------------------------------------------
// Grid posterior

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw ContractViolation("grid needs n >= 2 and hi > lo");
  std::vector<double> nodes(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = lo + step * static_cast<double>(i);
  nodes.back() = hi;
  return nodes;
}

inline std::vector<double> trapezoid_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  if (n < 2) throw ContractViolation("trapezoid rule needs at least 2 nodes");
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = nodes[i + 1] - nodes[i];
    if (!(d > 0.0)) throw ContractViolation("grid nodes must be strictly increasing");
    w[i] += 0.5 * d;
    w[i + 1] += 0.5 * d;
  }
  return w;
}

inline double trapezoid(std::span<const double> values, std::span<const double> trap) {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * trap[i];
  return acc;
}

/// Posterior density values on strictly increasing nodes; integrates to 1.
struct GridPosterior {
  std::vector<double> nodes;
  std::vector<double> weights;

  double integral() const { return trapezoid(weights, trapezoid_weights(nodes)); }
};

struct GridStep {
  GridPosterior posterior;
  /// Integral of prior x likelihood; for k >= 2 this is f(x_k | x_1^{k-1}).
  double normalizer;
};

namespace detail {

inline GridStep normalize_on_grid(std::vector<double> nodes, std::vector<double> unnormalized,
                                  std::span<const double> trap) {
  const double z = trapezoid(unnormalized, trap);
  if (!(z > 0.0) || !std::isfinite(z)) throw ZeroNormalizerError("posterior normalizer is zero on the grid");
  for (double& v : unnormalized) v /= z;
  return {GridPosterior{std::move(nodes), std::move(unnormalized)}, z};
}

}  // namespace detail

/// w_1(s) proportional to f(x_1|s) p(s) on the grid.
template <class Prior, class Likelihood>
GridStep grid_posterior_init(std::span<const double> nodes, Prior&& prior, Likelihood&& likelihood) {
  const std::vector<double> trap = trapezoid_weights(nodes);
  std::vector<double> w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = prior(nodes[i]) * likelihood(nodes[i]);
  return detail::normalize_on_grid(std::vector<double>(nodes.begin(), nodes.end()), std::move(w), trap);
}

/// Discretized transition p(s_i | s_j) on a node set. Each source column is
/// rescaled to unit trapezoid mass so the Chapman-Kolmogorov step conserves
/// probability even where the kernel is narrow or leaves the grid. Point-mass
/// kernels (sd == 0, or narrower than the grid can resolve) go to the
/// nearest node.
class TransitionOperator {
 public:
  template <class Model>
  static TransitionOperator from_model(const Model& model, std::vector<double> nodes) {
    TransitionOperator op(std::move(nodes));
    for (std::size_t j = 0; j < op.size(); ++j) {
      const GaussianKernel k = model.transition(op.nodes_[j]);
      if (k.sd > 0.0) {
        for (std::size_t i = 0; i < op.size(); ++i) {
          const double z = (op.nodes_[i] - k.mean) / k.sd;
          op.kernel_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(-0.5 * z * z);
        }
      }
      op.finish_column(j, k.mean);
    }
    return op;
  }

  /// From an arbitrary density p(s_next, s_prev).
  template <class Density>
  static TransitionOperator from_density(std::vector<double> nodes, Density&& density) {
    TransitionOperator op(std::move(nodes));
    for (std::size_t j = 0; j < op.size(); ++j) {
      for (std::size_t i = 0; i < op.size(); ++i) {
        op.kernel_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = density(op.nodes_[i], op.nodes_[j]);
      }
      op.finish_column(j, op.nodes_[j]);
    }
    return op;
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& trap() const noexcept { return trap_; }

  /// Predicted density on the nodes: sum_j p(s_i | s_j) w_j dS_j.
  /// Source nodes carrying less than 1e-18 of the largest mass are skipped.
  std::vector<double> propagate(std::span<const double> density) const {
    if (density.size() != size()) throw DimensionError("density and transition grid sizes differ");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
    double max_mass = 0.0;
    for (std::size_t j = 0; j < size(); ++j) max_mass = std::max(max_mass, density[j] * trap_[j]);
    const double cutoff = 1e-18 * max_mass;
    for (std::size_t j = 0; j < size(); ++j) {
      const double mass = density[j] * trap_[j];
      if (mass <= cutoff) continue;
      out.noalias() += mass * kernel_.col(static_cast<Eigen::Index>(j));
    }
    return {out.data(), out.data() + out.size()};
  }

 private:
  explicit TransitionOperator(std::vector<double> nodes) : nodes_(std::move(nodes)), trap_(trapezoid_weights(nodes_)) {
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    kernel_ = Eigen::MatrixXd::Zero(n, n);
  }

  void finish_column(std::size_t j, double center) {
    auto col = kernel_.col(static_cast<Eigen::Index>(j));
    double mass = 0.0;
    for (std::size_t i = 0; i < size(); ++i) mass += col(static_cast<Eigen::Index>(i)) * trap_[i];
    if (mass > 0.0 && std::isfinite(mass)) {
      col /= mass;
      return;
    }
    col.setZero();
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), center);
    std::size_t i = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
    if (i == size() || (i > 0 && center - nodes_[i - 1] < nodes_[i] - center)) i = i == 0 ? 0 : i - 1;
    col(static_cast<Eigen::Index>(i)) = 1.0 / trap_[i];
  }

  std::vector<double> nodes_;
  std::vector<double> trap_;
  Eigen::MatrixXd kernel_;  // column j: density over targets given source node j
};

/// Propagate through the transition, multiply by f(x_k|s), renormalize.
template <class Likelihood>
GridStep grid_posterior_step(const GridPosterior& prev, const TransitionOperator& op, Likelihood&& likelihood) {
  std::vector<double> w = op.propagate(prev.weights);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= likelihood(op.nodes()[i]);
  return detail::normalize_on_grid(op.nodes(), std::move(w), op.trap());
}

/// Trapezoid integral of Q(s) w(s); Q defaults to the identity.
inline double posterior_mean(const GridPosterior& post, const std::function<double(double)>& Q = {}) {
  const std::vector<double> trap = trapezoid_weights(post.nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i < post.nodes.size(); ++i) {
    const double q = Q ? Q(post.nodes[i]) : post.nodes[i];
    acc += q * post.weights[i] * trap[i];
  }
  return acc;
}

// --------------------------------------------------------------------------
// Optimal filtering equation

struct OptimalEstimate {
  /// E(Q(s_k) | x_1^k).
  double conditional_mean_q;
  /// Q^{-1} applied to the conditional mean. Equal to it when Q is the
  /// identity; otherwise a plug-in point estimate, not a posterior mean.
  double plug_in_state;
  bool saturated;
};

/// E(Q(s_k)|x_1^k) T'(x_k) = d/dx_k ln( f(x_k|x_1^{k-1}) / h(x_k) ).
inline OptimalEstimate optimal_filter_estimate(const ExpFamilyDecomposition& d, double x,
                                               const PredictiveEstimate& predictive) {
  const double t_prime = d.T_prime(x);
  if (!(std::abs(t_prime) > 1e-12)) throw NoninformativePointError("T'(x) vanishes at x = " + std::to_string(x));
  const double q_mean = (predictive.log_derivative - d.log_h_prime(x)) / t_prime;
  const double point = d.q_is_identity ? q_mean : d.Q_inverse(q_mean);
  return {q_mean, point, predictive.saturated};
}

/// Gaussian observation special case: E(s_k|x_1^k) = (B^2/A) f'/f + x_k/A.
inline double gaussian_optimal_estimate(double A, double B, double x, double log_derivative) {
  if (!(std::abs(A) > 1e-12)) throw NoninformativePointError("A = 0 carries no information about s");
  return B * B / A * log_derivative + x / A;
}

// --------------------------------------------------------------------------
// Risk and reports

/// Mean squared error. NaN estimates (failed steps) are excluded.
inline double empirical_risk(std::span<const double> estimates, std::span<const double> hidden) {
  if (estimates.size() != hidden.size()) throw LengthMismatchError("estimates and hidden lengths differ");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (std::isnan(estimates[k])) continue;
    const double e = estimates[k] - hidden[k];
    acc += e * e;
    ++n;
  }
  return n == 0 ? kNaN : acc / static_cast<double>(n);
}

struct FilterReport {
  std::string filter_id;
  std::vector<double> estimates;
  std::vector<double> hidden;
  std::vector<double> squared_errors;
  double empirical_risk = kNaN;
  std::size_t saturation_count = 0;
  /// Steps whose estimate could not be formed; excluded from the risk.
  std::size_t error_count = 0;
};

inline FilterReport make_report(std::string filter_id, std::vector<double> estimates, std::span<const double> hidden,
                                std::size_t saturation_count = 0, std::size_t error_count = 0) {
  if (estimates.size() != hidden.size()) throw LengthMismatchError("estimates and hidden lengths differ");
  FilterReport r;
  r.filter_id = std::move(filter_id);
  r.hidden.assign(hidden.begin(), hidden.end());
  r.squared_errors.resize(estimates.size());
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const double e = estimates[k] - hidden[k];
    r.squared_errors[k] = std::isnan(estimates[k]) ? kNaN : e * e;
  }
  r.estimates = std::move(estimates);
  r.empirical_risk = empirical_risk(r.estimates, r.hidden);
  r.saturation_count = saturation_count;
  r.error_count = error_count;
  return r;
}

// --------------------------------------------------------------------------
// Grid filter over a whole sequence

struct GridSpec {
  std::size_t nodes = 2001;
  /// Half-width in stationary standard deviations (linear models only).
  double span_sigmas = 8.0;
};

using AnyModel = std::variant<LinearGaussianModel, QubitChainModel>;

inline const char* model_id(const AnyModel& m) {
  return std::visit([](const auto& mm) { return std::decay_t<decltype(mm)>::id; }, m);
}

inline ExpFamilyDecomposition decomposition_of(const AnyModel& m) {
  return std::visit([](const auto& mm) { return mm.decomposition(); }, m);
}

/// Grid recursion bound to one model: nodes, transition and the prior of s_1
/// are built once and shared read-only across trajectories.
class GridFilter {
 public:
  GridFilter(const AnyModel& model, const GridSpec& spec) : model_(model), op_(build(model, spec)) {
    prior_ = std::visit(
        [this](const auto& m) -> std::vector<double> {
          using M = std::decay_t<decltype(m)>;
          std::vector<double> p(op_.size());
          if constexpr (std::is_same_v<M, LinearGaussianModel>) {
            const double sd = std::sqrt(m.prior_variance());
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = normal_pdf(op_.nodes()[i], 0.0, sd);
          } else {
            // s_0 uniform on [-1, 1], pushed through one transition.
            std::fill(p.begin(), p.end(), 0.5);
            p = op_.propagate(p);
          }
          return p;
        },
        model_);
  }

  const TransitionOperator& transition() const noexcept { return op_; }
  const std::vector<double>& nodes() const noexcept { return op_.nodes(); }
  /// Prior density of s_1 on the nodes.
  const std::vector<double>& prior() const noexcept { return prior_; }

  double likelihood(double x, double s) const {
    return std::visit([&](const auto& m) { return m.observation_density(x, s); }, model_);
  }

  struct Run {
    std::vector<double> means;
    std::vector<double> normalizers;
    GridPosterior last;
  };

  /// Runs the recursion. `on_predicted(k, density)` sees the predicted
  /// density of s_k given x_1^{k-1} before the k-th update.
  template <class Visitor>
  Run run(std::span<const double> observed, Visitor&& on_predicted) const {
    Run out;
    out.means.reserve(observed.size());
    out.normalizers.reserve(observed.size());
    GridPosterior post;
    for (std::size_t k = 0; k < observed.size(); ++k) {
      const double x = observed[k];
      const std::vector<double> predicted = k == 0 ? prior_ : op_.propagate(post.weights);
      on_predicted(k, predicted);
      std::vector<double> w(predicted.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = predicted[i] * likelihood(x, op_.nodes()[i]);
      GridStep step = detail::normalize_on_grid(op_.nodes(), std::move(w), op_.trap());
      post = std::move(step.posterior);
      out.means.push_back(trapezoid_mean(post));
      out.normalizers.push_back(step.normalizer);
    }
    out.last = std::move(post);
    return out;
  }

  Run run(std::span<const double> observed) const {
    return run(observed, [](std::size_t, const std::vector<double>&) {});
  }

  /// f(x | past) = integral f(x|s) predicted(s) ds and its central-difference
  /// derivative in x.
  PredictiveEstimate predictive(std::span<const double> predicted, double x, double step) const {
    auto f = [&](double xx) {
      double acc = 0.0;
      for (std::size_t i = 0; i < predicted.size(); ++i) {
        acc += predicted[i] * likelihood(xx, op_.nodes()[i]) * op_.trap()[i];
      }
      return acc;
    };
    return make_predictive(f(x), (f(x + step) - f(x - step)) / (2.0 * step));
  }

 private:
  static TransitionOperator build(const AnyModel& model, const GridSpec& spec) {
    return std::visit(
        [&](const auto& m) {
          m.validate();
          using M = std::decay_t<decltype(m)>;
          std::vector<double> nodes;
          if constexpr (std::is_same_v<M, LinearGaussianModel>) {
            const double half = spec.span_sigmas * std::sqrt(m.prior_variance());
            if (!(half > 0.0)) throw DegenerateModelError("grid filter needs a positive prior variance");
            nodes = uniform_grid(-half, half, spec.nodes);
          } else {
            nodes = uniform_grid(-1.0, 1.0, spec.nodes);
          }
          return TransitionOperator::from_model(m, std::move(nodes));
        },
        model);
  }

  double trapezoid_mean(const GridPosterior& post) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < post.weights.size(); ++i) acc += op_.nodes()[i] * post.weights[i] * op_.trap()[i];
    return acc;
  }

  AnyModel model_;
  TransitionOperator op_;
  std::vector<double> prior_;
};

// --------------------------------------------------------------------------
// Pipeline

enum class FilterKind { kalman, grid, optimal_eq };
enum class PredictiveMode { kernel, grid };

inline const char* to_string(FilterKind k) {
  switch (k) {
    case FilterKind::kalman: return "kalman";
    case FilterKind::grid: return "grid";
    case FilterKind::optimal_eq: return "optimal-eq";
  }
  return "?";
}

inline const char* to_string(PredictiveMode m) { return m == PredictiveMode::kernel ? "kernel" : "grid"; }

struct FilterConfig {
  FilterKind kind = FilterKind::kalman;
  PredictiveMode mode = PredictiveMode::kernel;
  GridSpec grid;
  KernelSpec kernel;

  static FilterConfig of(FilterKind kind, PredictiveMode mode = PredictiveMode::kernel) {
    FilterConfig c;
    c.kind = kind;
    c.mode = mode;
    return c;
  }
};

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 1.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Model-free estimates: at step k the predictive density is a kernel
/// estimate fitted on x_1..x_{k-1}. Steps without enough history or without
/// neighbours are marked NaN and counted.
inline FilterReport run_optimal_kernel(const ExpFamilyDecomposition& d, const Trajectory& tr, const KernelSpec& spec) {
  spec.validate();
  const std::span<const double> obs(tr.observed);
  const std::size_t m = static_cast<std::size_t>(spec.conditioning_lag);
  std::vector<double> est(obs.size(), kNaN);
  std::size_t saturated = 0, errors = 0;
  std::vector<double> window(m);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    try {
      const auto history = obs.first(k);
      require_history(history.size(), spec);
      for (std::size_t j = 1; j <= m; ++j) window[j - 1] = obs[k - j];
      const double h = select_bandwidth(history, spec);
      const PredictiveEstimate p = kernel_predictive(history, spec.conditioning_lag, h, obs[k], window);
      const OptimalEstimate e = optimal_filter_estimate(d, obs[k], p);
      est[k] = e.plug_in_state;
      if (e.saturated) ++saturated;
    } catch (const InsufficientHistoryError&) {
      ++errors;
    } catch (const NoNeighborError&) {
      ++errors;
    } catch (const NoninformativePointError&) {
      ++errors;
    }
  }
  return make_report("optimal-eq", std::move(est), tr.hidden, saturated, errors);
}

/// Semi-oracle validation mode: the predictive density comes from the grid
/// recursion, its derivative from a central difference of step 1e-4 sd(x).
inline FilterReport run_optimal_grid(const GridFilter& grid, const ExpFamilyDecomposition& d, const Trajectory& tr) {
  const std::span<const double> obs(tr.observed);
  const double step = 1e-4 * sample_sd(obs);
  std::vector<double> est(obs.size(), kNaN);
  std::size_t saturated = 0, errors = 0;
  grid.run(obs, [&](std::size_t k, const std::vector<double>& predicted) {
    try {
      const PredictiveEstimate p = grid.predictive(predicted, obs[k], step);
      const OptimalEstimate e = optimal_filter_estimate(d, obs[k], p);
      est[k] = e.plug_in_state;
      if (e.saturated) ++saturated;
    } catch (const NoninformativePointError&) {
      ++errors;
    }
  });
  return make_report("optimal-eq", std::move(est), tr.hidden, saturated, errors);
}

/// Runs one filter over a trajectory and scores it against the hidden
/// sequence. `shared_grid`, when given, must have been built for `model` and
/// `config.grid`.
inline FilterReport run_filter_pipeline(const AnyModel& model, const Trajectory& tr, const FilterConfig& config,
                                        const GridFilter* shared_grid = nullptr) {
  tr.validate();
  std::optional<GridFilter> local;
  auto grid = [&]() -> const GridFilter& {
    if (shared_grid) return *shared_grid;
    if (!local) local.emplace(model, config.grid);
    return *local;
  };
  switch (config.kind) {
    case FilterKind::kalman: {
      const KalmanOutput k = std::visit(
          [&](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearGaussianModel>) {
              return kalman_filter(m, tr.observed);
            } else {
              return linearized_kalman(m, tr.observed);
            }
          },
          model);
      return make_report("kalman", k.estimates, tr.hidden);
    }
    case FilterKind::grid:
      return make_report("grid", grid().run(tr.observed).means, tr.hidden);
    case FilterKind::optimal_eq: {
      const ExpFamilyDecomposition d = decomposition_of(model);
      return config.mode == PredictiveMode::kernel ? run_optimal_kernel(d, tr, config.kernel)
                                                   : run_optimal_grid(grid(), d, tr);
    }
  }
  throw ContractViolation("unknown filter kind");
}

}  // namespace qfilter
