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

/*! \file kde.hpp
    \brief Kernel estimate of the one-step predictive density f(x_k | past).

    With conditioning lag m the estimate is the Nadaraya-Watson conditional
    density

        f(x | w) = sum_i K_h(x - x_i) prod_j K_g(w_j - x_{i-j})
                   -----------------------------------------
                          sum_i prod_j K_g(w_j - x_{i-j})

    over the history, where w_j is the observation j steps back. Gaussian
    kernels throughout, g = h. With m = 0 this is a plain kernel density
    estimate and the derivative in x is analytic in both cases.
*/

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfilter/error.hpp"

namespace qfilter {

enum class BandwidthRule { silverman, fixed };

struct KernelSpec {
  BandwidthRule bandwidth_rule = BandwidthRule::silverman;
  std::optional<double> fixed_h;
  int conditioning_lag = 1;

  void validate() const {
    if (conditioning_lag < 0) throw ContractViolation("conditioning lag must be >= 0");
    if (bandwidth_rule == BandwidthRule::fixed && !(fixed_h && *fixed_h > 0.0 && std::isfinite(*fixed_h))) {
      throw ContractViolation("fixed bandwidth rule needs fixed_h > 0");
    }
  }

  static KernelSpec fixed(double h, int lag) { return {BandwidthRule::fixed, h, lag}; }
  static KernelSpec silverman(int lag) { return {BandwidthRule::silverman, std::nullopt, lag}; }
};

inline constexpr double kDensityFloor = 1e-12;

struct PredictiveEstimate {
  double value = 0.0;
  double derivative = 0.0;
  double log_derivative = 0.0;
  /// value fell below kDensityFloor; log_derivative was computed against the floor.
  bool saturated = false;
};

inline PredictiveEstimate make_predictive(double value, double derivative) {
  PredictiveEstimate e{value, derivative, 0.0, false};
  if (value < kDensityFloor) {
    e.saturated = true;
    e.log_derivative = derivative / kDensityFloor;
  } else {
    e.log_derivative = derivative / value;
  }
  return e;
}

/// 1.06 sigma n^{-1/5}, sigma the sample standard deviation.
inline double silverman_bandwidth(std::span<const double> data) {
  const std::size_t n = data.size();
  if (n < 2) throw InsufficientHistoryError("Silverman bandwidth needs at least 2 samples");
  double mean = 0.0;
  for (double v : data) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : data) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw InsufficientHistoryError("Silverman bandwidth undefined for constant history");
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

/// Evaluates the conditional kernel estimate over `history` without copying.
/// `window[j-1]` is the observation j steps before the query.
inline PredictiveEstimate kernel_predictive(std::span<const double> history, int lag, double h, double x,
                                            std::span<const double> window) {
  if (static_cast<int>(window.size()) != lag) {
    throw DimensionError("window length " + std::to_string(window.size()) + " differs from lag " +
                         std::to_string(lag));
  }
  const double inv_h = 1.0 / h;
  const double norm = inv_h / std::sqrt(2.0 * std::numbers::pi);
  double denom = 0.0, num = 0.0, dnum = 0.0;
  const std::size_t m = static_cast<std::size_t>(lag);
  for (std::size_t i = m; i < history.size(); ++i) {
    double q = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      const double z = (window[j - 1] - history[i - j]) * inv_h;
      q += z * z;
    }
    const double weight = std::exp(-0.5 * q);
    const double u = (x - history[i]) * inv_h;
    const double k = norm * std::exp(-0.5 * u * u);
    denom += weight;
    num += weight * k;
    dnum += weight * k * (-u * inv_h);
  }
  if (denom < 1e-300) throw NoNeighborError("no history sample near the conditioning window");
  return make_predictive(num / denom, dnum / denom);
}

/// Immutable fitted estimator. Holds its own copy of the history.
class PredictiveEstimator {
 public:
  PredictiveEstimator(std::vector<double> history, int lag, double bandwidth)
      : history_(std::move(history)), lag_(lag), h_(bandwidth) {}

  int lag() const noexcept { return lag_; }
  double bandwidth() const noexcept { return h_; }
  std::size_t size() const noexcept { return history_.size(); }

  PredictiveEstimate evaluate(double x, std::span<const double> window) const {
    return kernel_predictive(history_, lag_, h_, x, window);
  }

 private:
  std::vector<double> history_;
  int lag_;
  double h_;
};

inline void require_history(std::size_t n, const KernelSpec& spec) {
  const std::size_t m = static_cast<std::size_t>(spec.conditioning_lag);
  const std::size_t need = spec.bandwidth_rule == BandwidthRule::fixed ? m + 1 : std::max<std::size_t>(m + 1, 2);
  if (n < need) {
    throw InsufficientHistoryError("history of " + std::to_string(n) + " samples is too short for lag " +
                                   std::to_string(m));
  }
}

inline double select_bandwidth(std::span<const double> history, const KernelSpec& spec) {
  return spec.bandwidth_rule == BandwidthRule::fixed ? *spec.fixed_h : silverman_bandwidth(history);
}

/// Needs at least one (target, window) pair, i.e. lag + 1 samples, and two
/// samples when the bandwidth is data driven.
inline PredictiveEstimator fit_predictive(std::span<const double> history, const KernelSpec& spec) {
  spec.validate();
  require_history(history.size(), spec);
  return PredictiveEstimator(std::vector<double>(history.begin(), history.end()), spec.conditioning_lag,
                             select_bandwidth(history, spec));
}

}  // namespace qfilter
