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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include "support.hpp"

using namespace qfilter;
using namespace qfilter::testing;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<LinearGaussianModel> linear_sweep() {
  Rng rng(2024);
  std::vector<LinearGaussianModel> out;
  for (int i = 0; i < 50; ++i) out.push_back(random_linear(rng));
  return out;
}

// 1. Optimal filtering equation fed the exact Kalman predictive density.
Outcome kalman_equivalence() {
  Timer t;
  double worst = 0.0;
  std::uint64_t seed = 100;
  for (const LinearGaussianModel& m : linear_sweep()) {
    Rng rng(seed++);
    const Trajectory tr = simulate_linear(m, 100, rng);
    const KalmanOutput k = kalman_filter(m, tr.observed);
    const ExpFamilyDecomposition d = m.decomposition();
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double x = tr.observed[i], mu = k.steps[i].predictive_mean, var = k.steps[i].predictive_variance;
      const double f = normal_pdf(x, mu, std::sqrt(var));
      const OptimalEstimate e = optimal_filter_estimate(d, x, make_predictive(f, -(x - mu) / var * f));
      worst = std::max(worst, std::abs(e.conditional_mean_q - k.estimates[i]));
    }
  }
  const double secs = t.seconds();
  return {worst < 1e-10 && secs < 5.0,
          "max |diff| " + num(worst) + " (< 1e-10), " + num(secs) + " s (< 5 s)"};
}

// 2. Grid recursion against Kalman on the same sweep.
Outcome grid_equivalence() {
  Timer t;
  double worst_mean = 0.0, worst_joint = 0.0;
  std::uint64_t seed = 100;
  for (const LinearGaussianModel& m : linear_sweep()) {
    Rng rng(seed++);
    const Trajectory tr = simulate_linear(m, 100, rng);
    const KalmanOutput k = kalman_filter(m, tr.observed);
    const GridFilter grid(m, GridSpec{2001, 8.0});
    const auto run = grid.run(tr.observed);
    for (std::size_t i = 0; i < tr.size(); ++i) worst_mean = std::max(worst_mean, std::abs(run.means[i] - k.estimates[i]));
    double log_prod = 0.0;
    for (std::size_t i = 0; i < 20; ++i) log_prod += std::log(run.normalizers[i]);
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(tr.observed.data(), 20);
    const double log_joint = gaussian_log_density(linear_observation_covariance(m, 20), x);
    worst_joint = std::max(worst_joint, std::abs(std::expm1(log_prod - log_joint)));
  }
  const double secs = t.seconds();
  return {worst_mean < 1e-4 && worst_joint < 1e-6 && secs < 60.0,
          "max |mean diff| " + num(worst_mean) + " (< 1e-4), joint density rel err " + num(worst_joint) +
              " (< 1e-6), " + num(secs) + " s (< 60 s)"};
}

// 3. Quantum simulator invariants and the decohered two-qubit example.
Outcome quantum_correctness() {
  Rng rng(303);
  double worst_herm = 0.0, worst_trace = 0.0, worst_eig = 0.0, worst_sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix rho = random_density(rng, 4);
    const ComplexMatrix w = random_unitary(rng, 4);
    // Random complete pair: rotated ancilla projectors U (I (x) P+-) U^dagger.
    const ComplexMatrix u = random_unitary(rng, 4);
    const auto base = projector_set(uniform(rng, 0, 1) < 0.5 ? Observable::x : Observable::z);
    const Projector p(ComplexMatrix(u.data() * base.first.data() * u.data().adjoint()), 1);
    const Projector q(ComplexMatrix(u.data() * base.second.data() * u.data().adjoint()), -1);
    const DensityMatrix evolved = evolve(rho, w);
    worst_sum = std::max(worst_sum, std::abs(outcome_probability(evolved, p) + outcome_probability(evolved, q) - 1.0));
    for (const DensityMatrix& s : {evolved, sample_outcome(evolved, std::pair{p, q}, rng).post_state}) {
      worst_herm = std::max(worst_herm, max_abs_diff(s.data(), s.data().adjoint()));
      worst_trace = std::max(worst_trace, std::abs(s.data().trace().real() - 1.0));
      worst_eig = std::min(worst_eig, s.min_eigenvalue());
    }
  }
  double worst_example = 0.0;
  const auto [zp, zm] = projector_set(Observable::z);
  for (int i = 0; i < 100; ++i) {
    std::array<double, 4> p{};
    double s = 0.0;
    for (auto& v : p) s += (v = -std::log(uniform(rng, 1e-12, 1.0)));
    for (auto& v : p) v /= s;
    const double phi = i == 0 ? 0.0 : uniform(rng, -std::numbers::pi, std::numbers::pi);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
    for (int k = 0; k < 4; ++k) d(k, k) = p[static_cast<std::size_t>(k)];
    const DensityMatrix evolved = evolve(DensityMatrix(ComplexMatrix(d)), swap_like_unitary(phi));
    const double c2 = std::cos(phi) * std::cos(phi), s2 = std::sin(phi) * std::sin(phi);
    const double top = p[3] * s2 + p[0] * c2, bottom = p[0] * s2 + p[3] * c2;
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(4, 4);
    want(0, 0) = top;
    want(1, 1) = p[1];
    want(2, 2) = p[2];
    want(3, 3) = bottom;
    want(0, 3) = want(3, 0) = -(p[0] - p[3]) * std::sin(2 * phi) / 2;
    worst_example = std::max(worst_example, max_abs_diff(evolved.data(), want));
    Eigen::MatrixXcd plus = Eigen::MatrixXcd::Zero(4, 4), minus = Eigen::MatrixXcd::Zero(4, 4);
    plus(0, 0) = top / (top + p[2]);
    plus(2, 2) = p[2] / (top + p[2]);
    minus(1, 1) = p[1] / (p[1] + bottom);
    minus(3, 3) = bottom / (p[1] + bottom);
    worst_example = std::max(worst_example, max_abs_diff(measure(evolved, zp).post_state.data(), plus));
    worst_example = std::max(worst_example, max_abs_diff(measure(evolved, zm).post_state.data(), minus));
    if (phi == 0.0) {
      // rho_z+ = diag(p11, 0, p33, 0)/(p11 + p33), rho_z- = diag(0, p22, 0, p44)/(p22 + p44)
      Eigen::MatrixXcd p0 = Eigen::MatrixXcd::Zero(4, 4), m0 = Eigen::MatrixXcd::Zero(4, 4);
      p0(0, 0) = p[0] / (p[0] + p[2]);
      p0(2, 2) = p[2] / (p[0] + p[2]);
      m0(1, 1) = p[1] / (p[1] + p[3]);
      m0(3, 3) = p[3] / (p[1] + p[3]);
      worst_example = std::max(worst_example, max_abs_diff(measure(evolved, zp).post_state.data(), p0));
      worst_example = std::max(worst_example, max_abs_diff(measure(evolved, zm).post_state.data(), m0));
    }
  }
  const bool pass = worst_herm <= tol::hermitian && worst_trace <= tol::trace && worst_eig >= tol::min_eigenvalue &&
                    worst_sum <= 1e-12 && worst_example <= 1e-12;
  return {pass, "hermiticity " + num(worst_herm) + ", trace " + num(worst_trace) + ", min eigenvalue " +
                    num(worst_eig) + ", probability sum " + num(worst_sum) + ", closed forms " + num(worst_example)};
}

// 4. Exact measurement chain against the block increment c (1 - s^2) x_k.
Outcome microstep_vs_block() {
  std::string detail;
  bool pass = true;
  for (double c : {0.01, 0.005}) {
    const QubitChainModel m{c, 100};
    Rng rng(404);
    double s = 0.3, worst = 0.0, mean_abs = 0.0;
    const std::size_t blocks = 10000;
    // One block at a time so each residual is taken from its own start state.
    for (std::size_t k = 0; k < blocks; ++k) {
      const Trajectory tr = simulate_microstep_chain(m, 1, s, rng);
      const double predicted = c * (1 - s * s) * tr.observed[0];
      const double r = (tr.hidden[0] - s) - predicted;
      worst = std::max(worst, std::abs(r));
      mean_abs += std::abs(r) / blocks;
      s = tr.hidden[0];
    }
    pass = pass && worst <= 10 * c * c;
    detail += "c=" + num(c) + ": max|r|/c^2 " + num(worst / (c * c)) + ", mean|r|/c^2 " +
              num(mean_abs / (c * c)) + ", final s " + num(s) + "; ";
  }
  return {pass, detail + "limit max|r| <= 10 c^2"};
}

// 5. Qudit artificial qubits on product states.
Outcome qudit_round_trip() {
  Rng rng(505);
  double worst = 0.0;
  bool exact = true;
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix s = random_qubit(rng), m = random_qubit(rng);
    const QuditState q = relabel(kron(s, m));
    const auto [a, b] = artificial_qubits(q);
    worst = std::max({worst, max_abs_diff(a.data(), s.data()), max_abs_diff(b.data(), m.data())});
    const auto p = q.populations();
    const CoarseGraining cg = coarse_grain(p, Partition::levels_4_2());
    exact = exact && cg.probabilities[0] == p[0] + p[2] && cg.probabilities[1] == p[1] + p[3];
  }
  return {worst <= 1e-12 && exact,
          "max factor error " + num(worst) + " (<= 1e-12), p1 = p_{3/2} + p_{-1/2} exact: " + (exact ? "yes" : "no")};
}

// 6. Kernel-driven estimates against Kalman on a linear model.
Outcome model_free_sanity() {
  Timer t;
  const LinearGaussianModel m{0.7, 1.0, 1.0, 1.0};
  FilterConfig fc = FilterConfig::of(FilterKind::optimal_eq);
  fc.kernel = KernelSpec::fixed(0.8, 1);
  double kalman = 0.0, kernel = 0.0;
  std::size_t errors = 0, saturated = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const Trajectory tr = simulate_linear(m, 5000, rng);
    kalman += run_filter_pipeline(m, tr, FilterConfig::of(FilterKind::kalman)).empirical_risk / 20;
    const FilterReport r = run_filter_pipeline(m, tr, fc);
    kernel += r.empirical_risk / 20;
    errors += r.error_count;
    saturated += r.saturation_count;
  }
  const double secs = t.seconds(), rel = kernel / kalman - 1.0;
  return {std::abs(rel) <= 0.25 && secs < 120.0,
          "kernel risk " + num(kernel) + " vs Kalman " + num(kalman) + " (relative " + num(rel) +
              ", limit 0.25; lag 1, fixed h 0.8), skipped steps " + std::to_string(errors) + ", saturated " +
              std::to_string(saturated) + ", " + num(secs) + " s (< 120 s)"};
}

// 7. Grid recursion against the linearized Kalman filter on the qubit chain.
Outcome nonlinear_comparison() {
  Timer t;
  ScenarioConfig c;
  c.model_kind = "qubit";
  c.qubit = QubitChainModel{0.1, 100};
  c.length = 500;
  c.seeds = parse_seed_list("1..200");
  c.filters = {FilterKind::kalman, FilterKind::grid};
  c.grid.nodes = 401;
  const BenchReport r = run_scenario(c);
  const double secs = t.seconds();
  const RiskComparison& cmp = *r.comparison;
  return {cmp.candidate_not_worse && secs < 300.0,
          "grid " + num(r.summaries[1].mean_risk) + " vs linearized Kalman " + num(r.summaries[0].mean_risk) +
              ", mean difference " + num(cmp.mean_difference) + " (relative " + num(cmp.relative_difference) +
              "), bootstrap 95% upper bound " + num(cmp.upper_95) + " (<= 0), " + std::to_string(cmp.pairs) +
              " seeds, " + num(secs) + " s (< 300 s)"};
}

// 8. Kernel estimator numerics.
Outcome kde_numerics() {
  Rng rng(808);
  std::normal_distribution<double> g;
  std::vector<double> small(500), big(10000);
  for (auto& v : small) v = g(rng);
  for (auto& v : big) v = g(rng);
  const PredictiveEstimator est = fit_predictive(small, KernelSpec::silverman(1));
  double worst_rel = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double x = uniform(rng, -2.5, 2.5), h = 1e-5;
    const std::array<double, 1> w{uniform(rng, -1.5, 1.5)};
    const double fd = (est.evaluate(x + h, w).value - est.evaluate(x - h, w).value) / (2 * h);
    worst_rel = std::max(worst_rel, std::abs(est.evaluate(x, w).derivative - fd) / std::max(std::abs(fd), 1e-3));
  }
  const PredictiveEstimator iid = fit_predictive(big, KernelSpec::silverman(0));
  double worst_log = 0.0;
  for (double x = -2.0; x <= 2.0 + 1e-12; x += 0.01) {
    worst_log = std::max(worst_log, std::abs(iid.evaluate(x, {}).log_derivative + x));
  }
  return {worst_rel < 1e-6 && worst_log < 0.15,
          "derivative rel err " + num(worst_rel) + " (< 1e-6), iid log-derivative err " + num(worst_log) + " (< 0.15)"};
}

// 9. Two identical bench invocations through the command line.
Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "qfilter_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_text(dir / "scenario.conf",
             "model.kind = qubit\nmodel.c = 0.1\ntrajectory.length = 100\nfilters = kalman,grid,optimal-eq\n"
             "grid.nodes = 401\n");
  auto run = [&](const std::string& out, const char* threads) {
    const std::string cmd = std::string("QFILTER_THREADS=") + threads + " " + QFILTER_CLI + " bench --config " +
                            (dir / "scenario.conf").string() + " --seeds 1..8 --out " + (dir / out).string() +
                            " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const int a = run("a", "1"), b = run("b", "1"), c = run("c", "3");
  const std::string ra = read_text(dir / "a" / "bench.csv"), rb = read_text(dir / "b" / "bench.csv"),
                    rc = read_text(dir / "c" / "bench.csv");
  const bool pass = a == 0 && b == 0 && c == 0 && ra == rb && ra == rc;
  return {pass, std::string("repeat identical: ") + (ra == rb ? "yes" : "no") +
                    ", other thread count identical: " + (ra == rc ? "yes" : "no") + ", " +
                    std::to_string(std::count(ra.begin(), ra.end(), '\n') - 1) + " rows"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 Kalman equals optimal filtering equation", kalman_equivalence},
      {"2 Grid posterior recursion equals Kalman", grid_equivalence},
      {"3 Quantum simulator correctness", quantum_correctness},
      {"4 Micro-step chain vs block model", microstep_vs_block},
      {"5 Qudit round trip", qudit_round_trip},
      {"6 Model-free filter sanity", model_free_sanity},
      {"7 Nonlinear comparison", nonlinear_comparison},
      {"8 KDE numerics", kde_numerics},
      {"9 Determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (9 - failed) << "/9 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
