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

// qfilter command-line driver.
//
//   qfilter simulate --config s.conf --seed 7 --out traj/seed7
//   qfilter filter --config s.conf --trajectory traj/seed7.csv --filter grid --out rep/grid7
//   qfilter bench --config s.conf --seeds 1..200 --filters kalman,grid --out results
//   qfilter qudit-demo --phi 0.4 --rounds 20
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qfilter/qfilter.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "scenario file (key = value lines)");
  app->add_option("--set", c.sets, "override a config key, e.g. --set model.c=0.05");
}

qfilter::ScenarioConfig load(const Common& c) {
  qfilter::ScenarioConfig cfg;
  if (!c.config_path.empty()) {
    try {
      cfg = qfilter::load_scenario(c.config_path);
    } catch (const qfilter::IoError& e) {
      throw qfilter::ConfigError("--config", e.what());
    }
  }
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw qfilter::ConfigError(s, "--set expects key=value");
    qfilter::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

int cmd_simulate(const Common& common, std::uint64_t seed, const std::string& out) {
  qfilter::ScenarioConfig cfg = load(common);
  cfg.seeds = {seed};
  cfg.validate();
  const qfilter::Trajectory tr = qfilter::simulate_scenario(cfg, seed);
  qfilter::write_trajectory(tr, out);
  std::cout << out << ".csv (" << tr.size() << " steps, clamps " << tr.clamp_count << ")\n";
  return 0;
}

int cmd_filter(const Common& common, const std::string& trajectory, const std::string& filter,
               const std::string& out) {
  qfilter::ScenarioConfig cfg = load(common);
  cfg.filters = qfilter::parse_filter_list(filter);
  if (cfg.filters.size() != 1) throw qfilter::ConfigError("filter", "exactly one filter expected");
  cfg.validate();
  const qfilter::Trajectory tr = qfilter::read_trajectory(trajectory);
  qfilter::FilterConfig fc;
  fc.kind = cfg.filters.front();
  fc.mode = cfg.optimal_mode;
  fc.grid = cfg.grid;
  fc.kernel = cfg.kernel;
  const qfilter::FilterReport r = qfilter::run_filter_pipeline(cfg.model(), tr, fc);
  qfilter::write_text(out + ".csv", qfilter::filter_report_csv(r));
  qfilter::write_text(out + ".json", qfilter::filter_report_summary(r).dump(2) + "\n");
  std::cout << r.filter_id << " risk " << qfilter::fmt17(r.empirical_risk) << " (errors " << r.error_count
            << ", saturated " << r.saturation_count << ")\n";
  return 0;
}

int cmd_bench(const Common& common, const std::string& seeds, const std::string& filters, const std::string& out,
              const std::string& format) {
  qfilter::ScenarioConfig cfg = load(common);
  if (!seeds.empty()) qfilter::apply_setting(cfg, "seeds", seeds);
  if (!filters.empty()) qfilter::apply_setting(cfg, "filters", filters);
  if (!out.empty()) qfilter::apply_setting(cfg, "output.dir", out);
  if (!format.empty()) qfilter::apply_setting(cfg, "output.format", format);
  const qfilter::BenchReport report = qfilter::run_scenario(cfg);
  for (const auto& p : qfilter::emit_report(report, cfg.format, cfg.out_dir)) std::cout << p.string() << "\n";
  for (const auto& s : report.summaries) {
    std::cout << s.filter << ": mean risk " << qfilter::fmt17(s.mean_risk) << " se " << qfilter::fmt17(s.std_error)
              << " seeds " << s.seeds_used << " failed " << s.failed_seeds << "\n";
  }
  if (report.comparison) {
    const auto& c = *report.comparison;
    std::cout << c.candidate << " - " << c.baseline << ": " << qfilter::fmt17(c.mean_difference)
              << " (95% upper " << qfilter::fmt17(c.upper_95) << ")\n";
  }
  const bool any_failed = std::any_of(report.summaries.begin(), report.summaries.end(),
                                      [](const auto& s) { return s.failed_seeds > 0; });
  return any_failed ? kExitRuntime : 0;
}

int cmd_qudit_demo(double phi, std::size_t rounds, std::uint64_t seed, const std::string& observable,
                   bool entangled) {
  using namespace qfilter;
  const Observable obs = parse_observable(observable);
  DensityMatrix rho = kron(bloch_to_density(BlochVector(0.0, 0.0, 0.6)), bloch_to_density(BlochVector(0.0, 0.0, 0.2)));
  if (entangled) {
    // Mix in a Bell state so the qudit has no product structure.
    Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    rho = DensityMatrix::assume_valid(0.5 * rho.data() + 0.5 * bell * bell.adjoint());
  }
  const QuditObservationModel model(relabel(rho), swap_like_unitary(phi), obs);
  Rng rng(seed);
  const auto steps = model.run(rounds, rng);
  nlohmann::json j;
  j["regime"] = to_string(model.regime());
  j["observable"] = to_string(obs);
  j["phi"] = phi;
  j["seed"] = seed;
  j["initial"] = to_json(model.initial());
  const auto [s0, m0] = artificial_qubits(model.initial());
  j["initial_unobserved_z"] = density_to_bloch(s0).components()[2];
  j["ancilla_z"] = density_to_bloch(m0).components()[2];
  j["rounds"] = nlohmann::json::array();
  for (const auto& st : steps) {
    const auto [s, m] = artificial_qubits(st.state);
    j["rounds"].push_back({{"label", st.label},
                           {"probability", st.probability},
                           {"unobserved_z", density_to_bloch(s).components()[2]}});
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filtering of partially observed qubit and qudit chains"};
  app.set_version_flag("--version", std::string(qfilter::kVersion));
  app.require_subcommand(1);

  Common sim_common, filt_common, bench_common;

  auto* sim = app.add_subcommand("simulate", "simulate one trajectory and write CSV + JSON sidecar");
  add_common(sim, sim_common);
  std::uint64_t sim_seed = 1;
  std::string sim_out = "trajectory";
  sim->add_option("--seed", sim_seed, "generator seed");
  sim->add_option("--out", sim_out, "output stem; writes <stem>.csv and <stem>.json");

  auto* filt = app.add_subcommand("filter", "run one filter on a trajectory CSV");
  add_common(filt, filt_common);
  std::string filt_traj, filt_name = "kalman", filt_out = "report";
  filt->add_option("--trajectory", filt_traj, "trajectory CSV (step,hidden,observed)")->required();
  filt->add_option("--filter", filt_name, "kalman | grid | optimal-eq");
  filt->add_option("--out", filt_out, "output stem");

  auto* bench = app.add_subcommand("bench", "run a multi-seed scenario and write reports");
  add_common(bench, bench_common);
  std::string b_seeds, b_filters, b_out, b_format;
  bench->add_option("--seeds", b_seeds, "e.g. 1..200 or 1,2,5");
  bench->add_option("--filters", b_filters, "comma list of kalman, grid, optimal-eq");
  bench->add_option("--out", b_out, "output directory");
  bench->add_option("--format", b_format, "csv | json");

  auto* qd = app.add_subcommand("qudit-demo", "weak measurement of a spin-3/2 qudit through its accessible levels");
  double qd_phi = 0.4;
  std::size_t qd_rounds = 10;
  std::uint64_t qd_seed = 1;
  std::string qd_obs = "z";
  bool qd_entangled = false;
  qd->add_option("--phi", qd_phi, "rotation angle of the evolution");
  qd->add_option("--rounds", qd_rounds, "number of measurement rounds");
  qd->add_option("--seed", qd_seed, "generator seed");
  qd->add_option("--observable", qd_obs, "x | z");
  qd->add_flag("--non-product", qd_entangled, "start from a state without product structure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(sim_common, sim_seed, sim_out);
    if (*filt) return cmd_filter(filt_common, filt_traj, filt_name, filt_out);
    if (*bench) return cmd_bench(bench_common, b_seeds, b_filters, b_out, b_format);
    if (*qd) return cmd_qudit_demo(qd_phi, qd_rounds, qd_seed, qd_obs, qd_entangled);
  } catch (const qfilter::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qfilter::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
