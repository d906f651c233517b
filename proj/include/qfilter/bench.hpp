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

/*! \file bench.hpp
    \brief Scenario configuration, multi-seed runs and report emission.

    A scenario is a flat `key = value` file:

        model.kind = qubit          # linear | qubit
        model.c = 0.1
        trajectory.length = 500
        seeds = 1..200
        filters = kalman,grid

    Every seed gets its own generator, seeded with the seed value, and the
    per-seed results are merged in seed-list order, so reports do not depend
    on the number of worker threads.
*/

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfilter/filters.hpp"
#include "qfilter/io.hpp"

namespace qfilter {

enum class ReportFormat { csv, json };

struct ScenarioConfig {
  std::string model_kind = "linear";
  LinearGaussianModel linear{0.9, std::sqrt(0.19), 1.0, 1.0};
  QubitChainModel qubit{};
  /// Fixed initial qubit state; drawn uniform on (-1, 1) per seed otherwise.
  std::optional<double> qubit_s0;
  std::size_t length = 500;
  std::vector<std::uint64_t> seeds{1};
  std::vector<FilterKind> filters{FilterKind::kalman};
  PredictiveMode optimal_mode = PredictiveMode::kernel;
  GridSpec grid;
  KernelSpec kernel = KernelSpec::silverman(1);
  std::filesystem::path out_dir = "out";
  ReportFormat format = ReportFormat::csv;
  std::size_t bootstrap_resamples = 2000;
  std::uint64_t bootstrap_seed = 20260101;

  AnyModel model() const {
    if (model_kind == "linear") return linear;
    return qubit;
  }

  void validate() const {
    if (model_kind != "linear" && model_kind != "qubit") throw ConfigError("model.kind", "expected linear or qubit");
    if (model_kind == "linear") {
      if (!(std::abs(linear.a) < 1.0)) throw ConfigError("model.a", "need |a| < 1");
      if (!(linear.b >= 0.0)) throw ConfigError("model.b", "need b >= 0");
      if (!std::isfinite(linear.A)) throw ConfigError("model.A", "must be finite");
      if (!(linear.B > 0.0)) throw ConfigError("model.B", "need B > 0");
    } else {
      if (!(std::abs(qubit.c) < 1.0)) throw ConfigError("model.c", "need |c| < 1");
      if (qubit.N < 1) throw ConfigError("model.N", "need N >= 1");
      if (!(qubit.clamp_eps > 0.0 && qubit.clamp_eps < 0.5)) throw ConfigError("model.clamp_eps", "need 0 < eps < 0.5");
    }
    try {
      std::visit([](const auto& m) { m.validate(); }, model());
    } catch (const InvalidModelError& e) {
      throw ConfigError("model", e.what());
    }
    if (qubit_s0 && !(std::abs(*qubit_s0) <= 1.0)) throw ConfigError("model.s0", "must lie in [-1, 1]");
    if (length == 0) throw ConfigError("trajectory.length", "must be positive");
    if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
    if (filters.empty()) throw ConfigError("filters", "at least one filter is required");
    if (grid.nodes < 3) throw ConfigError("grid.nodes", "need at least 3 nodes");
    if (!(grid.span_sigmas > 0.0)) throw ConfigError("grid.span_sigmas", "must be positive");
    try {
      kernel.validate();
    } catch (const ContractViolation& e) {
      throw ConfigError("kernel", e.what());
    }
    if (bootstrap_resamples == 0) throw ConfigError("bootstrap.resamples", "must be positive");
  }

  /// Flat key/value view, sorted by key.
  std::map<std::string, std::string> echo() const {
    std::map<std::string, std::string> e;
    e["model.kind"] = model_kind;
    if (model_kind == "linear") {
      e["model.a"] = fmt17(linear.a);
      e["model.b"] = fmt17(linear.b);
      e["model.A"] = fmt17(linear.A);
      e["model.B"] = fmt17(linear.B);
    } else {
      e["model.c"] = fmt17(qubit.c);
      e["model.N"] = std::to_string(qubit.N);
      e["model.clamp_eps"] = fmt17(qubit.clamp_eps);
      e["model.s0"] = qubit_s0 ? fmt17(*qubit_s0) : "uniform";
    }
    e["trajectory.length"] = std::to_string(length);
    std::string s;
    for (auto v : seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
    e["seeds"] = s;
    std::string f;
    for (auto k : filters) f += (f.empty() ? "" : ",") + std::string(to_string(k));
    e["filters"] = f;
    e["optimal.mode"] = to_string(optimal_mode);
    e["grid.nodes"] = std::to_string(grid.nodes);
    e["grid.span_sigmas"] = fmt17(grid.span_sigmas);
    e["kernel.rule"] = kernel.bandwidth_rule == BandwidthRule::fixed ? "fixed" : "silverman";
    if (kernel.fixed_h) e["kernel.h"] = fmt17(*kernel.fixed_h);
    e["kernel.lag"] = std::to_string(kernel.conditioning_lag);
    e["output.dir"] = out_dir.string();
    e["output.format"] = format == ReportFormat::csv ? "csv" : "json";
    e["bootstrap.resamples"] = std::to_string(bootstrap_resamples);
    e["bootstrap.seed"] = std::to_string(bootstrap_seed);
    return e;
  }
};

// --------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

}  // namespace detail

/// "1..200", "3", "1,4,9" or a mix such as "1..3,10".
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (detail::trim(text).empty()) return seeds;
  for (const auto& part : detail::split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(detail::parse_int<std::uint64_t>("seeds", part));
      continue;
    }
    const auto lo = detail::parse_int<std::uint64_t>("seeds", detail::trim(part.substr(0, dots)));
    const auto hi = detail::parse_int<std::uint64_t>("seeds", detail::trim(part.substr(dots + 2)));
    if (hi < lo) throw ConfigError("seeds", "range '" + part + "' is empty");
    if (hi - lo > 10'000'000) throw ConfigError("seeds", "range '" + part + "' is too large");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  return seeds;
}

inline std::vector<FilterKind> parse_filter_list(const std::string& text) {
  std::vector<FilterKind> out;
  for (const auto& f : detail::split(text, ',')) {
    if (f == "kalman") out.push_back(FilterKind::kalman);
    else if (f == "grid") out.push_back(FilterKind::grid);
    else if (f == "optimal-eq") out.push_back(FilterKind::optimal_eq);
    else throw ConfigError("filters", "unknown filter '" + f + "'");
  }
  return out;
}

/// Applies one key. Used for both the file and command-line overrides.
inline void apply_setting(ScenarioConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_double;
  if (key == "model.kind") c.model_kind = value;
  else if (key == "model.a") c.linear.a = parse_double(key, value);
  else if (key == "model.b") c.linear.b = parse_double(key, value);
  else if (key == "model.A") c.linear.A = parse_double(key, value);
  else if (key == "model.B") c.linear.B = parse_double(key, value);
  else if (key == "model.c") c.qubit.c = parse_double(key, value);
  else if (key == "model.N") c.qubit.N = detail::parse_int<int>(key, value);
  else if (key == "model.clamp_eps") c.qubit.clamp_eps = parse_double(key, value);
  else if (key == "model.s0") c.qubit_s0 = value == "uniform" ? std::nullopt : std::optional(parse_double(key, value));
  else if (key == "trajectory.length") c.length = detail::parse_int<std::size_t>(key, value);
  else if (key == "seeds") c.seeds = parse_seed_list(value);
  else if (key == "filters") c.filters = parse_filter_list(value);
  else if (key == "optimal.mode") {
    if (value == "kernel") c.optimal_mode = PredictiveMode::kernel;
    else if (value == "grid") c.optimal_mode = PredictiveMode::grid;
    else throw ConfigError(key, "expected kernel or grid");
  } else if (key == "grid.nodes") c.grid.nodes = detail::parse_int<std::size_t>(key, value);
  else if (key == "grid.span_sigmas") c.grid.span_sigmas = parse_double(key, value);
  else if (key == "kernel.rule") {
    if (value == "silverman") c.kernel.bandwidth_rule = BandwidthRule::silverman;
    else if (value == "fixed") c.kernel.bandwidth_rule = BandwidthRule::fixed;
    else throw ConfigError(key, "expected silverman or fixed");
  } else if (key == "kernel.h") c.kernel.fixed_h = parse_double(key, value);
  else if (key == "kernel.lag") c.kernel.conditioning_lag = detail::parse_int<int>(key, value);
  else if (key == "output.dir") c.out_dir = value;
  else if (key == "output.format") {
    if (value == "csv") c.format = ReportFormat::csv;
    else if (value == "json") c.format = ReportFormat::json;
    else throw ConfigError(key, "expected csv or json");
  } else if (key == "bootstrap.resamples") c.bootstrap_resamples = detail::parse_int<std::size_t>(key, value);
  else if (key == "bootstrap.seed") c.bootstrap_seed = detail::parse_int<std::uint64_t>(key, value);
  else throw ConfigError(key, "unknown key");
}

/// Parses `key = value` lines; `#` starts a comment. Does not validate.
inline ScenarioConfig parse_scenario(const std::string& text) {
  ScenarioConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    apply_setting(c, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return c;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text(path));
}

// --------------------------------------------------------------------------
// Running

struct SeedRow {
  std::string filter;
  std::uint64_t seed;
  double risk;
  std::size_t saturation;
  std::size_t step_errors;
  std::size_t clamps;
  /// Empty on success; the error message when the filter aborted.
  std::string failure;
};

struct FilterSummary {
  std::string filter;
  double mean_risk;
  /// Standard error of the mean over seeds.
  double std_error;
  std::size_t seeds_used;
  std::size_t failed_seeds;
  std::size_t saturation_total;
  std::size_t step_error_total;
};

/// Paired comparison of per-seed risks, candidate - baseline.
struct RiskComparison {
  std::string baseline;
  std::string candidate;
  std::size_t pairs;
  double mean_difference;
  double relative_difference;  ///< mean_difference / baseline mean risk
  double std_error;
  /// One-sided 95% percentile-bootstrap upper bound on the mean difference.
  double upper_95;
  bool candidate_not_worse;  ///< upper_95 <= 0
};

struct BenchReport {
  std::map<std::string, std::string> config;
  std::string version = kVersion;
  std::vector<SeedRow> rows;
  std::vector<FilterSummary> summaries;
  std::optional<RiskComparison> comparison;
  std::size_t clamp_total = 0;
};

inline std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QFILTER_THREADS")) {
    std::size_t cap = 0;
    const std::string_view v(env);
    if (std::from_chars(v.data(), v.data() + v.size(), cap).ec == std::errc() && cap > 0) n = std::min(n, cap);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

/// Runs job(i) for i in [0, n) on up to worker_count(n) threads. The first
/// exception thrown by a job is rethrown after all workers stop.
template <class Job>
void parallel_for(std::size_t n, Job&& job) {
  const std::size_t workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline Trajectory simulate_scenario(const ScenarioConfig& c, std::uint64_t seed) {
  Rng rng(seed);
  Trajectory tr;
  if (c.model_kind == "linear") {
    tr = simulate_linear(c.linear, c.length, rng);
  } else {
    const double s0 = c.qubit_s0 ? *c.qubit_s0 : std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    tr = simulate_qubit_chain(c.qubit, c.length, s0, rng);
  }
  tr.seed = seed;
  return tr;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

inline double std_error_of(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  return sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
}

/// Percentile bootstrap of the mean of `diffs`.
inline double bootstrap_upper_95(const std::vector<double>& diffs, std::size_t resamples, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, diffs.size() - 1);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i) s += diffs[pick(rng)];
    m = s / static_cast<double>(diffs.size());
  }
  std::sort(means.begin(), means.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(resamples))) - 1;
  return means[std::min(idx, resamples - 1)];
}

inline RiskComparison compare_risks(const std::vector<SeedRow>& rows, const std::string& baseline,
                                    const std::string& candidate, std::size_t resamples, std::uint64_t seed) {
  std::map<std::uint64_t, double> base;
  for (const auto& r : rows) {
    if (r.filter == baseline && r.failure.empty() && std::isfinite(r.risk)) base[r.seed] = r.risk;
  }
  std::vector<double> diffs, base_used;
  for (const auto& r : rows) {
    if (r.filter != candidate || !r.failure.empty() || !std::isfinite(r.risk)) continue;
    if (auto it = base.find(r.seed); it != base.end()) {
      diffs.push_back(r.risk - it->second);
      base_used.push_back(it->second);
    }
  }
  RiskComparison cmp{baseline, candidate, diffs.size(), kNaN, kNaN, kNaN, kNaN, false};
  if (diffs.empty()) return cmp;
  cmp.mean_difference = mean_of(diffs);
  cmp.relative_difference = cmp.mean_difference / mean_of(base_used);
  cmp.std_error = std_error_of(diffs);
  cmp.upper_95 = bootstrap_upper_95(diffs, resamples, seed);
  cmp.candidate_not_worse = cmp.upper_95 <= 0.0;
  return cmp;
}

/// Simulates every seed, runs every filter and aggregates. Filter aborts are
/// recorded per seed, not thrown.
inline BenchReport run_scenario(const ScenarioConfig& c) {
  c.validate();
  const AnyModel model = c.model();
  FilterConfig base;
  base.mode = c.optimal_mode;
  base.grid = c.grid;
  base.kernel = c.kernel;

  const bool needs_grid =
      std::any_of(c.filters.begin(), c.filters.end(), [&](FilterKind k) {
        return k == FilterKind::grid || (k == FilterKind::optimal_eq && c.optimal_mode == PredictiveMode::grid);
      });
  std::optional<GridFilter> grid;
  if (needs_grid) grid.emplace(model, c.grid);

  const std::size_t nf = c.filters.size();
  std::vector<SeedRow> rows(c.seeds.size() * nf);
  parallel_for(c.seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = c.seeds[i];
    const Trajectory tr = simulate_scenario(c, seed);
    for (std::size_t f = 0; f < nf; ++f) {
      FilterConfig fc = base;
      fc.kind = c.filters[f];
      SeedRow row{to_string(fc.kind), seed, kNaN, 0, 0, tr.clamp_count, {}};
      try {
        const FilterReport r = run_filter_pipeline(model, tr, fc, grid ? &*grid : nullptr);
        row.risk = r.empirical_risk;
        row.saturation = r.saturation_count;
        row.step_errors = r.error_count;
      } catch (const Error& e) {
        row.failure = e.what();
      }
      rows[i * nf + f] = std::move(row);
    }
  });

  BenchReport report;
  report.config = c.echo();
  for (std::size_t i = 0; i < c.seeds.size(); ++i) report.clamp_total += rows[i * nf].clamps;
  for (FilterKind k : c.filters) {
    const std::string id = to_string(k);
    FilterSummary s{id, kNaN, kNaN, 0, 0, 0, 0};
    std::vector<double> risks;
    for (const auto& r : rows) {
      if (r.filter != id) continue;
      s.saturation_total += r.saturation;
      s.step_error_total += r.step_errors;
      if (!r.failure.empty() || !std::isfinite(r.risk)) {
        ++s.failed_seeds;
        continue;
      }
      risks.push_back(r.risk);
    }
    s.seeds_used = risks.size();
    s.mean_risk = mean_of(risks);
    s.std_error = std_error_of(risks);
    report.summaries.push_back(s);
  }
  const auto has = [&](FilterKind k) { return std::find(c.filters.begin(), c.filters.end(), k) != c.filters.end(); };
  if (has(FilterKind::kalman) && has(FilterKind::grid)) {
    report.comparison = compare_risks(rows, "kalman", "grid", c.bootstrap_resamples, c.bootstrap_seed);
  }
  report.rows = std::move(rows);
  return report;
}

// --------------------------------------------------------------------------
// Emission

inline std::string bench_rows_csv(const BenchReport& r) {
  std::string out = "filter,seed,risk,saturation,step_errors,clamps,status\n";
  for (const auto& row : r.rows) {
    out += row.filter + ',' + std::to_string(row.seed) + ',' + fmt17(row.risk) + ',' + std::to_string(row.saturation) +
           ',' + std::to_string(row.step_errors) + ',' + std::to_string(row.clamps) + ',' +
           (row.failure.empty() ? "ok" : "failed") + '\n';
  }
  return out;
}

inline std::string bench_summary_csv(const BenchReport& r) {
  std::string out = "filter,mean_risk,std_error,seeds_used,failed_seeds,saturation_total,step_error_total\n";
  for (const auto& s : r.summaries) {
    out += s.filter + ',' + fmt17(s.mean_risk) + ',' + fmt17(s.std_error) + ',' + std::to_string(s.seeds_used) + ',' +
           std::to_string(s.failed_seeds) + ',' + std::to_string(s.saturation_total) + ',' +
           std::to_string(s.step_error_total) + '\n';
  }
  return out;
}

inline nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json bench_json(const BenchReport& r) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = r.version;
  j["config"] = r.config;
  j["clamp_total"] = r.clamp_total;
  j["filters"] = nlohmann::json::array();
  for (const auto& s : r.summaries) {
    j["filters"].push_back({{"filter", s.filter},
                            {"mean_risk", json_number(s.mean_risk)},
                            {"std_error", json_number(s.std_error)},
                            {"seeds_used", s.seeds_used},
                            {"failed_seeds", s.failed_seeds},
                            {"saturation_total", s.saturation_total},
                            {"step_error_total", s.step_error_total}});
  }
  if (r.comparison) {
    const auto& c = *r.comparison;
    j["comparison"] = {{"baseline", c.baseline},
                       {"candidate", c.candidate},
                       {"pairs", c.pairs},
                       {"mean_difference", json_number(c.mean_difference)},
                       {"relative_difference", json_number(c.relative_difference)},
                       {"std_error", json_number(c.std_error)},
                       {"upper_95", json_number(c.upper_95)},
                       {"candidate_not_worse", c.candidate_not_worse}};
  }
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json jr = {{"filter", row.filter},       {"seed", row.seed},
                         {"risk", json_number(row.risk)}, {"saturation", row.saturation},
                         {"step_errors", row.step_errors}, {"clamps", row.clamps}};
    if (!row.failure.empty()) jr["failure"] = row.failure;
    j["rows"].push_back(std::move(jr));
  }
  return j;
}

/// csv: bench.csv (one row per filter and seed) and bench_summary.csv.
/// json: bench.json with summary, comparison, config echo and rows.
/// Returns the written paths.
inline std::vector<std::filesystem::path> emit_report(const BenchReport& r, ReportFormat format,
                                                      const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::csv) {
    written.push_back(dir / "bench.csv");
    write_text(written.back(), bench_rows_csv(r));
    written.push_back(dir / "bench_summary.csv");
    write_text(written.back(), bench_summary_csv(r));
  } else {
    written.push_back(dir / "bench.json");
    write_text(written.back(), bench_json(r).dump(2) + "\n");
  }
  return written;
}

}  // namespace qfilter
