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

// CSV and JSON encodings of trajectories, filter reports and qudit states.
// Doubles in CSV are written with 17 significant digits so they read back
// bit for bit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfilter/filters.hpp"
#include "qfilter/qudit.hpp"

namespace qfilter {

inline constexpr int kSchemaVersion = 1;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string(), ec.message());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os << text;
  if (!os) throw IoError(path.string(), "write failed");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// --------------------------------------------------------------------------
// Trajectories

inline std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "step,hidden,observed\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    out += std::to_string(k + 1) + ',' + fmt17(tr.hidden[k]) + ',' + fmt17(tr.observed[k]) + '\n';
  }
  return out;
}

inline nlohmann::json trajectory_meta(const Trajectory& tr) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : tr.parameters) params[k] = v;
  return {{"schema_version", kSchemaVersion},
          {"version", kVersion},
          {"model", tr.model_id},
          {"parameters", params},
          {"seed", tr.seed},
          {"length", tr.size()},
          {"initial_state", tr.initial_state},
          {"clamp_count", tr.clamp_count}};
}

/// Writes <stem>.csv and the <stem>.json sidecar.
inline void write_trajectory(const Trajectory& tr, const std::filesystem::path& stem) {
  write_text(stem.string() + ".csv", trajectory_csv(tr));
  write_text(stem.string() + ".json", trajectory_meta(tr).dump(2) + "\n");
}

/// Parses the step,hidden,observed table. Metadata comes from the sidecar if
/// one sits next to the CSV.
inline Trajectory read_trajectory(const std::filesystem::path& csv) {
  std::istringstream is(read_text(csv));
  std::string line;
  if (!std::getline(is, line) || line.rfind("step,hidden,observed", 0) != 0) {
    throw IoError(csv.string(), "missing step,hidden,observed header");
  }
  Trajectory tr;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string step, hidden, observed;
    if (!std::getline(ls, step, ',') || !std::getline(ls, hidden, ',') || !std::getline(ls, observed)) {
      throw IoError(csv.string(), "malformed row " + std::to_string(row));
    }
    try {
      tr.hidden.push_back(std::stod(hidden));
      tr.observed.push_back(std::stod(observed));
    } catch (const std::exception&) {
      throw IoError(csv.string(), "non-numeric value in row " + std::to_string(row));
    }
  }
  auto sidecar = csv;
  sidecar.replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    try {
      const auto meta = nlohmann::json::parse(read_text(sidecar));
      tr.model_id = meta.value("model", "");
      tr.seed = meta.value("seed", std::uint64_t{0});
      tr.initial_state = meta.value("initial_state", 0.0);
      tr.clamp_count = meta.value("clamp_count", std::size_t{0});
      if (meta.contains("parameters")) {
        for (const auto& [k, v] : meta["parameters"].items()) tr.parameters.emplace_back(k, v.get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError(sidecar.string(), e.what());
    }
  }
  tr.validate();
  return tr;
}

// --------------------------------------------------------------------------
// Filter reports

inline std::string filter_report_csv(const FilterReport& r) {
  std::string out = "step,estimate,hidden,squared_error\n";
  for (std::size_t k = 0; k < r.estimates.size(); ++k) {
    out += std::to_string(k + 1) + ',' + fmt17(r.estimates[k]) + ',' + fmt17(r.hidden[k]) + ',' +
           fmt17(r.squared_errors[k]) + '\n';
  }
  return out;
}

inline nlohmann::json filter_report_summary(const FilterReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"filter", r.filter_id},
          {"steps", r.estimates.size()},
          {"empirical_risk", r.empirical_risk},
          {"saturation_count", r.saturation_count},
          {"error_count", r.error_count}};
}

// --------------------------------------------------------------------------
// Qudit states

inline nlohmann::json to_json(const QuditState& q) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json rr = nlohmann::json::array(), ii = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) {
      rr.push_back(q.data()(i, j).real());
      ii.push_back(q.data()(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"labels", {"3/2", "1/2", "-1/2", "-3/2"}}, {"real", re}, {"imag", im}};
}

inline QuditState qudit_from_json(const nlohmann::json& j) {
  try {
    const auto& re = j.at("real");
    const auto& im = j.at("imag");
    if (re.size() != 4 || im.size() != 4) throw DimensionError("qudit JSON must hold 4x4 arrays");
    Eigen::MatrixXcd m(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      if (re[i].size() != 4 || im[i].size() != 4) throw DimensionError("qudit JSON must hold 4x4 arrays");
      for (std::size_t k = 0; k < 4; ++k) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            Complex(re[i][k].get<double>(), im[i][k].get<double>());
      }
    }
    return QuditState(DensityMatrix(ComplexMatrix(std::move(m))));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidStateError(std::string("malformed qudit JSON: ") + e.what());
  }
}

}  // namespace qfilter
