// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/core.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ntfs {

struct ObservableValue {
  double mean = 0.0;
  double error = 0.0;
  double imag = 0.0;
};

/// One line of a series file. Segments are C1_pite, C2_sr, C3_tvmc for
/// variational runs and ED_thermal, ED_evolve, METTS for the oracles.
struct TimeSeriesRecord {
  std::string segment;
  long step = 0;
  double beta = 0.0;
  double t = 0.0;
  std::map<std::string, ObservableValue> observables;
  ObservableValue energy;
  std::map<std::string, double> diagnostics;

  [[nodiscard]] bool real_time() const { return segment == "C3_tvmc" || segment == "ED_evolve"; }
};

inline nlohmann::json to_json(const TimeSeriesRecord& r) {
  nlohmann::json j;
  j["segment"] = r.segment;
  j["step"] = r.step;
  j["beta"] = r.beta;
  j["t"] = r.t;
  nlohmann::json obs = nlohmann::json::object();
  for (const auto& [k, v] : r.observables)
    obs[k] = {{"mean", v.mean}, {"stderr", v.error}, {"imag", v.imag}};
  j["observables"] = obs;
  j["energy"] = {{"mean", r.energy.mean}, {"stderr", r.energy.error}, {"imag", r.energy.imag}};
  nlohmann::json diag = nlohmann::json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
  j["diagnostics"] = diag;
  return j;
}

inline TimeSeriesRecord record_from_json(const nlohmann::json& j) {
  try {
    TimeSeriesRecord r;
    r.segment = j.at("segment").get<std::string>();
    r.step = j.value("step", 0L);
    r.beta = j.at("beta").get<double>();
    r.t = j.at("t").get<double>();
    auto value = [](const nlohmann::json& v) {
      return ObservableValue{v.at("mean").get<double>(), v.value("stderr", 0.0),
                             v.value("imag", 0.0)};
    };
    for (auto it = j.at("observables").begin(); it != j.at("observables").end(); ++it)
      r.observables[it.key()] = value(it.value());
    if (j.contains("energy")) r.energy = value(j["energy"]);
    if (j.contains("diagnostics"))
      for (auto it = j["diagnostics"].begin(); it != j["diagnostics"].end(); ++it)
        r.diagnostics[it.key()] = it.value().is_null() ? std::nan("") : it.value().get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed series record: ") + e.what());
  }
}

inline void append_record(const std::string& path, const TimeSeriesRecord& r) {
  std::ofstream out(path, std::ios::app);
  NTFS_CHECK(out.good(), SchemaError, "cannot append to series '" + path + "'");
  out << to_json(r).dump() << '\n';
}

inline std::vector<TimeSeriesRecord> read_series(const std::string& path) {
  std::ifstream in(path);
  NTFS_CHECK(in.good(), SchemaError, "cannot open series '" + path + "'");
  std::vector<TimeSeriesRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("series line is not JSON: " + std::string(e.what()));
    }
  }
  return out;
}

inline void write_series(const std::string& path, const std::vector<TimeSeriesRecord>& rows) {
  std::ofstream out(path, std::ios::trunc);
  NTFS_CHECK(out.good(), SchemaError, "cannot write series '" + path + "'");
  for (const auto& r : rows) out << to_json(r).dump() << '\n';
}

/// CSV with one mean and one stderr column per observable. A window > 1
/// replaces each mean by the trailing moving average over that many rows;
/// stored series are never smoothed.
inline std::string export_csv(const std::vector<TimeSeriesRecord>& rows, int window = 1) {
  NTFS_CHECK(window >= 1, ContractViolation, "moving-average window must be >= 1");
  std::set<std::string> names;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.observables) names.insert(k);
  std::ostringstream os;
  os << std::setprecision(12);
  os << "segment,step,beta,t";
  for (const auto& n : names) os << ',' << n << "_mean," << n << "_stderr";
  os << ",energy_mean,energy_stderr\n";
  auto smooth = [&](std::size_t i, auto get) {
    if (window == 1) return get(rows[i]);
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(window) ? i + 1 - window : 0;
    double s = 0.0;
    for (std::size_t k = lo; k <= i; ++k) s += get(rows[k]);
    return s / static_cast<double>(i - lo + 1);
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << r.segment << ',' << r.step << ',' << r.beta << ',' << r.t;
    for (const auto& n : names) {
      auto it = r.observables.find(n);
      if (it == r.observables.end()) {
        os << ",,";
        continue;
      }
      os << ',' << smooth(i, [&](const TimeSeriesRecord& q) {
        auto f = q.observables.find(n);
        return f == q.observables.end() ? it->second.mean : f->second.mean;
      }) << ',' << it->second.error;
    }
    os << ',' << smooth(i, [](const TimeSeriesRecord& q) { return q.energy.mean; }) << ','
       << r.energy.error << '\n';
  }
  return os.str();
}

struct CompareOptions {
  double atol = 0.02;
  double nsigma = 3.0;
  enum class Axis { automatic, beta, t } axis = Axis::automatic;
};

struct ObservableComparison {
  std::string name;
  double max_abs_delta = 0.0;
  double max_sigma_delta = 0.0;  // |delta| / combined stderr, 0 if both exact
  int points = 0;
  bool pass = true;
};

struct CompareReport {
  std::string axis;
  std::vector<ObservableComparison> observables;
  [[nodiscard]] bool pass() const {
    return std::all_of(observables.begin(), observables.end(),
                       [](const auto& o) { return o.pass; });
  }
};

/// Compares b against a on a's grid by linear interpolation of b, over the
/// overlap of the two grids and the intersection of observable names. A point
/// passes when |delta| <= max(atol, nsigma * sigma).
inline CompareReport compare_series(const std::vector<TimeSeriesRecord>& a,
                                    const std::vector<TimeSeriesRecord>& b,
                                    const CompareOptions& opt = {}) {
  bool use_t = false;
  if (opt.axis == CompareOptions::Axis::t) use_t = true;
  if (opt.axis == CompareOptions::Axis::automatic) {
    auto has_real = [](const auto& rows) {
      return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.real_time(); });
    };
    use_t = has_real(a) && has_real(b);
  }
  auto select = [&](const std::vector<TimeSeriesRecord>& rows) {
    std::vector<const TimeSeriesRecord*> out;
    for (const auto& r : rows)
      if (r.real_time() == use_t) out.push_back(&r);
    std::stable_sort(out.begin(), out.end(), [&](auto* x, auto* y) {
      return (use_t ? x->t : x->beta) < (use_t ? y->t : y->beta);
    });
    return out;
  };
  const auto ra = select(a);
  const auto rb = select(b);
  auto coord = [&](const TimeSeriesRecord* r) { return use_t ? r->t : r->beta; };

  std::set<std::string> names_a, names_b;
  for (auto* r : ra)
    for (const auto& [k, v] : r->observables) names_a.insert(k);
  for (auto* r : rb)
    for (const auto& [k, v] : r->observables) names_b.insert(k);

  CompareReport rep;
  rep.axis = use_t ? "t" : "beta";
  for (const auto& name : names_a) {
    if (!names_b.count(name)) continue;
    ObservableComparison oc;
    oc.name = name;
    std::vector<std::pair<double, ObservableValue>> grid;
    for (auto* r : rb) {
      auto it = r->observables.find(name);
      if (it != r->observables.end()) grid.emplace_back(coord(r), it->second);
    }
    if (grid.empty()) continue;
    constexpr double eps = 1e-9;
    for (auto* r : ra) {
      auto it = r->observables.find(name);
      if (it == r->observables.end()) continue;
      const double x = coord(r);
      if (x < grid.front().first - eps || x > grid.back().first + eps) continue;
      auto hi = std::lower_bound(grid.begin(), grid.end(), x - eps,
                                 [](const auto& g, double v) { return g.first < v; });
      ObservableValue vb;
      if (hi == grid.begin() || std::abs(hi->first - x) <= eps) {
        vb = hi->second;
      } else {
        auto lo = std::prev(hi);
        const double f = (x - lo->first) / (hi->first - lo->first);
        vb.mean = (1 - f) * lo->second.mean + f * hi->second.mean;
        vb.error = std::hypot((1 - f) * lo->second.error, f * hi->second.error);
      }
      const double delta = std::abs(it->second.mean - vb.mean);
      const double sigma = std::hypot(it->second.error, vb.error);
      oc.max_abs_delta = std::max(oc.max_abs_delta, delta);
      if (sigma > 0.0) oc.max_sigma_delta = std::max(oc.max_sigma_delta, delta / sigma);
      if (delta > std::max(opt.atol, opt.nsigma * sigma)) oc.pass = false;
      ++oc.points;
    }
    rep.observables.push_back(oc);
  }
  return rep;
}

}  // namespace ntfs
