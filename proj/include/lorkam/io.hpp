#pragma once

// JSON and CSV serialization of library results. Angles go out as (−π, π]
// representatives with an integer winding; CSV floats use %.17g.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lorkam/cutlocus.hpp"
#include "lorkam/distance.hpp"
#include "lorkam/geodesic.hpp"
#include "lorkam/homotopy.hpp"
#include "lorkam/laxoleinik.hpp"
#include "lorkam/spacetime.hpp"

namespace lorkam::io {

using json = nlohmann::json;

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json point_json(const Spacetime& sp, const ChartPoint& p) {
  json j;
  if (sp.periodic()) {
    j["coords"] = {p[0], wrap_angle(p[1])};
    j["winding"] = winding_of(p[1]);
  } else {
    j["coords"] = vec_json(p.coords);
  }
  return j;
}

inline json candidate_json(const Spacetime& sp, const Candidate& c) {
  json j{{"v", vec_json(c.v.components)},
         {"residual", c.residual},
         {"length", c.length},
         {"class", to_string(c.cls)},
         {"endpoint", point_json(sp, c.target)}};
  if (sp.periodic()) j["winding"] = c.winding;
  return j;
}

inline json to_json(const Spacetime& sp, const MaximizerSet& ms) {
  json m = json::array();
  for (const auto& c : ms.maximizers) m.push_back(candidate_json(sp, c));
  return json{{"relation", to_string(ms.relation)},
              {"d", ms.d},
              {"multiplicity", ms.multiplicity()},
              {"maximizers", m}};
}

inline json to_json(const CutTime& a) {
  json j{{"kind", to_string(a.kind)}};
  j["value"] = a.finite() ? json(a.value) : json(nullptr);
  return j;
}

inline json to_json(const Spacetime& sp, const CutRecord& r) {
  json j{{"x", point_json(sp, r.x)},
         {"v", vec_json(r.v.components)},
         {"direction", r.direction},
         {"alpha", to_json(r.alpha)},
         {"conjugate", r.conjugate},
         {"multi_geodesic", r.multi_geodesic}};
  j["cut_point"] = r.cut_point ? point_json(sp, *r.cut_point) : json(nullptr);
  j["conjugate_time"] = r.conjugate_time ? json(*r.conjugate_time) : json(nullptr);
  j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
  return j;
}

inline json to_json(const Spacetime& sp, const NonMaxWitness& w) {
  return json{{"a", w.a},
              {"b", w.b},
              {"from", point_json(sp, w.from)},
              {"to", point_json(sp, w.to)},
              {"own_length", w.own_length},
              {"competitor_length", w.competitor_length},
              {"second_maximizer", w.second_maximizer}};
}

inline json to_json(const Spacetime& sp, const AubryVerdict& v) {
  json j{{"verdict", to_string(v.kind)}, {"horizon", v.horizon}};
  j["t_reach"] = std::isfinite(v.t_reach) ? json(v.t_reach) : json(nullptr);
  j["witness"] = v.witness ? to_json(sp, *v.witness) : json(nullptr);
  j["evidence"] = v.evidence ? to_json(sp, *v.evidence) : json(nullptr);
  return j;
}

inline json to_json(const FieldStats& s) {
  return json{{"sd_max", s.sd_max},
              {"sd_min", s.sd_min},
              {"gradient_jump", s.gradient_jump},
              {"gradient_jump_t", s.gradient_jump_t},
              {"gradient_jump_theta", s.gradient_jump_theta}};
}

inline json to_json(const RegularityReport& r) {
  return json{{"grid", {{"t0", r.grid.t0}, {"t1", r.grid.t1}, {"theta0", r.grid.th0},
                        {"theta1", r.grid.th1}, {"n", r.grid.n}}},
              {"s", r.s},
              {"t", r.t},
              {"T_stats", to_json(r.T_stats)},
              {"H_stats", to_json(r.H_stats)},
              {"semiconvex_C", r.semiconvex_C},
              {"semiconcave_C", r.semiconcave_C},
              {"c1_smooth", r.c1_smooth},
              {"c1_eps", r.c1_eps},
              {"failed_points", r.failed_points}};
}

inline json to_json(const Spacetime& sp, const LOEvaluation& e) {
  return json{{"s", e.s},
              {"t", e.t},
              {"x", point_json(sp, e.x)},
              {"y", point_json(sp, e.y)},
              {"value", e.value},
              {"argmax", point_json(sp, e.argmax_z)},
              {"argmax_equals_y", e.argmax_equals_y},
              {"search_radius", e.search_radius},
              {"multiplicity_flag", e.multiplicity_flag},
              {"evaluations", e.evaluations}};
}

// ---- CSV ----

inline void write_geodesic_csv(std::ostream& os, const Spacetime& sp, const GeodesicRecord& g,
                               double t0, double t1, int samples) {
  os << "t";
  for (int i = 0; i < sp.dim; ++i) os << ",x" << i;
  for (int i = 0; i < sp.dim; ++i) os << ",v" << i;
  os << ",energy\n";
  for (int k = 0; k < samples; ++k) {
    const double t = samples == 1 ? t1 : t0 + (t1 - t0) * k / (samples - 1);
    auto st = g.state(t);
    os << num(t);
    for (int i = 0; i < sp.dim; ++i) os << ',' << num(st[i]);
    for (int i = 0; i < sp.dim; ++i) os << ',' << num(st[sp.dim + i]);
    os << ',' << num(g.energy(t)) << '\n';
  }
}

inline void write_cut_csv(std::ostream& os, const std::vector<CutRecord>& recs) {
  os << "direction,alpha,cut_t,cut_theta,conjugate,multi_geodesic,kind\n";
  for (const auto& r : recs) {
    os << num(r.direction) << ',' << (r.alpha.finite() ? num(r.alpha.value) : "inf") << ',';
    if (r.cut_point)
      os << num((*r.cut_point)[0]) << ',' << num((*r.cut_point)[1]);
    else
      os << ",";
    os << ',' << int(r.conjugate) << ',' << int(r.multi_geodesic) << ','
       << (r.error.empty() ? to_string(r.alpha.kind) : "error") << '\n';
  }
}

inline void write_field_csv(std::ostream& os, const RegularityReport& r) {
  os << "t,theta,T,H\n";
  const int n = r.grid.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto p = r.grid.point(i, j);
      const auto k = static_cast<std::size_t>(i * n + j);
      os << num(p[0]) << ',' << num(p[1]) << ',' << num(r.T_values[k]) << ','
         << num(r.H_values[k]) << '\n';
    }
}

inline void write_trace_csv(std::ostream& os, const Spacetime& sp, const RetractionTrace& tr) {
  os << "tau";
  for (int i = 0; i < sp.dim; ++i) os << ",p" << i;
  for (int i = 0; i < sp.dim; ++i) os << ",q" << i;
  if (!tr.out_of_aubry.empty()) os << ",not_in_aubry";
  os << '\n';
  for (std::size_t k = 0; k < tr.params.size(); ++k) {
    os << num(tr.params[k]);
    for (int i = 0; i < sp.dim; ++i) os << ',' << num(tr.images[k].first[i]);
    for (int i = 0; i < sp.dim; ++i) os << ',' << num(tr.images[k].second[i]);
    if (!tr.out_of_aubry.empty()) os << ',' << int(tr.out_of_aubry[k]);
    os << '\n';
  }
}

// ---- parsing ----

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
    if (used != item.size()) throw ConfigError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

inline Vec parse_vec(const std::string& s, int dim, const char* what) {
  auto v = parse_list(s);
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError(std::string(what) + ": expected " + std::to_string(dim) + " comma-separated values");
  Vec out(dim);
  for (int i = 0; i < dim; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace lorkam::io
