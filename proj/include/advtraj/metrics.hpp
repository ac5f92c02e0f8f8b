// Copyright 2026 The advtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Evaluation measures: attack efficiency (ADE, FDE, CR_pred, CR_FNC),
// perturbation magnitude (D_max, D_mean) and dynamic feasibility of the
// perturbed past controls (mean |a|, mean |kappa|).

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advtraj/core.hpp"

namespace advtraj {

inline double metric_ade(const PredictionSet& pred, const Trajectory& truth) {
  if (pred.samples.empty()) throw std::invalid_argument("metric_ade: empty prediction set");
  double sum = 0.0;
  for (const Trajectory& s : pred.samples) {
    if (s.size() != truth.size()) throw std::invalid_argument("metric_ade: horizon mismatch");
    for (std::size_t t = 0; t < truth.size(); ++t) sum += distance(s[t], truth[t]);
  }
  return sum / static_cast<double>(pred.K() * truth.size());
}

inline double metric_fde(const PredictionSet& pred, const Trajectory& truth) {
  if (pred.samples.empty()) throw std::invalid_argument("metric_fde: empty prediction set");
  double sum = 0.0;
  for (const Trajectory& s : pred.samples) {
    if (s.size() != truth.size()) throw std::invalid_argument("metric_fde: horizon mismatch");
    sum += distance(s.back(), truth.back());
  }
  return sum / static_cast<double>(pred.K());
}

struct Footprint {
  double length = kDefaultVehicleLength;
  double width = kDefaultVehicleWidth;
};

// Heading at each point from the segment arriving at it; the first point uses
// the segment from `anchor` (the last past position). A zero-length segment
// keeps the previous heading.
inline std::vector<double> finite_difference_headings(const Trajectory& traj, const Point& anchor,
                                                      double initial = 0.0) {
  std::vector<double> out;
  out.reserve(traj.size());
  double heading = initial;
  Point prev = anchor;
  for (const Point& p : traj.points) {
    const double dx = p.x - prev.x;
    const double dy = p.y - prev.y;
    if (dx != 0.0 || dy != 0.0) heading = std::atan2(dy, dx);
    out.push_back(heading);
    prev = p;
  }
  return out;
}

// Heading of the last segment of a past trajectory.
inline double terminal_heading(const Trajectory& past) {
  for (std::size_t i = past.size(); i-- > 1;) {
    const double dx = past[i].x - past[i - 1].x;
    const double dy = past[i].y - past[i - 1].y;
    if (dx != 0.0 || dy != 0.0) return std::atan2(dy, dx);
  }
  return 0.0;
}

// 1 if the two trajectories' footprints overlap at any matched time index.
inline int trajectories_collide(const Trajectory& a, const Point& a_anchor, double a_initial_heading,
                                const Trajectory& b, const Point& b_anchor, double b_initial_heading,
                                const Footprint& fp) {
  if (a.size() != b.size()) throw std::invalid_argument("collision check: horizon mismatch");
  const std::vector<double> ha = finite_difference_headings(a, a_anchor, a_initial_heading);
  const std::vector<double> hb = finite_difference_headings(b, b_anchor, b_initial_heading);
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (oriented_box_overlap(a[t], ha[t], b[t], hb[t], fp.length, fp.width)) return 1;
  }
  return 0;
}

// Fraction of predicted samples whose footprint meets the ego at some step.
inline double metric_cr_pred(const PredictionSet& pred, const Trajectory& target_past, const Trajectory& ego_past,
                             const Trajectory& ego_future, const Footprint& fp) {
  if (pred.samples.empty()) throw std::invalid_argument("metric_cr_pred: empty prediction set");
  int hits = 0;
  for (const Trajectory& s : pred.samples) {
    hits += trajectories_collide(s, target_past.back(), terminal_heading(target_past), ego_future, ego_past.back(),
                                 terminal_heading(ego_past), fp);
  }
  return static_cast<double>(hits) / static_cast<double>(pred.K());
}

// 1 if the perturbed target future itself meets the ego at a matched step.
inline int metric_cr_fnc(const Trajectory& future_perturbed, const Trajectory& past_perturbed,
                         const Trajectory& ego_past, const Trajectory& ego_future, const Footprint& fp) {
  return trajectories_collide(future_perturbed, past_perturbed.back(), terminal_heading(past_perturbed), ego_future,
                              ego_past.back(), terminal_heading(ego_past), fp);
}

inline double metric_dmax(const Trajectory& past_perturbed, const Trajectory& past) {
  if (past_perturbed.size() != past.size()) throw std::invalid_argument("metric_dmax: length mismatch");
  double m = 0.0;
  for (std::size_t t = 0; t < past.size(); ++t) m = std::max(m, distance(past_perturbed[t], past[t]));
  return m;
}

inline double metric_dmean(const Trajectory& past_perturbed, const Trajectory& past) {
  if (past_perturbed.size() != past.size() || past.size() == 0) throw std::invalid_argument("metric_dmean: length mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < past.size(); ++t) s += distance(past_perturbed[t], past[t]);
  return s / static_cast<double>(past.size());
}

inline double metric_accel(const ControlSequence& past_controls) {
  if (past_controls.inputs.empty()) throw std::invalid_argument("metric_accel: empty controls");
  double s = 0.0;
  for (const ControlInput& u : past_controls.inputs) s += std::abs(u.a);
  return s / static_cast<double>(past_controls.size());
}

inline double metric_curv(const ControlSequence& past_controls) {
  if (past_controls.inputs.empty()) throw std::invalid_argument("metric_curv: empty controls");
  double s = 0.0;
  for (const ControlInput& u : past_controls.inputs) s += std::abs(u.kappa);
  return s / static_cast<double>(past_controls.size());
}

// One report row. Optional values serialise as "-".
struct MetricRow {
  std::string id;
  std::string objective;
  std::string obs_constraint;
  std::string fut_constraint;
  std::optional<double> ade;
  std::optional<double> fde;
  std::optional<double> cr_pred;
  std::optional<double> cr_fnc;
  std::optional<double> d_max;
  std::optional<double> d_mean;
  std::optional<double> a_mag;
  std::optional<double> k_mag;
};

inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols = {"id",     "objective", "obs_constraint", "fut_constraint",
                                                "ADE",    "FDE",       "CR_pred",        "CR_FNC",
                                                "D_max",  "D_mean",    "a_mag",          "k_mag"};
  return cols;
}

inline std::vector<std::optional<double> MetricRow::*> metric_value_members() {
  return {&MetricRow::ade,   &MetricRow::fde,    &MetricRow::cr_pred, &MetricRow::cr_fnc,
          &MetricRow::d_max, &MetricRow::d_mean, &MetricRow::a_mag,   &MetricRow::k_mag};
}

// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t << std::setprecision(p) << v;
    if (std::stod(t.str()) == v) return t.str();
  }
  return os.str();
}

inline std::string format_cell(const std::optional<double>& v) { return v ? format_number(*v) : "-"; }

inline void write_csv_header(std::ostream& os) {
  const auto& cols = metric_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

inline void write_csv_row(std::ostream& os, const MetricRow& r) {
  os << r.id << ',' << r.objective << ',' << r.obs_constraint << ',' << r.fut_constraint;
  for (auto m : metric_value_members()) os << ',' << format_cell(r.*m);
  os << '\n';
}

inline nlohmann::ordered_json to_json(const MetricRow& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["objective"] = r.objective;
  j["obs_constraint"] = r.obs_constraint;
  j["fut_constraint"] = r.fut_constraint;
  const auto& cols = metric_columns();
  const auto members = metric_value_members();
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& v = r.*members[i];
    if (v) {
      j[cols[4 + i]] = *v;
    } else {
      j[cols[4 + i]] = "-";
    }
  }
  return j;
}

inline MetricRow metric_row_from_json(const nlohmann::json& j) {
  MetricRow r;
  r.id = j.at("id").get<std::string>();
  r.objective = j.at("objective").get<std::string>();
  r.obs_constraint = j.at("obs_constraint").get<std::string>();
  r.fut_constraint = j.at("fut_constraint").get<std::string>();
  const auto& cols = metric_columns();
  const auto members = metric_value_members();
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& cell = j.at(cols[4 + i]);
    if (cell.is_number()) r.*members[i] = cell.get<double>();
  }
  return r;
}

// Arithmetic mean per column over rows sharing (objective, obs, fut). A
// column whose cells are all "-" stays "-". Groups keep first-seen order and
// the id column is the number of rows averaged.
inline std::vector<MetricRow> aggregate(const std::vector<MetricRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("aggregate: no rows");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const MetricRow*>> groups;
  for (const MetricRow& r : rows) {
    const std::string key = r.objective + "\x1f" + r.obs_constraint + "\x1f" + r.fut_constraint;
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<MetricRow> out;
  for (const std::string& key : order) {
    const auto& g = groups[key];
    MetricRow a;
    a.id = std::to_string(g.size());
    a.objective = g.front()->objective;
    a.obs_constraint = g.front()->obs_constraint;
    a.fut_constraint = g.front()->fut_constraint;
    for (auto m : metric_value_members()) {
      double sum = 0.0;
      int n = 0;
      for (const MetricRow* r : g) {
        if (r->*m) {
          sum += *(r->*m);
          ++n;
        }
      }
      if (n > 0) a.*m = sum / n;
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace advtraj
