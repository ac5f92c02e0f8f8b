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

// Synthetic left-turn scenarios, prediction-point selection, Savitzky-Golay
// smoothing, and scenario files (JSON lines and long-format CSV).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "advtraj/core.hpp"
#include "advtraj/dynamics.hpp"

namespace advtraj {

// Round to 9 significant decimal digits, the precision of scenario files.
inline double quantize9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline std::string format9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void quantize(Trajectory& t) {
  for (Point& p : t.points) p = {quantize9(p.x), quantize9(p.y)};
}

// ---------------------------------------------------------------------------
// Prediction point

// Index at which the ego, approaching `intersection`, is about as far from it
// as its braking distance v^2 / (2 b_max). Only indices leaving room for H
// past and T future points are considered; ties go to the earlier index.
inline std::optional<std::size_t> select_prediction_index(const Trajectory& ego_episode, const Point& intersection,
                                                          double b_max, int H, int T) {
  if (!(b_max > 0.0)) throw ConfigError("select_prediction_point: b_max must be positive");
  if (H < 2 || T < 1) throw ConfigError("select_prediction_point: H >= 2 and T >= 1 required");
  const std::size_t n = ego_episode.size();
  if (n < static_cast<std::size_t>(H + T)) return std::nullopt;
  std::optional<std::size_t> best;
  double best_cost = 0.0;
  for (std::size_t i = static_cast<std::size_t>(H - 1); i + static_cast<std::size_t>(T) < n; ++i) {
    const Point& p = ego_episode[i];
    const Point step = ego_episode[i] - ego_episode[i - 1];
    const Point to_goal = intersection - p;
    if (dot(step, to_goal) <= 0.0) continue;
    const double v = norm(step) / ego_episode.dt;
    const double cost = std::abs(norm(to_goal) - v * v / (2.0 * b_max));
    if (!best || cost < best_cost) {
      best = i;
      best_cost = cost;
    }
  }
  return best;
}

inline Trajectory slice(const Trajectory& t, std::size_t begin, std::size_t count, int t0_index) {
  Trajectory out;
  out.dt = t.dt;
  out.t0_index = t0_index;
  out.points.assign(t.points.begin() + static_cast<std::ptrdiff_t>(begin),
                    t.points.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return out;
}

// Cuts H past and T future points around the selected index of a full
// episode. Returns nullopt (with a reason) when no valid slice exists.
inline std::optional<Scenario> select_prediction_point(const Trajectory& ego_episode, const Trajectory& target_episode,
                                                       const Point& intersection, double b_max, int H, int T,
                                                       std::string* diagnostic = nullptr) {
  if (ego_episode.size() != target_episode.size()) throw DataError("select_prediction_point: episode lengths differ");
  if (ego_episode.size() < static_cast<std::size_t>(H + T)) {
    if (diagnostic) *diagnostic = "episode too short for the H+T window";
    return std::nullopt;
  }
  const auto idx = select_prediction_index(ego_episode, intersection, b_max, H, T);
  if (!idx) {
    if (diagnostic) *diagnostic = "ego never approaches the intersection inside a full window";
    return std::nullopt;
  }
  const std::size_t first = *idx + 1 - static_cast<std::size_t>(H);
  Scenario s;
  s.ego_past = slice(ego_episode, first, static_cast<std::size_t>(H), -H + 1);
  s.target_past = slice(target_episode, first, static_cast<std::size_t>(H), -H + 1);
  s.ego_future = slice(ego_episode, *idx + 1, static_cast<std::size_t>(T), 1);
  s.target_future = slice(target_episode, *idx + 1, static_cast<std::size_t>(T), 1);
  return s;
}

// ---------------------------------------------------------------------------
// Left-turn generator

struct LeftTurnParams {
  double v_target = 6.0;
  double v_ego = 10.0;
  double turn_radius = 8.0;
  // Ego reaches the conflict point this long after the target crosses its
  // lane (negative: before). Large |gap_s| means no conflict.
  double gap_s = 2.0;
  int H = 12;
  int T = 12;
  double dt = 0.1;
  double lane_offset = 1.75;
  double b_max = 6.0;
};

struct LeftTurnEpisode {
  Trajectory target;
  Trajectory ego;
  Point conflict_point;
};

// Target drives north in the right-hand lane, slows, turns left with
// constant curvature across the oncoming lane and speeds up again. The ego
// drives south in the oncoming lane at constant speed. Both are rollouts of
// explicit controls.
inline LeftTurnEpisode generate_left_turn_episode(const LeftTurnParams& prm, std::uint64_t seed) {
  if (!(prm.dt > 0.0)) throw ConfigError("generate_left_turn: dt must be positive");
  if (prm.turn_radius < 5.0) throw ConfigError("generate_left_turn: turn_radius must be >= 5 m (|kappa| <= 0.2)");
  if (prm.v_target < 0.0 || !(prm.v_ego > 0.0)) throw ConfigError("generate_left_turn: invalid speeds");
  if (prm.H < 3 || prm.T < 1) throw ConfigError("generate_left_turn: H >= 3 and T >= 1 required");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> jitter(0, 5);
  std::uniform_real_distribution<double> decel(0.5, 1.5);
  const double dt = prm.dt;
  const int margin = prm.H + prm.T + 60;
  const int n_approach = margin + jitter(rng);
  const double a_brake = decel(rng);

  ControlSequence u;
  u.dt = dt;
  double conflict_time = n_approach * dt;
  Point conflict{-prm.lane_offset, 0.0};
  AgentState s0{prm.lane_offset, -prm.v_target * n_approach * dt, 0.5 * kPi, prm.v_target, 1};

  if (prm.v_target > 0.0) {
    const int n_brake = static_cast<int>(std::lround(0.2 * prm.v_target / (a_brake * dt)));
    const double v_turn = prm.v_target - n_brake * a_brake * dt;
    const int n_turn = std::max(1, static_cast<int>(std::lround(0.5 * kPi * prm.turn_radius / (v_turn * dt))));
    for (int i = 0; i < n_approach; ++i) u.inputs.push_back({0.0, 0.0});
    for (int i = 0; i < n_brake; ++i) u.inputs.push_back({-a_brake, 0.0});
    for (int i = 0; i < n_turn; ++i) u.inputs.push_back({0.0, 1.0 / prm.turn_radius});
    for (int i = 0; i < n_brake; ++i) u.inputs.push_back({a_brake, 0.0});
    for (int i = 0; i < margin; ++i) u.inputs.push_back({0.0, 0.0});
  } else {
    s0 = AgentState{prm.lane_offset, -6.0, 0.5 * kPi, 0.0, 1};
    for (int i = 0; i < 2 * n_approach + margin; ++i) u.inputs.push_back({0.0, 0.0});
  }
  LeftTurnEpisode ep;
  ep.target = rollout(s0, u);

  if (prm.v_target > 0.0) {
    bool found = false;
    for (std::size_t i = 1; i < ep.target.size(); ++i) {
      const Point& a = ep.target[i - 1];
      const Point& b = ep.target[i];
      if (a.x > -prm.lane_offset && b.x <= -prm.lane_offset) {
        const double f = (a.x + prm.lane_offset) / (a.x - b.x);
        conflict_time = (static_cast<double>(i - 1) + f) * dt;
        conflict = {-prm.lane_offset, a.y + f * (b.y - a.y)};
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("generate_left_turn: turn never crosses the oncoming lane");
  }
  ep.conflict_point = conflict;

  const double ego_start_y = conflict.y + prm.v_ego * (conflict_time + prm.gap_s);
  const AgentState e0{-prm.lane_offset, ego_start_y, -0.5 * kPi, prm.v_ego, 1};
  ControlSequence ue;
  ue.dt = dt;
  ue.inputs.assign(u.size(), ControlInput{0.0, 0.0});
  ep.ego = rollout(e0, ue);
  return ep;
}

inline Scenario generate_left_turn(const LeftTurnParams& prm, std::uint64_t seed, const std::string& id = "") {
  const LeftTurnEpisode ep = generate_left_turn_episode(prm, seed);
  std::string why;
  auto s = select_prediction_point(ep.ego, ep.target, ep.conflict_point, prm.b_max, prm.H, prm.T, &why);
  if (!s) throw ConfigError("generate_left_turn: infeasible parameters (" + why + ")");
  s->id = id.empty() ? "lt-" + std::to_string(seed) : id;
  for (Trajectory* t : {&s->ego_past, &s->ego_future, &s->target_past, &s->target_future}) quantize(*t);
  return *s;
}

struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;
};

enum class GapSide { both, front, behind };

inline GapSide gap_side_from_string(std::string_view s) {
  if (s == "both") return GapSide::both;
  if (s == "front") return GapSide::front;
  if (s == "behind") return GapSide::behind;
  throw ConfigError("unknown gap side '" + std::string(s) + "' (expected both, front or behind)");
}

// Parameter sweep for a scenario set. "behind" puts the ego after the
// target at the conflict point (positive gap_s).
struct SweepConfig {
  ValueRange v_target{4.0, 9.0};
  ValueRange v_ego{7.0, 13.0};
  ValueRange turn_radius{6.0, 15.0};
  ValueRange gap_s{2.5, 4.0};
  GapSide gap_side = GapSide::both;
  LeftTurnParams base;
  int max_redraws = 50;

  void validate() const {
    for (const ValueRange* r : {&v_target, &v_ego, &turn_radius, &gap_s}) {
      if (!(r->lo <= r->hi)) throw ConfigError("sweep: range lower bound exceeds upper bound");
    }
    if (turn_radius.lo < 5.0) throw ConfigError("sweep: turn radius must be >= 5 m");
    if (v_target.lo < 0.0 || !(v_ego.lo > 0.0)) throw ConfigError("sweep: invalid speed range");
    if (!(base.dt > 0.0)) throw ConfigError("sweep: dt must be positive");
    if (base.H < 3 || base.T < 1) throw ConfigError("sweep: H >= 3 and T >= 1 required");
  }
};

// Scenario i depends only on (seed, i). Draws whose episode has no valid
// prediction point are redrawn; `redrawn` counts them.
inline std::vector<Scenario> generate_sweep(const SweepConfig& cfg, int n, std::uint64_t seed, int* redrawn = nullptr) {
  if (n < 1) throw ConfigError("sweep: n must be at least 1");
  cfg.validate();
  std::vector<Scenario> out;
  int skipped = 0;
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(i));
    auto draw = [&](const ValueRange& r) { return std::uniform_real_distribution<double>(r.lo, r.hi)(rng); };
    for (int attempt = 0;; ++attempt) {
      if (attempt == cfg.max_redraws) throw ConfigError("sweep: parameter ranges admit no feasible scenario");
      LeftTurnParams p = cfg.base;
      p.v_target = draw(cfg.v_target);
      p.v_ego = draw(cfg.v_ego);
      p.turn_radius = draw(cfg.turn_radius);
      const double gap = draw(cfg.gap_s);
      const bool behind =
          cfg.gap_side == GapSide::behind || (cfg.gap_side == GapSide::both && std::bernoulli_distribution(0.5)(rng));
      p.gap_s = behind ? gap : -gap;
      const LeftTurnEpisode ep = generate_left_turn_episode(p, rng());
      auto s = select_prediction_point(ep.ego, ep.target, ep.conflict_point, p.b_max, p.H, p.T);
      if (!s) {
        ++skipped;
        continue;
      }
      char id[32];
      std::snprintf(id, sizeof id, "lt-%05d", i);
      s->id = id;
      for (Trajectory* t : {&s->ego_past, &s->ego_future, &s->target_past, &s->target_future}) quantize(*t);
      out.push_back(std::move(*s));
      break;
    }
  }
  if (redrawn) *redrawn = skipped;
  return out;
}

// ---------------------------------------------------------------------------
// Savitzky-Golay smoothing

namespace detail {

// Least-squares polynomial weights: row r evaluates the degree-`order` fit
// over `window` samples at sample r.
inline Eigen::MatrixXd savgol_weights(int window, int order) {
  const double centre = 0.5 * (window - 1);
  Eigen::MatrixXd A(window, order + 1);
  for (int i = 0; i < window; ++i) {
    double x = 1.0;
    for (int j = 0; j <= order; ++j) {
      A(i, j) = x;
      x *= (i - centre);
    }
  }
  const Eigen::MatrixXd pinv = A.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
  return A * pinv;
}

}  // namespace detail

// Per-coordinate least-squares polynomial smoothing. Interior points use the
// centred window; the first and last half-windows are evaluated on the
// polynomial fitted to the edge window.
inline Trajectory smooth_savitzky_golay(const Trajectory& traj, int window = 7, int poly_order = 3) {
  if (window < 1 || window % 2 == 0) throw ConfigError("savitzky_golay: window must be odd");
  if (poly_order < 0 || window <= poly_order) throw ConfigError("savitzky_golay: window must exceed poly_order");
  if (static_cast<std::size_t>(window) > traj.size()) throw ConfigError("savitzky_golay: window longer than trajectory");
  const Eigen::MatrixXd W = detail::savgol_weights(window, poly_order);
  const int n = static_cast<int>(traj.size());
  const int half = window / 2;
  Trajectory out = traj;
  for (int i = 0; i < n; ++i) {
    int start = i - half;
    int row = half;
    if (start < 0) {
      start = 0;
      row = i;
    } else if (start + window > n) {
      start = n - window;
      row = i - start;
    }
    double x = 0.0, y = 0.0;
    for (int j = 0; j < window; ++j) {
      x += W(row, j) * traj[static_cast<std::size_t>(start + j)].x;
      y += W(row, j) * traj[static_cast<std::size_t>(start + j)].y;
    }
    out[static_cast<std::size_t>(i)] = {x, y};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario files

enum class ScenarioFormat { jsonl, csv };

inline ScenarioFormat scenario_format_from_path(const std::string& path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? ScenarioFormat::csv : ScenarioFormat::jsonl;
}

namespace detail {

inline nlohmann::ordered_json points_json(const Trajectory& t) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const Point& p : t.points) a.push_back({quantize9(p.x), quantize9(p.y)});
  return a;
}

inline Trajectory points_from_json(const nlohmann::json& a, double dt, int t0_index, const char* name) {
  if (!a.is_array()) throw DataError(std::string(name) + " must be an array of [x, y] pairs");
  Trajectory t;
  t.dt = dt;
  t.t0_index = t0_index;
  for (const auto& p : a) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw DataError(std::string(name) + " must be an array of [x, y] pairs");
    }
    t.points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return t;
}

}  // namespace detail

inline std::string scenario_to_jsonl(const Scenario& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["dt"] = s.dt();
  j["H"] = s.past_length();
  j["T"] = s.future_length();
  j["vehicle_length"] = s.vehicle_length;
  j["vehicle_width"] = s.vehicle_width;
  j["ego_past"] = detail::points_json(s.ego_past);
  j["ego_future"] = detail::points_json(s.ego_future);
  j["target_past"] = detail::points_json(s.target_past);
  j["target_future"] = detail::points_json(s.target_future);
  return j.dump();
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.id = j.at("id").get<std::string>();
    const double dt = j.at("dt").get<double>();
    const int H = j.at("H").get<int>();
    const int T = j.at("T").get<int>();
    s.vehicle_length = j.value("vehicle_length", kDefaultVehicleLength);
    s.vehicle_width = j.value("vehicle_width", kDefaultVehicleWidth);
    s.ego_past = detail::points_from_json(j.at("ego_past"), dt, -H + 1, "ego_past");
    s.target_past = detail::points_from_json(j.at("target_past"), dt, -H + 1, "target_past");
    s.ego_future = detail::points_from_json(j.at("ego_future"), dt, 1, "ego_future");
    s.target_future = detail::points_from_json(j.at("target_future"), dt, 1, "target_future");
    if (s.ego_past.size() != static_cast<std::size_t>(H) || s.target_past.size() != static_cast<std::size_t>(H)) {
      throw DataError("past length does not match H=" + std::to_string(H));
    }
    if (s.ego_future.size() != static_cast<std::size_t>(T) || s.target_future.size() != static_cast<std::size_t>(T)) {
      throw DataError("future length does not match T=" + std::to_string(T));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(e.what());
  }
  validate(s);
  return s;
}

inline void write_scenarios_csv(std::ostream& os, const std::vector<Scenario>& scenarios) {
  os << "id,agent,role,t_index,x,y,dt\n";
  for (const Scenario& s : scenarios) {
    const std::string dt = format9(s.dt());
    for (auto [agent, role, traj] : {std::tuple{"ego", "past", &s.ego_past}, std::tuple{"ego", "future", &s.ego_future},
                                     std::tuple{"target", "past", &s.target_past},
                                     std::tuple{"target", "future", &s.target_future}}) {
      for (std::size_t i = 0; i < traj->size(); ++i) {
        os << s.id << ',' << agent << ',' << role << ',' << traj->t0_index + static_cast<int>(i) << ','
           << format9((*traj)[i].x) << ',' << format9((*traj)[i].y) << ',' << dt << '\n';
      }
    }
  }
}

inline void write_scenarios(const std::string& path, const std::vector<Scenario>& scenarios, ScenarioFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  if (format == ScenarioFormat::csv) {
    write_scenarios_csv(os, scenarios);
  } else {
    for (const Scenario& s : scenarios) os << scenario_to_jsonl(s) << '\n';
  }
}

struct IngestResult {
  std::vector<Scenario> scenarios;
  std::vector<std::string> diagnostics;
};

inline IngestResult ingest_jsonl(std::istream& is) {
  IngestResult out;
  std::string line;
  int lineno = 0;
  int records = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++records;
    try {
      out.scenarios.push_back(scenario_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      out.diagnostics.push_back("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      out.diagnostics.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (records == 0) throw DataError("scenario file is empty");
  if (out.scenarios.empty()) throw DataError("no valid scenarios (" + std::to_string(out.diagnostics.size()) + " rejected)");
  return out;
}

inline IngestResult ingest_csv(std::istream& is, double default_dt = 0.1) {
  struct Rows {
    int first_line = 0;
    std::map<std::string, std::vector<std::pair<int, Point>>> tracks;
    double dt = 0.0;
    std::vector<std::string> errors;
  };
  IngestResult out;
  std::vector<std::string> order;
  std::map<std::string, Rows> by_id;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  int data_rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("id,agent,role,t_index,x,y", 0) != 0) throw DataError("line 1: unexpected CSV header");
      continue;
    }
    ++data_rows;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const std::string id = f.empty() ? "" : f[0];
    if (!by_id.count(id)) {
      order.push_back(id);
      by_id[id].first_line = lineno;
    }
    Rows& rows = by_id[id];
    try {
      if (f.size() != 6 && f.size() != 7) throw DataError("expected 6 or 7 columns");
      const std::string& agent = f[1];
      const std::string& role = f[2];
      if ((agent != "ego" && agent != "target") || (role != "past" && role != "future")) {
        throw DataError("bad agent/role '" + agent + "/" + role + "'");
      }
      std::size_t used = 0;
      const int t = std::stoi(f[3], &used);
      const Point p{std::stod(f[4]), std::stod(f[5])};
      const double dt = f.size() == 7 ? std::stod(f[6]) : default_dt;
      if (rows.dt != 0.0 && rows.dt != dt) throw DataError("dt differs within scenario");
      rows.dt = dt;
      rows.tracks[agent + "/" + role].push_back({t, p});
    } catch (const std::logic_error&) {
      rows.errors.push_back("line " + std::to_string(lineno) + ": unparsable row");
    } catch (const DataError& e) {
      rows.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (data_rows == 0) throw DataError("scenario file is empty");
  for (const std::string& id : order) {
    Rows& rows = by_id[id];
    if (!rows.errors.empty()) {
      for (const auto& e : rows.errors) out.diagnostics.push_back(e + " (scenario '" + id + "' skipped)");
      continue;
    }
    try {
      Scenario s;
      s.id = id;
      auto build = [&](const std::string& key, bool past) {
        auto it = rows.tracks.find(key);
        if (it == rows.tracks.end()) throw DataError("missing " + key + " rows");
        auto pts = it->second;
        std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        Trajectory t;
        t.dt = rows.dt;
        const int n = static_cast<int>(pts.size());
        t.t0_index = past ? -n + 1 : 1;
        for (int i = 0; i < n; ++i) {
          if (pts[static_cast<std::size_t>(i)].first != t.t0_index + i) throw DataError(key + " time indices not contiguous");
          t.points.push_back(pts[static_cast<std::size_t>(i)].second);
        }
        return t;
      };
      s.ego_past = build("ego/past", true);
      s.ego_future = build("ego/future", false);
      s.target_past = build("target/past", true);
      s.target_future = build("target/future", false);
      validate(s);
      out.scenarios.push_back(std::move(s));
    } catch (const DataError& e) {
      out.diagnostics.push_back("line " + std::to_string(rows.first_line) + ": scenario '" + id + "': " + e.what());
    }
  }
  if (out.scenarios.empty()) throw DataError("no valid scenarios (" + std::to_string(out.diagnostics.size()) + " rejected)");
  return out;
}

inline IngestResult ingest_scenarios(const std::string& path, ScenarioFormat format) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "'");
  return format == ScenarioFormat::csv ? ingest_csv(is) : ingest_jsonl(is);
}

}  // namespace advtraj
