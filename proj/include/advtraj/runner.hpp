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

// Experiment grid: attack configurations, per-scenario metric rows, parallel
// execution with deterministic ordering, and JSON configuration.

#include <atomic>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "advtraj/attack.hpp"
#include "advtraj/metrics.hpp"
#include "advtraj/scenario_io.hpp"

namespace advtraj {

inline constexpr const char* kVersion = "1.0.0";

struct GridCell {
  Objective objective = Objective::ade;
  ObservedMode observed = ObservedMode::time;
  FutureMode future = FutureMode::none;
};

// Every objective under both observed constraints and, except the
// false-negative attack, both future constraints: 14 cells.
inline std::vector<GridCell> experiment_grid() {
  std::vector<GridCell> out;
  for (Objective o : {Objective::ade, Objective::fde, Objective::collision_fp, Objective::collision_fn}) {
    for (ObservedMode m : {ObservedMode::time, ObservedMode::time_traj}) {
      out.push_back({o, m, FutureMode::none});
      if (o != Objective::collision_fn) out.push_back({o, m, FutureMode::traj});
    }
  }
  return out;
}

inline AttackConfig with_cell(AttackConfig cfg, const GridCell& cell) {
  cfg.objective = cell.objective;
  cfg.barrier.observed = cell.observed;
  cfg.barrier.future = cell.future;
  return cfg;
}

inline Footprint footprint_of(const Scenario& s) { return {s.vehicle_length, s.vehicle_width}; }

inline MetricRow metric_row(const Scenario& s, const AttackConfig& cfg, const AttackResult& r) {
  const Footprint fp = footprint_of(s);
  MetricRow row;
  row.id = s.id;
  row.objective = to_string(cfg.objective);
  row.obs_constraint = to_string(cfg.barrier.observed);
  row.fut_constraint = to_string(cfg.barrier.future);
  row.ade = metric_ade(r.pred_perturbed, s.target_future);
  row.fde = metric_fde(r.pred_perturbed, s.target_future);
  row.cr_pred = metric_cr_pred(r.pred_perturbed, r.past_perturbed, s.ego_past, s.ego_future, fp);
  if (cfg.objective == Objective::collision_fn) {
    row.cr_fnc = metric_cr_fnc(r.future_perturbed, r.past_perturbed, s.ego_past, s.ego_future, fp);
  }
  row.d_max = metric_dmax(r.past_perturbed, s.target_past);
  row.d_mean = metric_dmean(r.past_perturbed, s.target_past);
  row.a_mag = metric_accel(r.past_controls);
  row.k_mag = metric_curv(r.past_controls);
  return row;
}

// The identity perturbation evaluated with the same measures.
inline MetricRow baseline_row(const Scenario& s, const Predictor& predictor) {
  const Footprint fp = footprint_of(s);
  const PredictionSet pred = predictor.predict(s.target_past, s.ego_past, s.future_length());
  const TargetControls c = extract_joint_controls(s.target_past, s.target_future);
  MetricRow row;
  row.id = s.id;
  row.objective = "unperturbed";
  row.obs_constraint = "-";
  row.fut_constraint = "-";
  row.ade = metric_ade(pred, s.target_future);
  row.fde = metric_fde(pred, s.target_future);
  row.cr_pred = metric_cr_pred(pred, s.target_past, s.ego_past, s.ego_future, fp);
  row.d_max = 0.0;
  row.d_mean = 0.0;
  row.a_mag = metric_accel(c.past);
  row.k_mag = metric_curv(c.past);
  return row;
}

struct GridRecord {
  MetricRow row;
  nlohmann::ordered_json summary;
};

inline nlohmann::ordered_json attack_summary(const AttackResult& r) {
  nlohmann::ordered_json j;
  j["iterations_run"] = r.iterations_run;
  j["final_loss"] = r.final_loss;
  j["halving_events"] = r.halving_events;
  j["rejected_steps"] = r.rejected_steps;
  j["empty_box_entries"] = r.empty_box_entries;
  j["loss_trace"] = r.loss_trace;
  return j;
}

// Runs fn(i) for i in [0, n) on `workers` threads. The first exception (by
// index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < w; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// One baseline row per scenario followed by one row per (scenario, cell), in
// scenario order then cell order. Output does not depend on `workers`.
inline std::vector<GridRecord> run_grid(const std::vector<Scenario>& scenarios, const AttackConfig& base,
                                        const std::vector<GridCell>& cells, const Predictor& predictor,
                                        int workers = 1, bool include_baseline = true) {
  const std::size_t per = cells.size() + (include_baseline ? 1 : 0);
  std::vector<GridRecord> out(scenarios.size() * per);
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const Scenario& s = scenarios[i / per];
    std::size_t c = i % per;
    if (include_baseline) {
      if (c == 0) {
        out[i].row = baseline_row(s, predictor);
        return;
      }
      --c;
    }
    const AttackConfig cfg = with_cell(base, cells[c]);
    const AttackResult r = run_attack(s, cfg, predictor);
    out[i].row = metric_row(s, cfg, r);
    out[i].summary = attack_summary(r);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Configuration as JSON

inline nlohmann::ordered_json to_json(const AttackConfig& c) {
  nlohmann::ordered_json j;
  j["objective"] = to_string(c.objective);
  j["obs_constraint"] = to_string(c.barrier.observed);
  j["fut_constraint"] = to_string(c.barrier.future);
  j["d_max"] = c.barrier.d_max;
  j["alpha0"] = c.alpha0;
  j["gamma"] = c.gamma;
  j["max_iterations"] = c.max_iterations;
  j["rel_bound_a"] = c.rel_bound_a;
  j["rel_bound_kappa"] = c.rel_bound_kappa;
  j["abs_bound_kappa"] = c.abs_bound_kappa;
  j["a_min"] = c.a_min;
  j["a_max"] = c.a_max;
  j["max_halvings"] = c.max_halvings;
  j["seed"] = c.seed;
  j["fd_step"] = c.fd_step;
  return j;
}

inline nlohmann::ordered_json to_json(const PredictorConfig& c) {
  nlohmann::ordered_json j;
  j["K"] = c.K;
  j["noise_scale_a"] = c.noise_scale_a;
  j["noise_scale_kappa"] = c.noise_scale_kappa;
  j["smoothing_window"] = c.smoothing_window;
  j["seed"] = c.seed;
  return j;
}

// Overlays the keys present in j; unknown keys are a configuration error.
inline void apply_json(const nlohmann::json& j, AttackConfig& c) {
  if (!j.is_object()) throw ConfigError("attack config must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "objective") c.objective = objective_from_string(v.get<std::string>());
      else if (k == "obs_constraint") c.barrier.observed = observed_mode_from_string(v.get<std::string>());
      else if (k == "fut_constraint") c.barrier.future = future_mode_from_string(v.get<std::string>());
      else if (k == "d_max") c.barrier.d_max = v.get<double>();
      else if (k == "alpha0") c.alpha0 = v.get<double>();
      else if (k == "gamma") c.gamma = v.get<double>();
      else if (k == "max_iterations") c.max_iterations = v.get<int>();
      else if (k == "rel_bound_a") c.rel_bound_a = v.get<double>();
      else if (k == "rel_bound_kappa") c.rel_bound_kappa = v.get<double>();
      else if (k == "abs_bound_kappa") c.abs_bound_kappa = v.get<double>();
      else if (k == "a_min") c.a_min = v.get<double>();
      else if (k == "a_max") c.a_max = v.get<double>();
      else if (k == "max_halvings") c.max_halvings = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "fd_step") c.fd_step = v.get<double>();
      else if (k == "predictor") continue;
      else throw ConfigError("unknown attack config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("attack config: ") + e.what());
  }
  c.validate();
}

inline void apply_json(const nlohmann::json& j, PredictorConfig& c) {
  if (!j.is_object()) throw ConfigError("predictor config must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "K") c.K = v.get<int>();
      else if (k == "noise_scale_a") c.noise_scale_a = v.get<double>();
      else if (k == "noise_scale_kappa") c.noise_scale_kappa = v.get<double>();
      else if (k == "smoothing_window") c.smoothing_window = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else throw ConfigError("unknown predictor config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("predictor config: ") + e.what());
  }
  c.validate();
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Result files: JSON lines, one metric row per line with an optional
// "attack" summary; or the plain CSV table.

inline void write_results_jsonl(std::ostream& os, const std::vector<GridRecord>& records) {
  for (const GridRecord& r : records) {
    nlohmann::ordered_json j = to_json(r.row);
    if (!r.summary.is_null()) j["attack"] = r.summary;
    os << j.dump() << '\n';
  }
}

inline std::optional<double> parse_cell(const std::string& s) {
  if (s == "-") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw DataError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DataError("bad number '" + s + "'");
  }
}

inline std::vector<MetricRow> read_metric_rows(std::istream& is, bool csv) {
  std::vector<MetricRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      if (csv) {
        if (lineno == 1 && line.rfind("id,", 0) == 0) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != metric_columns().size()) throw DataError("expected 12 columns");
        MetricRow r;
        r.id = f[0];
        r.objective = f[1];
        r.obs_constraint = f[2];
        r.fut_constraint = f[3];
        const auto members = metric_value_members();
        for (std::size_t i = 0; i < members.size(); ++i) r.*members[i] = parse_cell(f[4 + i]);
        rows.push_back(std::move(r));
      } else {
        rows.push_back(metric_row_from_json(nlohmann::json::parse(line)));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("results line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("results line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (rows.empty()) throw DataError("results file has no rows");
  return rows;
}

}  // namespace advtraj
