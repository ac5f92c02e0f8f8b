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

// advtraj: generate scenarios, run attack grids, aggregate reports.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
// failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advtraj/advtraj.hpp"

namespace {

using namespace advtraj;
using nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

ValueRange parse_range(const std::string& text, const char* flag) {
  ValueRange r;
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) {
      r.lo = r.hi = std::stod(text);
    } else {
      r.lo = std::stod(text.substr(0, comma));
      r.hi = std::stod(text.substr(comma + 1));
    }
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(flag) + ": expected LO,HI");
  }
  if (!(r.lo <= r.hi)) throw ConfigError(std::string(flag) + ": LO must not exceed HI");
  return r;
}

int default_parallelism() {
  if (const char* env = std::getenv("ADVTRAJ_PARALLEL")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::logic_error&) {
    }
    throw ConfigError("ADVTRAJ_PARALLEL must be a positive integer");
  }
  return 1;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  os << text;
}

void write_manifest(const std::string& out, const std::string& command, ordered_json body) {
  ordered_json m;
  m["tool"] = "advtraj";
  m["version"] = kVersion;
  m["command"] = command;
  for (auto& [k, v] : body.items()) m[k] = v;
  write_text(out + ".manifest.json", m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  int n = 100;
  std::uint64_t seed = 0;
  std::string out = "scenarios.jsonl";
  std::string format;
  double dt = 0.1;
  int H = 12;
  int T = 12;
  std::string v_target = "4,9";
  std::string v_ego = "7,13";
  std::string radius = "6,15";
  std::string gap = "2.5,4";
  std::string gap_side = "both";
  double b_max = 6.0;
};

int cmd_generate(const GenerateArgs& a) {
  if (a.n < 1) throw ConfigError("--n must be at least 1");
  SweepConfig sweep;
  sweep.v_target = parse_range(a.v_target, "--v-target");
  sweep.v_ego = parse_range(a.v_ego, "--v-ego");
  sweep.turn_radius = parse_range(a.radius, "--radius");
  sweep.gap_s = parse_range(a.gap, "--gap");
  sweep.gap_side = gap_side_from_string(a.gap_side);
  sweep.base.dt = a.dt;
  sweep.base.H = a.H;
  sweep.base.T = a.T;
  sweep.base.b_max = a.b_max;
  ScenarioFormat format = scenario_format_from_path(a.out);
  if (a.format == "csv") {
    format = ScenarioFormat::csv;
  } else if (a.format == "jsonl") {
    format = ScenarioFormat::jsonl;
  } else if (!a.format.empty()) {
    throw ConfigError("--format must be jsonl or csv");
  }

  int redrawn = 0;
  const std::vector<Scenario> out = generate_sweep(sweep, a.n, a.seed, &redrawn);
  write_scenarios(a.out, out, format);

  ordered_json body;
  body["n"] = a.n;
  body["seed"] = a.seed;
  body["format"] = format == ScenarioFormat::csv ? "csv" : "jsonl";
  body["dt"] = a.dt;
  body["horizon_past"] = a.H;
  body["horizon_future"] = a.T;
  body["v_target"] = {sweep.v_target.lo, sweep.v_target.hi};
  body["v_ego"] = {sweep.v_ego.lo, sweep.v_ego.hi};
  body["turn_radius"] = {sweep.turn_radius.lo, sweep.turn_radius.hi};
  body["gap_s"] = {sweep.gap_s.lo, sweep.gap_s.hi};
  body["gap_side"] = a.gap_side;
  body["b_max"] = a.b_max;
  body["redrawn"] = redrawn;
  body["outputs"] = {a.out};
  write_manifest(a.out, "generate", body);
  std::cerr << "wrote " << out.size() << " scenarios to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct AttackArgs {
  std::string scenarios;
  std::string out = "results.jsonl";
  std::string csv;
  std::string config;
  std::string predictor = "kinematic";
  std::string objective = "ade";
  bool grid = false;
  std::string obs = "time";
  std::string fut = "none";
  double alpha0 = 0.01;
  double gamma = 0.99;
  int iters = 100;
  double dmax = 0.9;
  int parallel = 0;
  std::uint64_t seed = 0;
  std::string accel_bounds = "dataset";
  int K = 100;
  double noise_a = 0.5;
  double noise_kappa = 0.01;
  int window = 4;
  bool no_baseline = false;
};

int cmd_attack(const AttackArgs& a, const CLI::App& sub) {
  const int workers = a.parallel > 0 ? a.parallel : default_parallelism();
  if (a.parallel < 0) throw ConfigError("--parallel must be positive");

  AttackConfig cfg;
  PredictorConfig pcfg;
  if (!a.config.empty()) {
    const nlohmann::json j = read_json_file(a.config);
    apply_json(j, cfg);
    if (j.contains("predictor")) apply_json(j["predictor"], pcfg);
  }
  auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  if (given("--objective")) cfg.objective = objective_from_string(a.objective);
  if (given("--obs")) cfg.barrier.observed = observed_mode_from_string(a.obs);
  if (given("--fut")) cfg.barrier.future = future_mode_from_string(a.fut);
  if (given("--alpha0")) cfg.alpha0 = a.alpha0;
  if (given("--gamma")) cfg.gamma = a.gamma;
  if (given("--iters")) cfg.max_iterations = a.iters;
  if (given("--dmax")) cfg.barrier.d_max = a.dmax;
  if (given("--seed")) cfg.seed = pcfg.seed = a.seed;
  if (given("--K")) pcfg.K = a.K;
  if (given("--noise-a")) pcfg.noise_scale_a = a.noise_a;
  if (given("--noise-kappa")) pcfg.noise_scale_kappa = a.noise_kappa;
  if (given("--window")) pcfg.smoothing_window = a.window;
  pcfg.validate();
  cfg.validate();
  const auto predictor = PredictorRegistry::instance().create(a.predictor, pcfg);

  const IngestResult data = ingest_scenarios(a.scenarios, scenario_format_from_path(a.scenarios));
  for (const auto& d : data.diagnostics) std::cerr << a.scenarios << ": " << d << "\n";
  if (a.accel_bounds == "dataset") {
    std::tie(cfg.a_min, cfg.a_max) = dataset_accel_bounds(dataset_trajectories(data.scenarios));
  } else if (a.accel_bounds != "default") {
    throw ConfigError("--accel-bounds must be dataset or default");
  }

  std::vector<GridCell> cells;
  if (a.grid) {
    cells = experiment_grid();
  } else {
    cells.push_back({cfg.objective, cfg.barrier.observed, cfg.barrier.future});
  }
  const std::vector<GridRecord> records = run_grid(data.scenarios, cfg, cells, *predictor, workers, !a.no_baseline);

  {
    std::ofstream os(a.out, std::ios::binary);
    if (!os) throw DataError("cannot open '" + a.out + "' for writing");
    write_results_jsonl(os, records);
  }
  std::vector<std::string> outputs{a.out};
  if (!a.csv.empty()) {
    std::ofstream os(a.csv, std::ios::binary);
    if (!os) throw DataError("cannot open '" + a.csv + "' for writing");
    write_csv_header(os);
    for (const GridRecord& r : records) write_csv_row(os, r.row);
    outputs.push_back(a.csv);
  }

  ordered_json body;
  body["scenarios"] = a.scenarios;
  body["scenario_count"] = data.scenarios.size();
  body["rejected_records"] = data.diagnostics.size();
  body["predictor"] = predictor->name();
  body["predictor_config"] = to_json(pcfg);
  body["attack_config"] = to_json(cfg);
  body["accel_bounds"] = a.accel_bounds;
  ordered_json grid = ordered_json::array();
  for (const GridCell& c : cells) {
    grid.push_back({to_string(c.objective), to_string(c.observed), to_string(c.future)});
  }
  body["grid"] = grid;
  body["outputs"] = outputs;
  write_manifest(a.out, "attack", body);
  std::cerr << "wrote " << records.size() << " rows to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string results;
  std::string out = "report.csv";
  std::string format;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int cmd_report(const ReportArgs& a) {
  std::ifstream is(a.results, std::ios::binary);
  if (!is) throw DataError("cannot open '" + a.results + "'");
  const std::vector<MetricRow> rows = read_metric_rows(is, ends_with(a.results, ".csv"));
  const std::vector<MetricRow> table = aggregate(rows);
  const std::string format = a.format.empty() ? (ends_with(a.out, ".csv") ? "csv" : "json") : a.format;
  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw DataError("cannot open '" + a.out + "' for writing");
  if (format == "csv") {
    write_csv_header(os);
    for (const MetricRow& r : table) write_csv_row(os, r);
  } else if (format == "json") {
    for (const MetricRow& r : table) os << to_json(r).dump() << '\n';
  } else {
    throw ConfigError("--format must be csv or json");
  }
  ordered_json body;
  body["results"] = a.results;
  body["rows"] = rows.size();
  body["groups"] = table.size();
  body["format"] = format;
  body["outputs"] = {a.out};
  write_manifest(a.out, "report", body);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial attacks on trajectory prediction: scenario generation, attack grids, reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(advtraj::kVersion));

  GenerateArgs g;
  CLI::App* gen = app.add_subcommand("generate", "Write synthetic left-turn scenarios");
  gen->add_option("--n", g.n, "Number of scenarios")->capture_default_str();
  gen->add_option("--seed", g.seed, "Sweep seed")->capture_default_str();
  gen->add_option("--out", g.out, "Output file (.jsonl or .csv)")->capture_default_str();
  gen->add_option("--format", g.format, "jsonl or csv (default: from --out)");
  gen->add_option("--dt", g.dt, "Time step [s]")->capture_default_str();
  gen->add_option("--horizon-past", g.H, "Observed steps H")->capture_default_str();
  gen->add_option("--horizon-future", g.T, "Future steps T")->capture_default_str();
  gen->add_option("--v-target", g.v_target, "Target speed range LO,HI [m/s]")->capture_default_str();
  gen->add_option("--v-ego", g.v_ego, "Ego speed range LO,HI [m/s]")->capture_default_str();
  gen->add_option("--radius", g.radius, "Turn radius range LO,HI [m]")->capture_default_str();
  gen->add_option("--gap", g.gap, "Conflict time gap range LO,HI [s]")->capture_default_str();
  gen->add_option("--gap-side", g.gap_side, "both, front (target turns after ego) or behind")->capture_default_str();
  gen->add_option("--b-max", g.b_max, "Braking limit for the prediction point [m/s^2]")->capture_default_str();

  AttackArgs at;
  CLI::App* att = app.add_subcommand("attack", "Run attacks and write per-scenario metric rows");
  att->add_option("--scenarios", at.scenarios, "Scenario file (.jsonl or .csv)")->required();
  att->add_option("--out", at.out, "Results file (JSON lines)")->capture_default_str();
  att->add_option("--csv", at.csv, "Also write the metric rows as CSV");
  att->add_option("--config", at.config, "JSON attack configuration");
  att->add_option("--predictor", at.predictor, "Registered predictor name")->capture_default_str();
  att->add_option("--objective", at.objective, "ade, fde, collision_fp or collision_fn")->capture_default_str();
  att->add_flag("--grid", at.grid, "Run the full 14-configuration grid");
  att->add_option("--obs", at.obs, "Observed constraint: time or time-traj")->capture_default_str();
  att->add_option("--fut", at.fut, "Future constraint: none or traj")->capture_default_str();
  att->add_option("--alpha0", at.alpha0, "Initial step size")->capture_default_str();
  att->add_option("--gamma", at.gamma, "Step decay")->capture_default_str();
  att->add_option("--iters", at.iters, "PGD iterations")->capture_default_str();
  att->add_option("--dmax", at.dmax, "Barrier radius [m]")->capture_default_str();
  att->add_option("--parallel", at.parallel, "Worker threads (default: ADVTRAJ_PARALLEL or 1)");
  att->add_option("--seed", at.seed, "Predictor and attack seed")->capture_default_str();
  att->add_option("--accel-bounds", at.accel_bounds, "dataset or default (+-9.81)")->capture_default_str();
  att->add_option("--K", at.K, "Predicted samples")->capture_default_str();
  att->add_option("--noise-a", at.noise_a, "Predictor acceleration noise scale")->capture_default_str();
  att->add_option("--noise-kappa", at.noise_kappa, "Predictor curvature noise scale")->capture_default_str();
  att->add_option("--window", at.window, "Predictor control averaging window")->capture_default_str();
  att->add_flag("--no-baseline", at.no_baseline, "Omit the unperturbed rows");

  ReportArgs rp;
  CLI::App* rep = app.add_subcommand("report", "Aggregate metric rows into a summary table");
  rep->add_option("--results", rp.results, "Results file (JSON lines or CSV)")->required();
  rep->add_option("--out", rp.out, "Output table")->capture_default_str();
  rep->add_option("--format", rp.format, "csv or json (default: from --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(g);
    if (*att) return cmd_attack(at, *att);
    if (*rep) return cmd_report(rp);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
