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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "support.hpp"

using namespace advtraj;
namespace fx = advtraj::fixtures;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

int failures = 0;

void report(int n, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  criterion %d  %-28s %s\n", ok ? "PASS" : "FAIL", n, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared inputs -------------------------------------------------------------

constexpr std::uint64_t kSweepSeed = 2024;

std::vector<Scenario> grid_scenarios() { return generate_sweep(SweepConfig{}, 100, kSweepSeed); }

// 1 -------------------------------------------------------------------------

void dynamics_roundtrip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> v0(-5.0, 15.0), th(-kPi, kPi), pos(-50.0, 50.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const AgentState s0{pos(rng), pos(rng), th(rng), v0(rng)};
    const ControlSequence c = fx::random_controls(rng, 24, 4.0, 0.2);
    const Trajectory p = rollout(s0, c);
    const Extraction e = extract_controls(p);
    const Trajectory q = rollout(e.initial, e.controls);
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, distance(p[i], q[i]));
  }
  const double secs = seconds_since(t0);
  report(1, "dynamics roundtrip", worst < 1e-6 && secs < 5.0, fmt("max error %.3g m, %.2f s", worst, secs));
}

// 2 -------------------------------------------------------------------------

void reversal_handling() {
  const Extraction e = extract_controls(fx::make_trajectory({{0, 0}, {0.1, 0}, {0.05, 0}}));
  double fixture_err = 0.0;
  const double want_a[2] = {0.0, -15.0};
  for (int i = 0; i < 2; ++i) {
    fixture_err = std::max(fixture_err, std::abs(e.controls[i].a - want_a[i]));
    fixture_err = std::max(fixture_err, std::abs(e.controls[i].kappa));
  }
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> v0(0.5, 3.0), k(-0.2, 0.2), th(-kPi, kPi), decel(2.0, 6.0);
  double worst_k = 0.0;
  int reversed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ControlSequence c;
    const double kap = k(rng), a = decel(rng);
    for (int i = 0; i < 20; ++i) c.inputs.push_back({-a, kap});
    std::vector<AgentState> states;
    const Trajectory p = rollout(AgentState{0, 0, th(rng), v0(rng)}, c, 0, &states);
    if (states.back().v < 0.0) ++reversed;
    for (const auto& u : extract_controls(p).controls.inputs) worst_k = std::max(worst_k, std::abs(u.kappa));
  }
  const bool ok = fixture_err < 1e-9 && worst_k <= 0.2 + 1e-9 && reversed == 100;
  report(2, "reversal handling", ok,
         fmt("fixture error %.3g, max |kappa| %.6f over %d reversals", fixture_err, worst_k, reversed));
}

// 3 -------------------------------------------------------------------------

// Gap between the two smallest values; hard selections closer than this to a
// tie are excluded from finite-difference comparison.
double selection_gap(std::vector<double> v) {
  if (v.size() < 2) return 1e300;
  std::partial_sort(v.begin(), v.begin() + 2, v.end());
  return v[1] - v[0];
}

std::vector<double> matched_distances(const Trajectory& a, const Trajectory& b) {
  std::vector<double> d;
  for (std::size_t t = 0; t < a.size(); ++t) d.push_back(distance(a[t], b[t]));
  return d;
}

bool near_tie(const AttackProblem& p, Objective o, const Predictor& pred, const std::vector<double>& delta) {
  constexpr double kTieBand = 1e-4;
  const JointRollout<double> jr = perturbed_rollout(p, delta);
  const Scenario& s = p.scenario;
  if (o == Objective::collision_fp) {
    for (const Trajectory& smp : pred.predict(jr.past, s.ego_past, p.T()).samples) {
      if (selection_gap(matched_distances(smp, s.ego_future)) < kTieBand) return true;
    }
  }
  if (o == Objective::collision_fn) return selection_gap(matched_distances(jr.future, s.ego_future)) < kTieBand;
  return false;
}

// A random feasible perturbation well inside the barrier region, with no
// perturbed point within kKinkBand of its reference (the distance norm has a
// kink at zero).
std::vector<double> random_interior_delta(const AttackProblem& p, std::mt19937_64& rng) {
  constexpr double kKinkBand = 1e-4;
  BarrierConfig all;
  all.observed = ObservedMode::time_traj;
  all.future = FutureMode::traj;
  const Scenario& s = p.scenario;
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<double> d(p.dims());
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = std::uniform_real_distribution<double>(p.box.lower[i], p.box.upper[i])(rng) * 0.2;
    }
    for (int shrink = 0; shrink < 60; ++shrink) {
      const JointRollout<double> jr = perturbed_rollout(p, d);
      if (max_constrained_distance(all, jr.past, s.target_past, jr.future, s.target_future) < 0.85 * all.d_max) break;
      for (double& x : d) x *= 0.5;
    }
    const JointRollout<double> jr = perturbed_rollout(p, d);
    bool kink = false;
    // The first past point is pinned by the initial state and never moves.
    for (std::size_t t = 1; t < jr.past.size(); ++t) {
      kink = kink || d_traj(jr.past[t], s.target_past) < kKinkBand || d_time(jr.past[t], s.target_past, t) < kKinkBand;
    }
    for (std::size_t t = 0; t < jr.future.size(); ++t) {
      kink = kink || d_traj(jr.future[t], s.target_future) < kKinkBand;
    }
    if (!kink) return d;
  }
  throw std::runtime_error("no perturbation away from the distance kinks");
}

void gradient_correctness() {
  const auto t0 = Clock::now();
  const auto pred = fx::default_predictor();
  std::mt19937_64 rng(103);
  double worst[7] = {};
  int checked[7] = {};
  const char* names[7] = {"ade", "fde", "fp", "fn", "b_time", "b_traj", "b_time_traj"};
  for (int i = 0; i < 100; ++i) {
    const Scenario s = fx::random_left_turn(5000 + i);
    const AttackProblem p = prepare_attack(s, AttackConfig{}, *pred);
    const std::vector<double> d = random_interior_delta(p, rng);
    for (int o = 0; o < 4; ++o) {
      const Objective obj = static_cast<Objective>(o);
      if (near_tie(p, obj, *pred, d)) continue;
      AttackConfig cfg;
      cfg.objective = obj;
      const double err = finite_diff_check(
          [&](const auto& x) { return evaluate_loss(p, cfg, *pred, x).objective; }, std::span<const double>(d));
      worst[o] = std::max(worst[o], err);
      ++checked[o];
    }
    const double dm = 0.9;
    auto past_of = [&](const auto& x) { return perturbed_rollout(p, x).past; };
    const double errs[3] = {
        finite_diff_check([&](const auto& x) { return barrier_time(past_of(x), s.target_past, dm); },
                          std::span<const double>(d)),
        finite_diff_check([&](const auto& x) { return barrier_traj(past_of(x), s.target_past, dm); },
                          std::span<const double>(d)),
        finite_diff_check([&](const auto& x) { return barrier_time_traj(past_of(x), s.target_past, dm); },
                          std::span<const double>(d)),
    };
    for (int b = 0; b < 3; ++b) {
      worst[4 + b] = std::max(worst[4 + b], errs[b]);
      ++checked[4 + b];
    }
  }
  const double secs = seconds_since(t0);
  bool ok = secs < 60.0;
  std::string detail;
  for (int k = 0; k < 7; ++k) {
    ok = ok && worst[k] < 1e-4 && checked[k] >= 90;
    detail += fmt("%s %.1e (%d) ", names[k], worst[k], checked[k]);
  }
  report(3, "gradient correctness", ok, detail + fmt("%.1f s", secs));
}

// 4 -------------------------------------------------------------------------

struct GridRun {
  std::vector<Scenario> scenarios;
  std::vector<GridRecord> records;
};

GridRun constraint_soundness() {
  const auto t0 = Clock::now();
  GridRun run;
  run.scenarios = grid_scenarios();
  const auto cells = experiment_grid();
  const auto pred = fx::default_predictor();
  const std::size_t per = cells.size() + 1;
  run.records.resize(run.scenarios.size() * per);
  std::atomic<long> iterates{0}, box_violations{0}, barrier_violations{0};
  parallel_for(run.records.size(), workers(), [&](std::size_t i) {
    const Scenario& s = run.scenarios[i / per];
    const std::size_t c = i % per;
    if (c == 0) {
      run.records[i].row = baseline_row(s, *pred);
      return;
    }
    const AttackConfig cfg = with_cell(AttackConfig{}, cells[c - 1]);
    const AttackResult r = run_attack(s, cfg, *pred, [&](const AttackProblem& p, const IterationRecord& rec) {
      ++iterates;
      if (!p.box.contains(rec.delta)) ++box_violations;
      if (!(rec.max_distance < cfg.barrier.d_max)) ++barrier_violations;
    });
    run.records[i].row = metric_row(s, cfg, r);
    run.records[i].summary = attack_summary(r);
  });
  const bool ok = iterates == 100L * 14 * 100 && box_violations == 0 && barrier_violations == 0;
  report(4, "constraint soundness", ok,
         fmt("%ld iterates, %ld box and %ld barrier violations, %.1f s", iterates.load(), box_violations.load(),
             barrier_violations.load(), seconds_since(t0)));
  return run;
}

// 5 -------------------------------------------------------------------------

void hyperparameter_fidelity() {
  const AttackConfig a;
  const PredictorConfig p;
  const LeftTurnParams g;
  const bool ok = a.alpha0 == 0.01 && a.gamma == 0.99 && a.max_iterations == 100 && a.barrier.d_max == 0.9 &&
                  a.rel_bound_a == 2.0 && a.rel_bound_kappa == 0.05 && a.abs_bound_kappa == 0.2 && p.K == 100 &&
                  g.H == 12 && g.T == 12 && g.dt == 0.1;
  report(5, "hyperparameter fidelity", ok,
         fmt("alpha0=%g gamma=%g M=%d d_max=%g bounds=+-%g,+-%g |k|<=%g K=%d H=%d T=%d dt=%g", a.alpha0, a.gamma,
             a.max_iterations, a.barrier.d_max, a.rel_bound_a, a.rel_bound_kappa, a.abs_bound_kappa, p.K, g.H, g.T,
             g.dt));
}

// 6 -------------------------------------------------------------------------

const MetricRow& row_of(const GridRun& run, std::size_t scenario, Objective o, ObservedMode m, FutureMode f) {
  const auto cells = experiment_grid();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cells[c].objective == o && cells[c].observed == m && cells[c].future == f) {
      return run.records[scenario * (cells.size() + 1) + 1 + c].row;
    }
  }
  throw std::logic_error("no such cell");
}

double column_mean(const GridRun& run, Objective o, ObservedMode m, FutureMode f, std::optional<double> MetricRow::*col) {
  double sum = 0.0;
  for (std::size_t s = 0; s < run.scenarios.size(); ++s) sum += *(row_of(run, s, o, m, f).*col);
  return sum / static_cast<double>(run.scenarios.size());
}

void directional_efficacy(const GridRun& run) {
  const std::size_t per = experiment_grid().size() + 1;
  const std::size_t n = run.scenarios.size();
  const ObservedMode modes[2] = {ObservedMode::time, ObservedMode::time_traj};

  // (a) ADE attack raises ADE over the unperturbed prediction.
  bool a_ok = true;
  std::string detail = "(a)";
  for (ObservedMode m : modes) {
    int raised = 0;
    for (std::size_t s = 0; s < n; ++s) {
      raised += *row_of(run, s, Objective::ade, m, FutureMode::none).ade > *run.records[s * per].row.ade;
    }
    a_ok = a_ok && raised >= 90;
    detail += fmt(" %s %d/%zu", to_string(m).c_str(), raised, n);
  }

  // (b) FDE attack moves the final prediction at least as far as the ADE attack.
  double fde_of_fde = 0.0, fde_of_ade = 0.0;
  for (ObservedMode m : modes) {
    for (FutureMode f : {FutureMode::none, FutureMode::traj}) {
      fde_of_fde += column_mean(run, Objective::fde, m, f, &MetricRow::fde);
      fde_of_ade += column_mean(run, Objective::ade, m, f, &MetricRow::fde);
    }
  }
  const bool b_ok = fde_of_fde >= fde_of_ade;
  detail += fmt("; (b) FDE %.3f vs %.3f", fde_of_fde / 4, fde_of_ade / 4);

  // (c) Constraining the future shrinks the past perturbation.
  bool c_ok = true;
  int c_pass = 0;
  for (Objective o : {Objective::ade, Objective::fde}) {
    for (ObservedMode m : modes) {
      const bool d = column_mean(run, o, m, FutureMode::traj, &MetricRow::d_max) <
                     column_mean(run, o, m, FutureMode::none, &MetricRow::d_max);
      const bool acc = column_mean(run, o, m, FutureMode::traj, &MetricRow::a_mag) <
                       column_mean(run, o, m, FutureMode::none, &MetricRow::a_mag);
      c_ok = c_ok && d && acc;
      c_pass += d + acc;
    }
  }
  detail += fmt("; (c) %d/8 orderings", c_pass);
  report(6, "directional efficacy", a_ok && b_ok && c_ok, detail);
}

// 7 -------------------------------------------------------------------------

// Scenarios whose clean futures miss each other but would collide with both
// footprints grown by 0.3 m on every side, so a colliding future lies within
// about 0.85 m of the clean one.
std::vector<Scenario> near_miss_suite(int n) {
  SweepConfig sweep;
  sweep.gap_s = {0.3, 1.5};
  std::vector<Scenario> out;
  std::uint64_t seed = 7000;
  while (static_cast<int>(out.size()) < n) {
    for (Scenario& s : generate_sweep(sweep, 50, seed++)) {
      const Footprint fp = footprint_of(s);
      const Footprint grown{fp.length + 0.6, fp.width + 0.6};
      if (metric_cr_fnc(s.target_future, s.target_past, s.ego_past, s.ego_future, fp) != 0) continue;
      if (metric_cr_fnc(s.target_future, s.target_past, s.ego_past, s.ego_future, grown) != 1) continue;
      s.id = "nm-" + std::to_string(out.size());
      out.push_back(std::move(s));
      if (static_cast<int>(out.size()) == n) break;
    }
  }
  return out;
}

void false_negative_attack() {
  const auto t0 = Clock::now();
  const std::vector<Scenario> suite = near_miss_suite(100);
  const auto pred = fx::default_predictor();
  std::vector<GridCell> cells;
  for (const GridCell& c : experiment_grid()) {
    if (c.objective == Objective::collision_fn) cells.push_back(c);
  }
  const std::vector<GridRecord> rec = run_grid(suite, AttackConfig{}, cells, *pred, workers());
  const std::size_t per = cells.size() + 1;
  bool ok = true;
  std::string detail;
  double base_ade = 0.0;
  for (std::size_t s = 0; s < suite.size(); ++s) base_ade += *rec[s * per].row.ade;
  base_ade /= static_cast<double>(suite.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    double cr = 0.0, ade = 0.0;
    for (std::size_t s = 0; s < suite.size(); ++s) {
      cr += *rec[s * per + 1 + c].row.cr_fnc;
      ade += *rec[s * per + 1 + c].row.ade;
    }
    cr /= static_cast<double>(suite.size());
    ade /= static_cast<double>(suite.size());
    ok = ok && cr >= 0.5 && ade <= 2.0 * base_ade;
    detail += fmt("obs=%s CR_FNC %.2f ADE %.3f; ", to_string(cells[c].observed).c_str(), cr, ade);
  }
  report(7, "false-negative attack", ok, detail + fmt("baseline ADE %.3f, %.1f s", base_ade, seconds_since(t0)));
}

// 8 -------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Generate, write, re-read and attack through the file formats, as the CLI
// does. Returns the result file contents.
std::string pipeline(const std::filesystem::path& dir, const std::string& tag, int n, int threads,
                     ScenarioFormat format) {
  const auto scen = dir / (tag + (format == ScenarioFormat::csv ? ".csv" : ".jsonl"));
  write_scenarios(scen.string(), generate_sweep(SweepConfig{}, n, kSweepSeed), format);
  const IngestResult in = ingest_scenarios(scen.string(), format);
  const auto records = run_grid(in.scenarios, AttackConfig{}, experiment_grid(), *fx::default_predictor(), threads);
  const auto out = dir / (tag + ".results.jsonl");
  {
    std::ofstream os(out, std::ios::binary);
    write_results_jsonl(os, records);
  }
  return slurp(out);
}

void determinism(const GridRun& run) {
  const auto t0 = Clock::now();
  const auto dir = std::filesystem::temp_directory_path() / "advtraj_acceptance";
  std::filesystem::create_directories(dir);
  constexpr int n = 20;
  const std::string serial = pipeline(dir, "serial", n, 1, ScenarioFormat::jsonl);
  const std::string threaded = pipeline(dir, "threaded", n, 4, ScenarioFormat::csv);
  const std::string again = pipeline(dir, "again", n, 4, ScenarioFormat::jsonl);
  std::ostringstream grid;
  write_results_jsonl(grid, std::vector<GridRecord>(run.records.begin(),
                                                    run.records.begin() + n * (experiment_grid().size() + 1)));
  const bool ok = !serial.empty() && serial == threaded && serial == again && serial == grid.str();
  std::filesystem::remove_all(dir);
  report(8, "determinism", ok,
         fmt("%d scenarios x 15 rows; serial, 4 threads, csv input and the %d-thread grid run %s, %.1f s", n,
             workers(), ok ? "identical" : "DIFFER", seconds_since(t0)));
}

// 9 -------------------------------------------------------------------------

void geometry_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Point a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    worst = std::max(worst, std::abs(point_segment_distance(a, b, c) - fx::segment_distance_oracle(a, b, c, 1000)));
  }
  std::uniform_real_distribution<double> pos(-4.0, 4.0), ang(-kPi, kPi), len(1.0, 6.0), wid(0.5, 3.0);
  int disagreements = 0, compared = 0, overlapping = 0;
  for (int i = 0; i < 1000; ++i) {
    const double l = len(rng), w = wid(rng);
    const fx::Box a{{pos(rng), pos(rng)}, ang(rng), l, w};
    const fx::Box b{{pos(rng), pos(rng)}, ang(rng), l, w};
    if (std::abs(fx::box_margin(a, b)) < 1e-9) continue;
    ++compared;
    const bool kernel = oriented_box_overlap(a.c, a.heading, b.c, b.heading, l, w) == 1;
    overlapping += kernel;
    disagreements += kernel != fx::box_overlap_oracle(a, b, 2000);
  }
  report(9, "geometry oracles", worst < 1e-9 && disagreements == 0,
         fmt("segment max error %.2g over 1e4; boxes %d/%d disagree (%d overlapping), %.1f s", worst, disagreements,
             compared, overlapping, seconds_since(t0)));
}

}  // namespace

int main() {
  try {
    dynamics_roundtrip();
    reversal_handling();
    gradient_correctness();
    const GridRun run = constraint_soundness();
    hyperparameter_fidelity();
    directional_efficacy(run);
    false_negative_attack();
    determinism(run);
    geometry_oracles();
  } catch (const std::exception& e) {
    std::printf("FAIL  acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
