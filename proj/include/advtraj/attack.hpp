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

// Projected gradient descent over additive perturbations of the target's
// past and future control actions.
//
// Each iteration evaluates the total loss (objective plus barriers) on the
// tape, takes a gradient step of size alpha_m, clamps every component into
// its control box and checks the rolled-out trajectories against the active
// position constraints. An infeasible candidate halves the step and retries
// within the same iteration; alpha_m itself decays geometrically and is
// never affected by halving.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "advtraj/barriers.hpp"
#include "advtraj/core.hpp"
#include "advtraj/dynamics.hpp"
#include "advtraj/gradtape.hpp"
#include "advtraj/objectives.hpp"
#include "advtraj/predictor.hpp"

namespace advtraj {

inline constexpr double kStandardGravity = 9.81;

struct AttackConfig {
  Objective objective = Objective::ade;
  BarrierConfig barrier;
  double alpha0 = 0.01;
  double gamma = 0.99;
  int max_iterations = 100;
  double rel_bound_a = 2.0;
  double rel_bound_kappa = 0.05;
  double abs_bound_kappa = 0.2;
  double a_min = -kStandardGravity;
  double a_max = kStandardGravity;
  int max_halvings = 30;
  std::uint64_t seed = 0;
  // Central-difference step for gradient-free predictors.
  double fd_step = 1e-6;

  void validate() const {
    barrier.validate();
    if (!(alpha0 > 0.0)) throw ConfigError("attack: alpha0 must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("attack: gamma must lie in (0, 1]");
    if (max_iterations < 0) throw ConfigError("attack: max_iterations must be >= 0");
    if (!(rel_bound_a > 0.0) || !(rel_bound_kappa > 0.0) || !(abs_bound_kappa > 0.0)) {
      throw ConfigError("attack: control bounds must be positive");
    }
    if (!(a_min <= a_max)) throw ConfigError("attack: a_min must not exceed a_max");
    if (max_halvings < 0) throw ConfigError("attack: max_halvings must be >= 0");
    if (!(fd_step > 0.0)) throw ConfigError("attack: fd_step must be positive");
  }
};

// Per-component bounds on the flattened perturbation
// [da_0, dk_0, da_1, dk_1, ...].
struct ControlBox {
  std::vector<double> lower;
  std::vector<double> upper;
  // Entries whose box was empty and collapsed onto the relative bound.
  int empty_entries = 0;

  bool contains(std::span<const double> delta) const {
    for (std::size_t i = 0; i < delta.size(); ++i) {
      if (delta[i] < lower[i] || delta[i] > upper[i]) return false;
    }
    return true;
  }
};

namespace detail {

// [max(-rel, abs_lo - u), min(rel, abs_hi - u)]. An empty interval means u
// itself lies more than rel outside the absolute range; it collapses onto
// the relative edge pointing back towards that range.
inline std::pair<double, double> control_interval(double u, double rel, double abs_lo, double abs_hi, bool& empty) {
  const double lo = std::max(-rel, abs_lo - u);
  const double hi = std::min(rel, abs_hi - u);
  empty = lo > hi;
  if (!empty) return {lo, hi};
  const double edge = u > abs_hi ? -rel : rel;
  return {edge, edge};
}

}  // namespace detail

inline void append_box(ControlBox& box, const ControlSequence& controls, const AttackConfig& cfg) {
  for (const ControlInput& u : controls.inputs) {
    bool empty_a = false, empty_k = false;
    const auto [alo, ahi] = detail::control_interval(u.a, cfg.rel_bound_a, cfg.a_min, cfg.a_max, empty_a);
    const auto [klo, khi] =
        detail::control_interval(u.kappa, cfg.rel_bound_kappa, -cfg.abs_bound_kappa, cfg.abs_bound_kappa, empty_k);
    box.lower.push_back(alo);
    box.upper.push_back(ahi);
    box.lower.push_back(klo);
    box.upper.push_back(khi);
    box.empty_entries += static_cast<int>(empty_a) + static_cast<int>(empty_k);
  }
}

inline ControlBox make_box(const ControlSequence& past, const ControlSequence& future, const AttackConfig& cfg) {
  ControlBox box;
  append_box(box, past, cfg);
  append_box(box, future, cfg);
  return box;
}

// Euclidean projection onto the control box; a per-component clamp because
// the feasible set is axis-aligned.
inline void clamp_into(const ControlBox& box, std::span<double> delta) {
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = std::clamp(delta[i], box.lower[i], box.upper[i]);
}

inline Perturbation project_box(const ControlSequence& controls, const Perturbation& delta, const AttackConfig& cfg) {
  if (controls.size() != delta.size()) throw std::invalid_argument("project_box: shapes differ");
  ControlBox box;
  append_box(box, controls, cfg);
  Perturbation out = delta;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    out.delta[i].da = std::clamp(delta.delta[i].da, box.lower[2 * i], box.upper[2 * i]);
    out.delta[i].dkappa = std::clamp(delta.delta[i].dkappa, box.lower[2 * i + 1], box.upper[2 * i + 1]);
  }
  return out;
}

struct ProjectedStep {
  bool accepted = false;
  int halvings = 0;
  double step = 0.0;
};

// One projected gradient step with in-iteration step halving:
//   candidate = clamp(delta - step * grad), step = alpha, alpha/2, ...
// until feasible(candidate) or max_halvings is exhausted, in which case
// delta is left unchanged.
template <class Feasible>
ProjectedStep projected_step(std::vector<double>& delta, std::span<const double> grad, double alpha,
                             const ControlBox& box, Feasible&& feasible, int max_halvings) {
  ProjectedStep out;
  std::vector<double> candidate(delta.size());
  double step = alpha;
  for (int h = 0;; ++h) {
    for (std::size_t i = 0; i < delta.size(); ++i) candidate[i] = delta[i] - step * grad[i];
    clamp_into(box, candidate);
    if (feasible(std::span<const double>(candidate))) {
      delta.swap(candidate);
      out.accepted = true;
      out.halvings = h;
      out.step = step;
      return out;
    }
    if (h == max_halvings) {
      out.halvings = h;
      out.step = step;
      return out;
    }
    step *= 0.5;
  }
}

// Everything fixed for the lifetime of one attack.
struct AttackProblem {
  Scenario scenario;
  TargetControls controls;
  PredictionSet pred_clean;
  ControlBox box;

  int H() const { return scenario.past_length(); }
  int T() const { return scenario.future_length(); }
  std::size_t past_dims() const { return 2 * controls.past.size(); }
  std::size_t dims() const { return 2 * (controls.past.size() + controls.future.size()); }
};

inline AttackProblem prepare_attack(const Scenario& scenario, const AttackConfig& cfg, const Predictor& predictor) {
  validate(scenario);
  AttackProblem p;
  p.scenario = scenario;
  p.controls = extract_joint_controls(scenario.target_past, scenario.target_future);
  p.pred_clean = predictor.predict(scenario.target_past, scenario.ego_past, scenario.future_length());
  p.box = make_box(p.controls.past, p.controls.future, cfg);
  return p;
}

template <class S>
JointRollout<S> perturbed_rollout(const AttackProblem& p, const std::vector<S>& delta) {
  const AgentState& i = p.controls.initial;
  BasicAgentState<S> s0;
  s0.x = S(i.x);
  s0.y = S(i.y);
  s0.theta = S(i.theta);
  s0.v = S(i.v);
  s0.direction = i.direction;
  return joint_rollout(s0, apply(p.controls.past, delta, 0), apply(p.controls.future, delta, p.past_dims()));
}

template <class S>
struct LossTerms {
  S objective{};
  S observed_barrier{};
  S future_barrier{};
  S total{};
};

// Total adversarial loss at a perturbation; throws InfeasibleError when a
// constrained distance reaches d_max.
template <class S>
LossTerms<S> evaluate_loss(const AttackProblem& p, const AttackConfig& cfg, const Predictor& predictor,
                           const std::vector<S>& delta) {
  const Scenario& sc = p.scenario;
  const JointRollout<S> jr = perturbed_rollout(p, delta);
  const BasicPredictionSet<S> pred = predictor.predict(jr.past, sc.ego_past, p.T());
  LossTerms<S> out;
  switch (cfg.objective) {
    case Objective::ade: out.objective = loss_ade(sc.target_future, pred); break;
    case Objective::fde: out.objective = loss_fde(sc.target_future, pred); break;
    case Objective::collision_fp: out.objective = loss_collision_fp(sc.ego_future, pred); break;
    case Objective::collision_fn:
      out.objective = loss_collision_fn(sc.ego_future, jr.future, pred, p.pred_clean);
      break;
  }
  std::vector<S> barriers;
  out.observed_barrier = observed_barrier(cfg.barrier.observed, jr.past, sc.target_past, cfg.barrier.d_max);
  barriers.push_back(out.observed_barrier);
  if (cfg.barrier.future == FutureMode::traj) {
    out.future_barrier = barrier_traj(jr.future, sc.target_future, cfg.barrier.d_max);
    barriers.push_back(out.future_barrier);
  } else {
    out.future_barrier = S(0.0);
  }
  out.total = compose_total_loss(out.objective, barriers);
  return out;
}

inline bool is_feasible(const AttackProblem& p, const AttackConfig& cfg, std::span<const double> delta) {
  const std::vector<double> d(delta.begin(), delta.end());
  const JointRollout<double> jr = perturbed_rollout(p, d);
  return max_constrained_distance(cfg.barrier, jr.past, p.scenario.target_past, jr.future, p.scenario.target_future) <
         cfg.barrier.d_max;
}

// Loss and its gradient with respect to the flattened perturbation.
inline ValueAndGradient loss_gradient(const AttackProblem& p, const AttackConfig& cfg, const Predictor& predictor,
                                      const std::vector<double>& delta) {
  if (predictor.differentiable()) {
    return value_and_gradient(
        [&](const std::vector<Var>& d) { return evaluate_loss(p, cfg, predictor, d).total; }, delta);
  }
  ValueAndGradient out;
  out.value = evaluate_loss(p, cfg, predictor, delta).total;
  out.gradient.assign(delta.size(), 0.0);
  std::vector<double> x = delta;
  const double h = cfg.fd_step;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    auto at = [&](double v) {
      x[i] = v;
      const double f = evaluate_loss(p, cfg, predictor, x).total;
      x[i] = orig;
      return f;
    };
    try {
      out.gradient[i] = (at(orig + h) - at(orig - h)) / (2.0 * h);
    } catch (const InfeasibleError&) {
      try {
        out.gradient[i] = (at(orig + h) - out.value) / h;
      } catch (const InfeasibleError&) {
        out.gradient[i] = (out.value - at(orig - h)) / h;
      }
    }
  }
  return out;
}

struct PgdState {
  std::vector<double> delta;
  double alpha = 0.0;
  int iteration = 0;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;         // total loss at the iterate the gradient was taken at
  double alpha = 0.0;        // alpha_m used for this iteration
  ProjectedStep step;
  std::vector<double> delta;  // iterate after this iteration
  double max_distance = 0.0;  // largest constrained distance of that iterate
};

inline IterationRecord pgd_iteration(const AttackProblem& p, const AttackConfig& cfg, const Predictor& predictor,
                                     PgdState& state) {
  IterationRecord rec;
  rec.iteration = state.iteration;
  rec.alpha = state.alpha;
  const ValueAndGradient vg = loss_gradient(p, cfg, predictor, state.delta);
  rec.loss = vg.value;
  rec.step = projected_step(
      state.delta, vg.gradient, state.alpha, p.box,
      [&](std::span<const double> cand) { return is_feasible(p, cfg, cand); }, cfg.max_halvings);
  state.alpha *= cfg.gamma;
  ++state.iteration;
  rec.delta = state.delta;
  const JointRollout<double> jr = perturbed_rollout(p, state.delta);
  rec.max_distance =
      max_constrained_distance(cfg.barrier, jr.past, p.scenario.target_past, jr.future, p.scenario.target_future);
  return rec;
}

struct AttackResult {
  std::string scenario_id;
  Trajectory past_perturbed;
  Trajectory future_perturbed;
  ControlSequence past_controls;
  ControlSequence future_controls;
  Perturbation past_delta;
  Perturbation future_delta;
  PredictionSet pred_perturbed;
  PredictionSet pred_clean;
  std::vector<double> loss_trace;
  double final_loss = 0.0;
  int halving_events = 0;
  int rejected_steps = 0;
  int iterations_run = 0;
  int empty_box_entries = 0;
};

class AttackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using IterationObserver = std::function<void(const AttackProblem&, const IterationRecord&)>;

// Runs cfg.max_iterations PGD iterations from a zero perturbation. Zero
// iterations returns the identity attack.
inline AttackResult run_attack(const Scenario& scenario, const AttackConfig& cfg, const Predictor& predictor,
                               const IterationObserver& observer = {}) {
  cfg.validate();
  try {
    const AttackProblem p = prepare_attack(scenario, cfg, predictor);
    PgdState state{std::vector<double>(p.dims(), 0.0), cfg.alpha0, 0};
    AttackResult r;
    r.scenario_id = scenario.id;
    r.pred_clean = p.pred_clean;
    r.empty_box_entries = p.box.empty_entries;
    for (int m = 0; m < cfg.max_iterations; ++m) {
      const IterationRecord rec = pgd_iteration(p, cfg, predictor, state);
      r.loss_trace.push_back(rec.loss);
      r.halving_events += rec.step.halvings;
      r.rejected_steps += rec.step.accepted ? 0 : 1;
      if (observer) observer(p, rec);
    }
    r.iterations_run = state.iteration;

    const JointRollout<double> jr = perturbed_rollout(p, state.delta);
    r.past_perturbed = jr.past;
    r.future_perturbed = jr.future;
    r.past_controls = apply(p.controls.past, state.delta, 0);
    r.future_controls = apply(p.controls.future, state.delta, p.past_dims());
    const std::size_t np = p.controls.past.size();
    r.past_delta = Perturbation::zeros(np);
    r.future_delta = Perturbation::zeros(p.controls.future.size());
    for (std::size_t i = 0; i < np; ++i) r.past_delta.delta[i] = {state.delta[2 * i], state.delta[2 * i + 1]};
    for (std::size_t i = 0; i < p.controls.future.size(); ++i) {
      r.future_delta.delta[i] = {state.delta[2 * (np + i)], state.delta[2 * (np + i) + 1]};
    }
    r.pred_perturbed = predictor.predict(r.past_perturbed, scenario.ego_past, p.T());
    r.final_loss = evaluate_loss(p, cfg, predictor, state.delta).total;
    return r;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw AttackError("scenario " + scenario.id + ": " + e.what());
  }
}

// Lowest and highest extracted accelerations over a collection.
inline std::pair<double, double> dataset_accel_bounds(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw ConfigError("dataset_accel_bounds: empty collection");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Trajectory& t : trajectories) {
    const Extraction e = extract_controls(t);
    for (const ControlInput& u : e.controls.inputs) {
      lo = std::min(lo, u.a);
      hi = std::max(hi, u.a);
    }
  }
  return {lo, hi};
}

// Full past+future trajectories of both agents in every scenario.
inline std::vector<Trajectory> dataset_trajectories(const std::vector<Scenario>& scenarios) {
  std::vector<Trajectory> out;
  for (const Scenario& s : scenarios) {
    for (auto [past, future] : {std::pair{&s.target_past, &s.target_future}, std::pair{&s.ego_past, &s.ego_future}}) {
      Trajectory t = *past;
      t.points.insert(t.points.end(), future->points.begin(), future->points.end());
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace advtraj
