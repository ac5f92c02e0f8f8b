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

// Attack objectives. All are minimised by the attack, so the displacement
// objectives carry a leading minus.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "advtraj/core.hpp"
#include "advtraj/predictor.hpp"
#include "advtraj/scalar.hpp"

namespace advtraj {

enum class Objective { ade, fde, collision_fp, collision_fn };

inline std::string to_string(Objective o) {
  switch (o) {
    case Objective::ade: return "ade";
    case Objective::fde: return "fde";
    case Objective::collision_fp: return "collision_fp";
    case Objective::collision_fn: return "collision_fn";
  }
  return "?";
}

inline Objective objective_from_string(std::string_view s) {
  if (s == "ade") return Objective::ade;
  if (s == "fde") return Objective::fde;
  if (s == "collision_fp") return Objective::collision_fp;
  if (s == "collision_fn") return Objective::collision_fn;
  throw ConfigError("unknown objective '" + std::string(s) + "'");
}

namespace detail {

template <class S>
void check_horizon(const Trajectory& truth, const BasicPredictionSet<S>& pred) {
  if (pred.samples.empty()) throw std::invalid_argument("objective: empty prediction set");
  for (const auto& s : pred.samples) {
    if (s.size() != truth.size()) throw std::invalid_argument("objective: horizon mismatch");
  }
}

}  // namespace detail

// -(1 / KT) sum_k sum_t |yhat_k(t) - y(t)|
template <class S>
S loss_ade(const Trajectory& truth, const BasicPredictionSet<S>& pred) {
  detail::check_horizon(truth, pred);
  S sum = distance(pred.samples[0][0], truth[0]) * 0.0;
  for (const auto& sample : pred.samples) {
    for (std::size_t t = 0; t < truth.size(); ++t) sum = sum + distance(sample[t], truth[t]);
  }
  return -(sum / static_cast<double>(pred.K() * truth.size()));
}

// -(1 / K) sum_k |yhat_k(T) - y(T)|
template <class S>
S loss_fde(const Trajectory& truth, const BasicPredictionSet<S>& pred) {
  detail::check_horizon(truth, pred);
  const std::size_t last = truth.size() - 1;
  S sum = distance(pred.samples[0][last], truth[last]) * 0.0;
  for (const auto& sample : pred.samples) sum = sum + distance(sample[last], truth[last]);
  return -(sum / static_cast<double>(pred.K()));
}

// Closest matched-time approach of a trajectory to the ego future.
template <class S>
S min_matched_distance(const BasicTrajectory<S>& traj, const Trajectory& ego) {
  if (traj.size() != ego.size()) throw std::invalid_argument("objective: horizon mismatch");
  std::vector<S> d;
  d.reserve(traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t) d.push_back(distance(traj[t], ego[t]));
  return select_min(d);
}

// (1 / K) sum_k min_t |yhat_k(t) - y_ego(t)|
template <class S>
S loss_collision_fp(const Trajectory& ego_future, const BasicPredictionSet<S>& pred) {
  detail::check_horizon(ego_future, pred);
  S sum = min_matched_distance(pred.samples[0], ego_future);
  for (std::size_t k = 1; k < pred.K(); ++k) sum = sum + min_matched_distance(pred.samples[k], ego_future);
  return sum / static_cast<double>(pred.K());
}

// min_t |y~(t) - y_ego(t)| + (1 / T) sum_t |mean_k yhat~_k(t) - mean_k yhat_k(t)|
// The clean prediction is a fixed reference and carries no gradient.
template <class S>
S loss_collision_fn(const Trajectory& ego_future, const BasicTrajectory<S>& perturbed_future,
                    const BasicPredictionSet<S>& pred_perturbed, const PredictionSet& pred_clean) {
  detail::check_horizon(ego_future, pred_perturbed);
  detail::check_horizon(ego_future, pred_clean);
  const S approach = min_matched_distance(perturbed_future, ego_future);
  const BasicTrajectory<S> mean_pert = predict_mean(pred_perturbed);
  const Trajectory mean_clean = predict_mean(pred_clean);
  S drift = distance(mean_pert[0], mean_clean[0]);
  for (std::size_t t = 1; t < mean_pert.size(); ++t) drift = drift + distance(mean_pert[t], mean_clean[t]);
  return approach + drift / static_cast<double>(mean_pert.size());
}

// objective + sum_i w_i * barrier_i; missing weights default to 1.
template <class S>
S compose_total_loss(const S& objective, const std::vector<S>& barriers, const std::vector<double>& weights = {}) {
  if (!weights.empty() && weights.size() != barriers.size()) {
    throw std::invalid_argument("compose_total_loss: weights and barriers differ in length");
  }
  S total = objective;
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w == 0.0) continue;
    total = total + barriers[i] * w;
  }
  return total;
}

}  // namespace advtraj
