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

// Log-barrier regularisers keeping a perturbed trajectory within d_max of
// its reference, either point-by-point in time or laterally to the path.

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "advtraj/core.hpp"
#include "advtraj/scalar.hpp"

namespace advtraj {

enum class ObservedMode { time, time_traj };
enum class FutureMode { none, traj };

inline std::string to_string(ObservedMode m) { return m == ObservedMode::time ? "time" : "time-traj"; }
inline std::string to_string(FutureMode m) { return m == FutureMode::none ? "none" : "traj"; }

inline ObservedMode observed_mode_from_string(std::string_view s) {
  if (s == "time") return ObservedMode::time;
  if (s == "time-traj" || s == "time_traj") return ObservedMode::time_traj;
  throw ConfigError("unknown observed constraint '" + std::string(s) + "'");
}

inline FutureMode future_mode_from_string(std::string_view s) {
  if (s == "none") return FutureMode::none;
  if (s == "traj") return FutureMode::traj;
  throw ConfigError("unknown future constraint '" + std::string(s) + "'");
}

struct BarrierConfig {
  double d_max = 0.9;
  ObservedMode observed = ObservedMode::time;
  FutureMode future = FutureMode::none;

  void validate() const {
    if (!(d_max > 0.0)) throw ConfigError("barrier: d_max must be positive");
  }
};

// A constrained distance reached d_max.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class S>
S d_time(const Vec2<S>& perturbed, const Trajectory& reference, std::size_t index) {
  return distance(perturbed, reference[index]);
}

// Distance to the closest segment of the reference path.
template <class S>
S d_traj(const Vec2<S>& perturbed, const Trajectory& reference) {
  if (reference.size() < 2) throw std::invalid_argument("d_traj: reference needs at least 2 points");
  std::vector<S> d;
  d.reserve(reference.size() - 1);
  for (std::size_t t = 0; t + 1 < reference.size(); ++t) {
    d.push_back(point_segment_distance(perturbed, reference[t + 1], reference[t]));
  }
  return select_min(d);
}

// -ln(d_max - d); throws InfeasibleError when d >= d_max.
template <class S>
S barrier_point(const S& d, double d_max) {
  using std::log;
  if (!(value_of(d) < d_max)) throw InfeasibleError("barrier: constrained distance reached d_max");
  return -log(d_max - d);
}

namespace detail {

template <class S>
void check_congruent(const BasicTrajectory<S>& perturbed, const Trajectory& reference) {
  if (perturbed.size() != reference.size() || perturbed.size() == 0) {
    throw std::invalid_argument("barrier: perturbed and reference trajectories differ in length");
  }
}

}  // namespace detail

template <class S>
S barrier_time(const BasicTrajectory<S>& perturbed, const Trajectory& reference, double d_max) {
  detail::check_congruent(perturbed, reference);
  S sum = barrier_point(d_time(perturbed[0], reference, 0), d_max);
  for (std::size_t t = 1; t < perturbed.size(); ++t) sum = sum + barrier_point(d_time(perturbed[t], reference, t), d_max);
  return sum / static_cast<double>(perturbed.size());
}

template <class S>
S barrier_traj(const BasicTrajectory<S>& perturbed, const Trajectory& reference, double d_max) {
  detail::check_congruent(perturbed, reference);
  S sum = barrier_point(d_traj(perturbed[0], reference), d_max);
  for (std::size_t t = 1; t < perturbed.size(); ++t) sum = sum + barrier_point(d_traj(perturbed[t], reference), d_max);
  return sum / static_cast<double>(perturbed.size());
}

// Trajectory-specific barrier plus a time-specific pin on the final point.
template <class S>
S barrier_time_traj(const BasicTrajectory<S>& perturbed, const Trajectory& reference, double d_max) {
  const std::size_t last = perturbed.size() - 1;
  return barrier_traj(perturbed, reference, d_max) + barrier_point(d_time(perturbed[last], reference, last), d_max);
}

template <class S>
S observed_barrier(ObservedMode mode, const BasicTrajectory<S>& perturbed, const Trajectory& reference, double d_max) {
  return mode == ObservedMode::time ? barrier_time(perturbed, reference, d_max)
                                    : barrier_time_traj(perturbed, reference, d_max);
}

// Largest constrained distance under the active modes; the iterate is
// feasible iff this is strictly below d_max.
inline double max_constrained_distance(const BarrierConfig& cfg, const Trajectory& past_pert, const Trajectory& past,
                                       const Trajectory& future_pert, const Trajectory& future) {
  double worst = 0.0;
  for (std::size_t t = 0; t < past_pert.size(); ++t) {
    if (cfg.observed == ObservedMode::time) {
      worst = std::max(worst, d_time(past_pert[t], past, t));
    } else {
      worst = std::max(worst, d_traj(past_pert[t], past));
    }
  }
  if (cfg.observed == ObservedMode::time_traj) {
    const std::size_t last = past_pert.size() - 1;
    worst = std::max(worst, d_time(past_pert[last], past, last));
  }
  if (cfg.future == FutureMode::traj) {
    for (std::size_t t = 0; t < future_pert.size(); ++t) worst = std::max(worst, d_traj(future_pert[t], future));
  }
  return worst;
}

}  // namespace advtraj
