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

// Domain types and planar geometry kernels.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "advtraj/scalar.hpp"

namespace advtraj {

// Bad configuration or arguments supplied by a caller.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violating a documented invariant or schema.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class S>
struct Vec2 {
  S x{};
  S y{};
};

using Point = Vec2<double>;

template <class A, class B>
auto operator-(const Vec2<A>& a, const Vec2<B>& b) {
  using R = decltype(a.x - b.x);
  return Vec2<R>{a.x - b.x, a.y - b.y};
}

template <class A, class B>
auto operator+(const Vec2<A>& a, const Vec2<B>& b) {
  using R = decltype(a.x + b.x);
  return Vec2<R>{a.x + b.x, a.y + b.y};
}

template <class A, class B>
auto dot(const Vec2<A>& a, const Vec2<B>& b) {
  return a.x * b.x + a.y * b.y;
}

// z-component of the planar cross product.
template <class A, class B>
auto cross(const Vec2<A>& a, const Vec2<B>& b) {
  return a.x * b.y - a.y * b.x;
}

template <class S>
S norm(const Vec2<S>& v) {
  return norm2(v.x, v.y);
}

template <class A, class B>
auto distance(const Vec2<A>& a, const Vec2<B>& b) {
  return norm(a - b);
}

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

// Uniformly sampled positions. t0_index is the index of the first point on
// the scenario time axis: -H+1 for a past, 1 for a future.
template <class S = double>
struct BasicTrajectory {
  std::vector<Vec2<S>> points;
  double dt = 0.1;
  int t0_index = 0;

  std::size_t size() const { return points.size(); }
  const Vec2<S>& operator[](std::size_t i) const { return points[i]; }
  Vec2<S>& operator[](std::size_t i) { return points[i]; }
  const Vec2<S>& back() const { return points.back(); }
};

using Trajectory = BasicTrajectory<double>;

inline void validate(const Trajectory& traj, const char* what = "trajectory") {
  if (traj.points.size() < 2) throw DataError(std::string(what) + ": needs at least 2 points");
  if (!(traj.dt > 0.0) || !std::isfinite(traj.dt)) throw DataError(std::string(what) + ": dt must be positive");
  for (const Point& p : traj.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DataError(std::string(what) + ": non-finite coordinate");
  }
}

// Kinematic state; direction is the travel-direction flag (+1 / -1).
template <class S = double>
struct BasicAgentState {
  S x{};
  S y{};
  S theta{};
  S v{};
  int direction = 1;
};

using AgentState = BasicAgentState<double>;

template <class S = double>
struct BasicControlInput {
  S a{};
  S kappa{};
};

using ControlInput = BasicControlInput<double>;

template <class S = double>
struct BasicControlSequence {
  std::vector<BasicControlInput<S>> inputs;
  double dt = 0.1;

  std::size_t size() const { return inputs.size(); }
  const BasicControlInput<S>& operator[](std::size_t i) const { return inputs[i]; }
  BasicControlInput<S>& operator[](std::size_t i) { return inputs[i]; }
};

using ControlSequence = BasicControlSequence<double>;

struct ControlDelta {
  double da = 0.0;
  double dkappa = 0.0;
};

// Additive offsets congruent with a ControlSequence.
struct Perturbation {
  std::vector<ControlDelta> delta;

  static Perturbation zeros(std::size_t n) { return Perturbation{std::vector<ControlDelta>(n)}; }
  std::size_t size() const { return delta.size(); }
};

template <class S>
BasicControlSequence<S> apply(const ControlSequence& base, const std::vector<S>& flat_delta, std::size_t offset) {
  BasicControlSequence<S> out;
  out.dt = base.dt;
  out.inputs.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    out.inputs.push_back({flat_delta[offset + 2 * i] + base[i].a, flat_delta[offset + 2 * i + 1] + base[i].kappa});
  }
  return out;
}

inline ControlSequence apply(const ControlSequence& base, const Perturbation& p) {
  if (p.size() != base.size()) throw std::invalid_argument("apply: perturbation not congruent with controls");
  ControlSequence out = base;
  for (std::size_t i = 0; i < base.size(); ++i) {
    out[i].a = p.delta[i].da + base[i].a;
    out[i].kappa = p.delta[i].dkappa + base[i].kappa;
  }
  return out;
}

inline constexpr double kDefaultVehicleLength = 4.2;
inline constexpr double kDefaultVehicleWidth = 1.7;

struct Scenario {
  std::string id;
  Trajectory ego_past;
  Trajectory ego_future;
  Trajectory target_past;
  Trajectory target_future;
  double vehicle_length = kDefaultVehicleLength;
  double vehicle_width = kDefaultVehicleWidth;

  int past_length() const { return static_cast<int>(target_past.size()); }
  int future_length() const { return static_cast<int>(target_future.size()); }
  double dt() const { return target_past.dt; }
};

inline void validate(const Scenario& s) {
  validate(s.ego_past, "ego_past");
  validate(s.target_past, "target_past");
  if (s.ego_future.points.empty() || s.target_future.points.empty()) throw DataError("scenario: empty future");
  for (const Trajectory* t : {&s.ego_future, &s.target_future}) {
    if (t->dt != s.target_past.dt) throw DataError("scenario: trajectories must share dt");
    for (const Point& p : t->points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DataError("scenario: non-finite coordinate");
    }
  }
  if (s.ego_past.dt != s.target_past.dt) throw DataError("scenario: trajectories must share dt");
  if (s.ego_past.size() != s.target_past.size()) throw DataError("scenario: ego and target past lengths differ");
  if (s.ego_future.size() != s.target_future.size()) throw DataError("scenario: ego and target future lengths differ");
  if (!(s.vehicle_length > 0.0) || !(s.vehicle_width > 0.0)) throw DataError("scenario: vehicle footprint must be positive");
}

// K equally likely future trajectories.
template <class S = double>
struct BasicPredictionSet {
  std::vector<BasicTrajectory<S>> samples;

  std::size_t K() const { return samples.size(); }
  std::size_t horizon() const { return samples.empty() ? 0 : samples.front().size(); }
};

using PredictionSet = BasicPredictionSet<double>;

// Distance from a to the segment from c to b.
//   r <= 0     -> |a - c|
//   0 < r < 1  -> perpendicular distance
//   r >= 1     -> |a - b|
// with r = ((a - c) . (b - c)) / |b - c|^2. A degenerate segment (b == c)
// yields |a - c|.
template <class S>
S point_segment_distance(const Vec2<S>& a, const Point& b, const Point& c) {
  const Point bc{b.x - c.x, b.y - c.y};
  const double len2 = bc.x * bc.x + bc.y * bc.y;
  const auto ac = a - c;
  if (len2 == 0.0) return norm(ac);
  const double r = value_of(dot(ac, bc)) / len2;
  if (r <= 0.0) return norm(ac);
  if (r >= 1.0) return distance(a, b);
  return norm2(cross(ac, bc), 0.0) / std::sqrt(len2);
}

struct OrientedBox {
  Point center;
  double heading = 0.0;
  double length = kDefaultVehicleLength;
  double width = kDefaultVehicleWidth;

  std::array<Point, 4> corners() const {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    const double hl = 0.5 * length;
    const double hw = 0.5 * width;
    const Point u{c * hl, s * hl};
    const Point w{-s * hw, c * hw};
    return {Point{center.x + u.x + w.x, center.y + u.y + w.y}, Point{center.x - u.x + w.x, center.y - u.y + w.y},
            Point{center.x - u.x - w.x, center.y - u.y - w.y}, Point{center.x + u.x - w.x, center.y + u.y - w.y}};
  }
};

// Separating-axis test on closed rectangles: touching boundaries overlap.
inline bool boxes_overlap(const OrientedBox& b1, const OrientedBox& b2) {
  const Point u1{std::cos(b1.heading), std::sin(b1.heading)};
  const Point v1{-u1.y, u1.x};
  const Point u2{std::cos(b2.heading), std::sin(b2.heading)};
  const Point v2{-u2.y, u2.x};
  const Point d{b2.center.x - b1.center.x, b2.center.y - b1.center.y};
  const double hl1 = 0.5 * b1.length, hw1 = 0.5 * b1.width;
  const double hl2 = 0.5 * b2.length, hw2 = 0.5 * b2.width;
  for (const Point& axis : {u1, v1, u2, v2}) {
    const double r1 = hl1 * std::abs(dot(u1, axis)) + hw1 * std::abs(dot(v1, axis));
    const double r2 = hl2 * std::abs(dot(u2, axis)) + hw2 * std::abs(dot(v2, axis));
    if (std::abs(dot(d, axis)) > r1 + r2) return false;
  }
  return true;
}

inline int oriented_box_overlap(const Point& center1, double heading1, const Point& center2, double heading2,
                                double length, double width) {
  if (!(length > 0.0) || !(width > 0.0)) throw std::invalid_argument("oriented_box_overlap: footprint must be positive");
  return boxes_overlap(OrientedBox{center1, heading1, length, width}, OrientedBox{center2, heading2, length, width}) ? 1
                                                                                                                    : 0;
}

}  // namespace advtraj
