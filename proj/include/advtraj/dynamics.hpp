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

// Curvature/acceleration kinematic model: the forward step, its inverse on
// position-only data (with reversal detection), and rollouts.

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "advtraj/core.hpp"
#include "advtraj/scalar.hpp"

namespace advtraj {

// Speeds below this have no defined curvature; extraction reports kappa = 0.
inline constexpr double kSpeedDeadBand = 1e-6;

template <class S>
int sign_of(const S& v) {
  return value_of(v) < 0.0 ? -1 : 1;
}

// One step of the model:
//   v'     = v + a dt
//   theta' = theta + v kappa dt
//   x'     = x + v' cos(theta') dt
//   y'     = y + v' sin(theta') dt
template <class S>
BasicAgentState<S> phi_forward(const BasicAgentState<S>& s, const BasicControlInput<S>& u, double dt) {
  using std::cos;
  using std::sin;
  BasicAgentState<S> n;
  n.v = s.v + u.a * dt;
  n.theta = wrap_angle(s.theta + s.v * u.kappa * dt);
  n.x = s.x + n.v * cos(n.theta) * dt;
  n.y = s.y + n.v * sin(n.theta) * dt;
  const double nv = value_of(n.v);
  n.direction = nv > 0.0 ? 1 : (nv < 0.0 ? -1 : s.direction);
  return n;
}

// Initial state assuming speed and heading are constant over the first step.
template <class S>
BasicAgentState<S> extract_initial_state(const Vec2<S>& p0, const Vec2<S>& p1, double dt) {
  using std::atan2;
  if (!(dt > 0.0)) throw std::invalid_argument("extract_initial_state: dt must be positive");
  const S vx = (p1.x - p0.x) / dt;
  const S vy = (p1.y - p0.y) / dt;
  BasicAgentState<S> s;
  s.x = p0.x;
  s.y = p0.y;
  s.v = norm2(vx, vy);
  s.theta = atan2(vy, vx);
  s.direction = 1;
  return s;
}

// Travel-direction flag for the displacement (vx, vy) observed from state s.
// The vehicle's current direction of motion is its heading when v >= 0 and
// the opposite of its heading when v < 0. Motion within pi/2 of that keeps
// the sign of v; anything else flips it. Zero displacement keeps sign(v).
inline int direction_of_travel(double vx, double vy, double theta, double v) {
  const int sv = v < 0.0 ? -1 : 1;
  if (vx == 0.0 && vy == 0.0) return sv;
  const double motion = sv > 0 ? theta : theta + kPi;
  const double diff = std::atan2(vy, vx) - motion;
  return std::abs(diff - wrap_offset(diff)) <= 0.5 * kPi ? sv : -sv;
}

template <class S>
int direction_of_travel(const S& vx, const S& vy, const BasicAgentState<S>& s) {
  return direction_of_travel(value_of(vx), value_of(vy), value_of(s.theta), value_of(s.v));
}

template <class S>
struct BasicExtraction {
  BasicAgentState<S> initial;
  BasicControlSequence<S> controls;
  // states[i] is the state at points[i]; states.size() == points.size().
  std::vector<BasicAgentState<S>> states;
};

using Extraction = BasicExtraction<double>;

// Inverse model over a position sequence. Alternates the inverse step (to get
// u(t)) and the forward recurrence on (v, theta) (to get s(t+1)).
template <class S>
BasicExtraction<S> extract_controls(std::span<const Vec2<S>> points, double dt) {
  using std::atan2;
  if (points.size() < 2) throw std::invalid_argument("extract_controls: trajectory needs at least 2 points");
  BasicExtraction<S> out;
  out.initial = extract_initial_state(points[0], points[1], dt);
  out.controls.dt = dt;
  out.controls.inputs.reserve(points.size() - 1);
  out.states.reserve(points.size());
  out.states.push_back(out.initial);

  BasicAgentState<S> s = out.initial;
  for (std::size_t t = 0; t + 1 < points.size(); ++t) {
    const S vx = (points[t + 1].x - points[t].x) / dt;
    const S vy = (points[t + 1].y - points[t].y) / dt;
    const S speed = norm2(vx, vy);

    BasicAgentState<S> next;
    next.x = points[t + 1].x;
    next.y = points[t + 1].y;
    if (value_of(speed) < kSpeedDeadBand) {
      // No usable direction from a (near) zero displacement.
      next.v = speed * 0.0;
      next.theta = s.theta;
      next.direction = s.direction;
    } else {
      const int d = direction_of_travel(vx, vy, s);
      next.direction = d;
      if (d > 0) {
        next.v = speed;
        next.theta = atan2(vy, vx);
      } else {
        next.v = -speed;
        next.theta = atan2(-vy, -vx);
      }
    }

    BasicControlInput<S> u;
    u.a = (next.v - s.v) / dt;
    if (std::abs(value_of(s.v)) < kSpeedDeadBand) {
      u.kappa = s.v * 0.0;
    } else {
      u.kappa = wrap_angle(next.theta - s.theta) / (s.v * dt);
    }
    out.controls.inputs.push_back(u);
    out.states.push_back(next);
    s = next;
  }
  return out;
}

template <class S>
BasicExtraction<S> extract_controls(const BasicTrajectory<S>& traj) {
  return extract_controls(std::span<const Vec2<S>>(traj.points), traj.dt);
}

// Iterates phi_forward from s0; output has controls.size() + 1 points and
// starts at (s0.x, s0.y).
template <class S>
BasicTrajectory<S> rollout(const BasicAgentState<S>& s0, const BasicControlSequence<S>& controls, int t0_index = 0,
                           std::vector<BasicAgentState<S>>* states = nullptr) {
  if (controls.inputs.empty()) throw std::invalid_argument("rollout: empty control sequence");
  BasicTrajectory<S> out;
  out.dt = controls.dt;
  out.t0_index = t0_index;
  out.points.reserve(controls.size() + 1);
  out.points.push_back({s0.x, s0.y});
  if (states) states->assign(1, s0);
  BasicAgentState<S> s = s0;
  for (const auto& u : controls.inputs) {
    s = phi_forward(s, u, controls.dt);
    out.points.push_back({s.x, s.y});
    if (states) states->push_back(s);
  }
  return out;
}

template <class S>
struct JointRollout {
  BasicTrajectory<S> past;
  BasicTrajectory<S> future;
};

// Past from s0 through past_controls (H points, indices -H+1..0), then the
// future continues from the terminal past state through future_controls
// (T points, indices 1..T).
template <class S>
JointRollout<S> joint_rollout(const BasicAgentState<S>& s0, const BasicControlSequence<S>& past_controls,
                              const BasicControlSequence<S>& future_controls) {
  if (future_controls.inputs.empty()) throw std::invalid_argument("joint_rollout: empty future controls");
  JointRollout<S> out;
  const int H = static_cast<int>(past_controls.size()) + 1;
  BasicAgentState<S> s = s0;
  out.past.dt = past_controls.dt;
  out.past.t0_index = -H + 1;
  out.past.points.reserve(static_cast<std::size_t>(H));
  out.past.points.push_back({s.x, s.y});
  for (const auto& u : past_controls.inputs) {
    s = phi_forward(s, u, past_controls.dt);
    out.past.points.push_back({s.x, s.y});
  }
  out.future.dt = future_controls.dt;
  out.future.t0_index = 1;
  out.future.points.reserve(future_controls.size());
  for (const auto& u : future_controls.inputs) {
    s = phi_forward(s, u, future_controls.dt);
    out.future.points.push_back({s.x, s.y});
  }
  return out;
}

// Controls of a past/future pair: the concatenated trajectory is inverted so
// that the future controls start from the terminal past state.
struct TargetControls {
  AgentState initial;
  ControlSequence past;    // H - 1 entries, t = -H+1 .. -1
  ControlSequence future;  // T entries, t = 0 .. T-1
};

inline TargetControls extract_joint_controls(const Trajectory& past, const Trajectory& future) {
  std::vector<Point> all = past.points;
  all.insert(all.end(), future.points.begin(), future.points.end());
  const Extraction e = extract_controls(std::span<const Point>(all), past.dt);
  TargetControls out;
  out.initial = e.initial;
  out.past.dt = out.future.dt = past.dt;
  const std::size_t np = past.size() - 1;
  out.past.inputs.assign(e.controls.inputs.begin(), e.controls.inputs.begin() + static_cast<std::ptrdiff_t>(np));
  out.future.inputs.assign(e.controls.inputs.begin() + static_cast<std::ptrdiff_t>(np), e.controls.inputs.end());
  return out;
}

}  // namespace advtraj
