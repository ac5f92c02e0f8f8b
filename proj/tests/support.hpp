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

// Oracles and fixtures shared by the unit and acceptance suites. Nothing here
// calls the kernel under test for its reference values.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "advtraj/advtraj.hpp"

namespace advtraj::fixtures {

// Distance from a to segment c->b: dense uniform sampling, then golden-section
// refinement around the best sample (the distance along a segment is convex).
inline double segment_distance_oracle(Point a, Point b, Point c, int samples = 100000) {
  auto at = [&](double s) {
    const double x = c.x + s * (b.x - c.x) - a.x;
    const double y = c.y + s * (b.y - c.y) - a.y;
    return std::hypot(x, y);
  };
  int best = 0;
  double best_d = at(0.0);
  for (int i = 1; i <= samples; ++i) {
    const double d = at(static_cast<double>(i) / samples);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  double lo = std::max(0.0, (best - 1.0) / samples);
  double hi = std::min(1.0, (best + 1.0) / samples);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double m1 = hi - g * (hi - lo);
    const double m2 = lo + g * (hi - lo);
    if (at(m1) <= at(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::min({best_d, at(lo), at(hi), at(0.5 * (lo + hi))});
}

struct Box {
  Point c;
  double heading;
  double length;
  double width;
};

inline bool box_contains(const Box& b, Point p) {
  const double dx = p.x - b.c.x;
  const double dy = p.y - b.c.y;
  const double u = dx * std::cos(b.heading) + dy * std::sin(b.heading);
  const double w = -dx * std::sin(b.heading) + dy * std::cos(b.heading);
  return std::abs(u) <= 0.5 * b.length && std::abs(w) <= 0.5 * b.width;
}

inline std::vector<Point> box_boundary_samples(const Box& b, int per_edge) {
  const double c = std::cos(b.heading), s = std::sin(b.heading);
  const double hl = 0.5 * b.length, hw = 0.5 * b.width;
  const Point k[4] = {{b.c.x + c * hl - s * hw, b.c.y + s * hl + c * hw},
                      {b.c.x - c * hl - s * hw, b.c.y - s * hl + c * hw},
                      {b.c.x - c * hl + s * hw, b.c.y - s * hl - c * hw},
                      {b.c.x + c * hl + s * hw, b.c.y + s * hl - c * hw}};
  std::vector<Point> out;
  for (int e = 0; e < 4; ++e) {
    const Point p = k[e], q = k[(e + 1) % 4];
    for (int i = 0; i < per_edge; ++i) {
      const double t = static_cast<double>(i) / per_edge;
      out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
    }
  }
  return out;
}

// Overlap of two closed convex boxes by point containment: either one holds a
// boundary sample of the other.
inline bool box_overlap_oracle(const Box& a, const Box& b, int per_edge = 2000) {
  for (const Point& p : box_boundary_samples(a, per_edge)) {
    if (box_contains(b, p)) return true;
  }
  for (const Point& p : box_boundary_samples(b, per_edge)) {
    if (box_contains(a, p)) return true;
  }
  return false;
}

// Signed separation along the best separating axis: positive when disjoint,
// minus the smallest overlap otherwise. Used only to exclude near-contact
// pairs from oracle comparison.
inline double box_margin(const Box& a, const Box& b) {
  double best = -1e300;
  for (const Box* owner : {&a, &b}) {
    for (int k = 0; k < 2; ++k) {
      const double ang = owner->heading + k * 0.5 * kPi;
      const double ax = std::cos(ang), ay = std::sin(ang);
      auto project = [&](const Box& bx, double& lo, double& hi) {
        const double centre = bx.c.x * ax + bx.c.y * ay;
        const double r = 0.5 * bx.length * std::abs(std::cos(bx.heading - ang)) +
                         0.5 * bx.width * std::abs(std::sin(bx.heading - ang));
        lo = centre - r;
        hi = centre + r;
      };
      double alo, ahi, blo, bhi;
      project(a, alo, ahi);
      project(b, blo, bhi);
      best = std::max(best, std::max(blo - ahi, alo - bhi));
    }
  }
  return best;
}

inline Trajectory make_trajectory(std::vector<Point> pts, double dt = 0.1, int t0 = 0) {
  Trajectory t;
  t.points = std::move(pts);
  t.dt = dt;
  t.t0_index = t0;
  return t;
}

inline ControlSequence random_controls(std::mt19937_64& rng, int n, double a_max, double k_max, double dt = 0.1) {
  std::uniform_real_distribution<double> ua(-a_max, a_max), uk(-k_max, k_max);
  ControlSequence c;
  c.dt = dt;
  for (int i = 0; i < n; ++i) c.inputs.push_back({ua(rng), uk(rng)});
  return c;
}

// A left-turn scenario with randomised parameters; gap_s is kept away from
// zero so the clean futures do not collide.
inline Scenario random_left_turn(std::uint64_t seed, int H = 12, int T = 12) {
  std::mt19937_64 rng(seed * 7919 + 17);
  std::uniform_real_distribution<double> vt(4.0, 9.0), ve(7.0, 13.0), rr(6.0, 15.0), gap(2.5, 4.0);
  std::bernoulli_distribution sign(0.5);
  LeftTurnParams p;
  p.v_target = vt(rng);
  p.v_ego = ve(rng);
  p.turn_radius = rr(rng);
  p.gap_s = sign(rng) ? gap(rng) : -gap(rng);
  p.H = H;
  p.T = T;
  return generate_left_turn(p, seed, "s" + std::to_string(seed));
}

inline std::shared_ptr<const Predictor> default_predictor() {
  return PredictorRegistry::instance().create("kinematic", PredictorConfig{});
}

}  // namespace advtraj::fixtures
