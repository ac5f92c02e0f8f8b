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

// Scalar helpers shared by every templated kernel. Each function here has a
// plain-double overload; gradtape.hpp adds the taped counterparts, which are
// found through argument-dependent lookup when a kernel is instantiated with
// advtraj::Var.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace advtraj {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double value_of(double x) { return x; }

inline double norm2(double x, double y) { return std::sqrt(x * x + y * y); }

enum class Selection { min, max };

// Marks a value chosen by a min/max selection. Identity for doubles.
inline double mark_selected(double x, Selection) { return x; }

// Passes x through when lo <= x <= hi, otherwise returns the violated bound.
inline double clamp_pass(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// Offset k such that x - k * 2pi lies in (-pi, pi].
inline double wrap_offset(double x) {
  if (x > -kPi && x <= kPi) return 0.0;
  double k = std::floor((x + kPi) / kTwoPi);
  double r = x - k * kTwoPi;
  if (r <= -kPi) k -= 1.0;
  if (r > kPi) k += 1.0;
  return k * kTwoPi;
}

// Wraps an angle to (-pi, pi]. Subtracts a constant, so derivatives pass
// through unchanged.
template <class S>
S wrap_angle(const S& a) {
  const double off = wrap_offset(value_of(a));
  if (off == 0.0) return a;
  return a - off;
}

// Index of the smallest (largest) element; ties go to the lowest index.
template <class S>
std::size_t arg_select(const std::vector<S>& xs, Selection which) {
  if (xs.empty()) throw std::invalid_argument("arg_select: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double v = value_of(xs[i]);
    const double b = value_of(xs[best]);
    if (which == Selection::min ? v < b : v > b) best = i;
  }
  return best;
}

template <class S>
S select_min(const std::vector<S>& xs) {
  return mark_selected(xs[arg_select(xs, Selection::min)], Selection::min);
}

template <class S>
S select_max(const std::vector<S>& xs) {
  return mark_selected(xs[arg_select(xs, Selection::max)], Selection::max);
}

}  // namespace advtraj
