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

// Reverse-mode differentiation over the small scalar vocabulary used by the
// dynamics, predictor, objectives and barriers.
//
// A Tape records one node per operation: the operation tag, up to two parent
// node indices and the local partial derivatives with respect to them. The
// primal value of every node is computed with exactly the same double
// expression the plain-double kernels use, so a recorded evaluation is
// bitwise identical to an untaped one.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "advtraj/scalar.hpp"

namespace advtraj {

enum class TapeOp : std::uint8_t {
  leaf,
  add,
  sub,
  mul,
  div,
  sin,
  cos,
  atan2,
  sqrt,
  ln,
  norm2,
  min_select,
  max_select,
  clamp_pass,
};

struct TapeNode {
  TapeOp op = TapeOp::leaf;
  std::array<std::int32_t, 2> parents{-1, -1};
  std::array<double, 2> partials{0.0, 0.0};
  double value = 0.0;
};

class Var;

class Tape {
 public:
  Tape() { nodes_.reserve(1 << 14); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(double value);
  std::vector<Var> variables(std::span<const double> values);

  std::int32_t push(TapeOp op, double value, std::int32_t p0 = -1, double d0 = 0.0,
                    std::int32_t p1 = -1, double d1 = 0.0) {
    nodes_.push_back(TapeNode{op, {p0, p1}, {d0, d1}, value});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::size_t size() const { return nodes_.size(); }
  const TapeNode& node(std::size_t i) const { return nodes_[i]; }
  void clear() { nodes_.clear(); }

  // Adjoints of every node for the scalar root. The returned buffer is
  // freshly zero-initialised on each call.
  std::vector<double> backward(const Var& root) const;

 private:
  std::vector<TapeNode> nodes_;
};

class Var {
 public:
  Var() = default;
  // A constant: not recorded, carries no gradient.
  explicit Var(double value) : value_(value) {}
  Var(Tape* tape, std::int32_t index, double value) : tape_(tape), index_(index), value_(value) {}

  double value() const { return value_; }
  std::int32_t index() const { return index_; }
  Tape* tape() const { return tape_; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator+=(double o);
  Var& operator-=(double o);
  Var& operator*=(double o);

 private:
  Tape* tape_ = nullptr;
  std::int32_t index_ = -1;
  double value_ = 0.0;
};

inline Var Tape::variable(double value) { return Var(this, push(TapeOp::leaf, value), value); }

inline std::vector<Var> Tape::variables(std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(variable(v));
  return out;
}

inline std::vector<double> Tape::backward(const Var& root) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  if (root.tape() != this || root.index() < 0) throw std::invalid_argument("backward: root is not on this tape");
  adj[static_cast<std::size_t>(root.index())] = 1.0;
  for (std::int32_t i = root.index(); i >= 0; --i) {
    const double a = adj[static_cast<std::size_t>(i)];
    if (a == 0.0) continue;
    const TapeNode& n = nodes_[static_cast<std::size_t>(i)];
    if (n.parents[0] >= 0) adj[static_cast<std::size_t>(n.parents[0])] += a * n.partials[0];
    if (n.parents[1] >= 0) adj[static_cast<std::size_t>(n.parents[1])] += a * n.partials[1];
  }
  return adj;
}

inline double value_of(const Var& x) { return x.value(); }

namespace detail {

inline Tape* common_tape(const Var& a, const Var& b) {
  Tape* t = a.tape() ? a.tape() : b.tape();
  if (a.tape() && b.tape() && a.tape() != b.tape()) throw std::logic_error("Var operands live on different tapes");
  return t;
}

inline Var unary(const Var& x, TapeOp op, double value, double dx) {
  if (!x.tape()) return Var(nullptr, -1, value);
  return Var(x.tape(), x.tape()->push(op, value, x.index(), dx), value);
}

inline Var binary(const Var& a, const Var& b, TapeOp op, double value, double da, double db) {
  Tape* t = common_tape(a, b);
  if (!t) return Var(nullptr, -1, value);
  return Var(t, t->push(op, value, a.index(), da, b.index(), db), value);
}

}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  return detail::binary(a, b, TapeOp::add, a.value() + b.value(), 1.0, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::binary(a, b, TapeOp::sub, a.value() - b.value(), 1.0, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::binary(a, b, TapeOp::mul, a.value() * b.value(), b.value(), a.value());
}
inline Var operator/(const Var& a, const Var& b) {
  const double q = a.value() / b.value();
  return detail::binary(a, b, TapeOp::div, q, 1.0 / b.value(), -q / b.value());
}

inline Var operator+(const Var& a, double b) { return detail::unary(a, TapeOp::add, a.value() + b, 1.0); }
inline Var operator+(double a, const Var& b) { return detail::unary(b, TapeOp::add, a + b.value(), 1.0); }
inline Var operator-(const Var& a, double b) { return detail::unary(a, TapeOp::sub, a.value() - b, 1.0); }
inline Var operator-(double a, const Var& b) { return detail::unary(b, TapeOp::sub, a - b.value(), -1.0); }
inline Var operator*(const Var& a, double b) { return detail::unary(a, TapeOp::mul, a.value() * b, b); }
inline Var operator*(double a, const Var& b) { return detail::unary(b, TapeOp::mul, a * b.value(), a); }
inline Var operator/(const Var& a, double b) { return detail::unary(a, TapeOp::div, a.value() / b, 1.0 / b); }
inline Var operator/(double a, const Var& b) {
  const double q = a / b.value();
  return detail::unary(b, TapeOp::div, q, -q / b.value());
}
inline Var operator-(const Var& a) { return detail::unary(a, TapeOp::sub, -a.value(), -1.0); }

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator+=(double o) { return *this = *this + o; }
inline Var& Var::operator-=(double o) { return *this = *this - o; }
inline Var& Var::operator*=(double o) { return *this = *this * o; }

inline Var sin(const Var& x) { return detail::unary(x, TapeOp::sin, std::sin(x.value()), std::cos(x.value())); }
inline Var cos(const Var& x) { return detail::unary(x, TapeOp::cos, std::cos(x.value()), -std::sin(x.value())); }

inline Var sqrt(const Var& x) {
  const double r = std::sqrt(x.value());
  return detail::unary(x, TapeOp::sqrt, r, r > 0.0 ? 0.5 / r : 0.0);
}

inline Var log(const Var& x) { return detail::unary(x, TapeOp::ln, std::log(x.value()), 1.0 / x.value()); }

// Derivative at the origin is defined as zero.
inline Var atan2(const Var& y, const Var& x) {
  const double r2 = x.value() * x.value() + y.value() * y.value();
  const double dy = r2 > 0.0 ? x.value() / r2 : 0.0;
  const double dx = r2 > 0.0 ? -y.value() / r2 : 0.0;
  return detail::binary(y, x, TapeOp::atan2, std::atan2(y.value(), x.value()), dy, dx);
}

// Euclidean norm of (x, y); derivative at the origin is defined as zero.
inline Var norm2(const Var& x, const Var& y) {
  const double n = std::sqrt(x.value() * x.value() + y.value() * y.value());
  const double dx = n > 0.0 ? x.value() / n : 0.0;
  const double dy = n > 0.0 ? y.value() / n : 0.0;
  return detail::binary(x, y, TapeOp::norm2, n, dx, dy);
}

inline Var norm2(const Var& x, double y) { return norm2(x, Var(nullptr, -1, y)); }

inline Var mark_selected(const Var& x, Selection which) {
  return detail::unary(x, which == Selection::min ? TapeOp::min_select : TapeOp::max_select, x.value(), 1.0);
}

// Gradient passes only when the input is strictly inside [lo, hi].
inline Var clamp_pass(const Var& x, double lo, double hi) {
  const double v = x.value();
  const double out = v < lo ? lo : (v > hi ? hi : v);
  return detail::unary(x, TapeOp::clamp_pass, out, (v < lo || v > hi) ? 0.0 : 1.0);
}

// Value and gradient of f at x, where f is callable with std::vector<Var>.
struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

template <class F>
ValueAndGradient value_and_gradient(F&& f, std::span<const double> x) {
  Tape tape;
  std::vector<Var> leaves = tape.variables(x);
  const Var root = f(leaves);
  ValueAndGradient out;
  out.value = root.value();
  out.gradient.assign(x.size(), 0.0);
  if (root.tape() == nullptr) return out;
  const std::vector<double> adj = tape.backward(root);
  for (std::size_t i = 0; i < leaves.size(); ++i) out.gradient[i] = adj[static_cast<std::size_t>(leaves[i].index())];
  return out;
}

// Central-difference gradient of a double-valued f.
template <class F>
std::vector<double> central_difference(F&& f, std::span<const double> x, double h = 1e-5) {
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = xp[i];
    xp[i] = orig + h;
    const double fp = f(xp);
    xp[i] = orig - h;
    const double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Max over coordinates of |taped - finite difference| / max(1, |finite difference|).
// f must be callable with both std::vector<double> and std::vector<Var>.
template <class F>
double finite_diff_check(F&& f, std::span<const double> x0, double h = 1e-5) {
  const ValueAndGradient taped = value_and_gradient(f, x0);
  const std::vector<double> fd = central_difference([&](const std::vector<double>& x) { return f(x); }, x0, h);
  double worst = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    worst = std::max(worst, std::abs(taped.gradient[i] - fd[i]) / std::max(1.0, std::abs(fd[i])));
  }
  return worst;
}

}  // namespace advtraj
