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

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace advtraj;
using advtraj::fixtures::make_trajectory;

namespace {

PredictionSet offset_set(const Trajectory& truth, const std::vector<Point>& offsets) {
  PredictionSet p;
  for (const Point& o : offsets) {
    Trajectory s = truth;
    for (Point& q : s.points) q = q + o;
    p.samples.push_back(s);
  }
  return p;
}

Trajectory line(int n, double y = 0.0) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({1.0 * i, y});
  return make_trajectory(pts);
}

}  // namespace

TEST(LossAde, Examples) {
  const Trajectory truth = line(2);
  EXPECT_EQ(loss_ade(truth, offset_set(truth, {{0, 0}})), 0.0);
  EXPECT_DOUBLE_EQ(loss_ade(truth, offset_set(truth, {{1, 0}})), -1.0);
  EXPECT_DOUBLE_EQ(loss_ade(truth, offset_set(truth, {{1, 0}, {0, 3}})), -2.0);
}

TEST(LossFde, Examples) {
  const Trajectory truth = line(4);
  EXPECT_EQ(loss_fde(truth, offset_set(truth, {{0, 0}})), 0.0);
  EXPECT_DOUBLE_EQ(loss_fde(truth, offset_set(truth, {{3, 4}})), -5.0);
  PredictionSet p = offset_set(truth, {{0, 0}});
  p.samples[0][1] = {40, 40};
  EXPECT_EQ(loss_fde(truth, p), 0.0);
}

TEST(LossCollisionFp, Examples) {
  const Trajectory ego = line(8);
  PredictionSet p;
  Trajectory s = line(8, 5.0);
  s[5] = {5.0, 2.0};
  p.samples.push_back(s);
  EXPECT_DOUBLE_EQ(loss_collision_fp(ego, p), 2.0);
  Trajectory doubled = ego;
  for (Point& q : doubled.points) q = {2 * q.x, 2 * q.y};
  PredictionSet pd;
  Trajectory sd = s;
  for (Point& q : sd.points) q = {2 * q.x, 2 * q.y};
  pd.samples.push_back(sd);
  EXPECT_DOUBLE_EQ(loss_collision_fp(doubled, pd), 4.0);
  p.samples.push_back(ego);
  EXPECT_DOUBLE_EQ(loss_collision_fp(ego, p), 1.0);
}

TEST(LossCollisionFn, Examples) {
  const Trajectory ego = line(6);
  const PredictionSet clean = offset_set(line(6, 10.0), {{0, 0}, {1, 1}});
  EXPECT_EQ(loss_collision_fn(ego, ego, clean, clean), 0.0);
  EXPECT_DOUBLE_EQ(loss_collision_fn(ego, line(6, 3.0), clean, clean), 3.0);
  const PredictionSet shifted = offset_set(line(6, 10.0), {{0.3, 0.4}, {1.3, 1.4}});
  EXPECT_NEAR(loss_collision_fn(ego, ego, shifted, clean), 0.5, 1e-12);
}

TEST(LossCollisionFn, GradientOnlyAtArgmin) {
  const Trajectory ego = line(5);
  const PredictionSet clean = offset_set(line(5, 10.0), {{0, 0}});
  std::vector<double> ys{3.0, 2.0, 1.0, 2.0, 3.0};
  auto vg = value_and_gradient(
      [&](const std::vector<Var>& y) {
        BasicTrajectory<Var> pert;
        for (int t = 0; t < 5; ++t) pert.points.push_back({Var(1.0 * t), y[t]});
        BasicPredictionSet<Var> pp;
        BasicTrajectory<Var> s;
        for (const Point& q : clean.samples[0].points) s.points.push_back({Var(q.x), Var(q.y)});
        pp.samples.push_back(s);
        return loss_collision_fn(ego, pert, pp, clean);
      },
      ys);
  EXPECT_EQ(vg.value, 1.0);
  EXPECT_EQ(vg.gradient, (std::vector<double>{0, 0, 1, 0, 0}));
}

TEST(ComposeTotalLoss, Examples) {
  EXPECT_EQ(compose_total_loss(1.5, {}), 1.5);
  EXPECT_NEAR(compose_total_loss(1.0, {0.1054}), 1.1054, 1e-15);
  const std::vector<double> x{0.2};
  const auto vg = value_and_gradient(
      [](const std::vector<Var>& v) { return compose_total_loss(v[0] * 2.0, {v[0] * v[0] * 7.0}, {0.0}); }, x);
  EXPECT_EQ(vg.gradient[0], 2.0);
}

TEST(Objectives, SignsAndTranslationInvariance) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-20, 20);
  const auto pred = fixtures::default_predictor();
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario s = fixtures::random_left_turn(40 + trial);
    const PredictionSet p = pred->predict(s.target_past, s.ego_past, 12);
    EXPECT_LE(loss_ade(s.target_future, p), 0.0);
    EXPECT_LE(loss_fde(s.target_future, p), 0.0);
    EXPECT_GE(loss_collision_fp(s.ego_future, p), 0.0);
    EXPECT_GE(loss_collision_fn(s.ego_future, s.target_future, p, p), 0.0);

    const Point shift{u(rng), u(rng)};
    auto moved = [&](Trajectory t) {
      for (Point& q : t.points) q = q + shift;
      return t;
    };
    PredictionSet pm = p;
    for (auto& smp : pm.samples) smp = moved(smp);
    EXPECT_NEAR(loss_ade(moved(s.target_future), pm), loss_ade(s.target_future, p), 1e-12);
    EXPECT_NEAR(loss_fde(moved(s.target_future), pm), loss_fde(s.target_future, p), 1e-12);
    EXPECT_NEAR(loss_collision_fp(moved(s.ego_future), pm), loss_collision_fp(s.ego_future, p), 1e-12);
    EXPECT_NEAR(loss_collision_fn(moved(s.ego_future), moved(s.target_future), pm, pm),
                loss_collision_fn(s.ego_future, s.target_future, p, p), 1e-12);
  }
}

TEST(Barriers, PointwiseDistances) {
  const Trajectory ref = line(11);
  EXPECT_EQ(d_time(Point{3, 0}, ref, 3), 0.0);
  EXPECT_DOUBLE_EQ(d_time(Point{3.3, 0.4}, ref, 3), 0.5);
  EXPECT_EQ(d_traj(Point{4.5, 0}, ref), 0.0);
  EXPECT_DOUBLE_EQ(d_traj(Point{5, 0.4}, ref), 0.4);
  EXPECT_DOUBLE_EQ(d_traj(Point{7, 0.4}, ref), 0.4);
}

TEST(Barriers, PointValues) {
  EXPECT_NEAR(barrier_point(0.0, 0.9), 0.1053605, 1e-7);
  EXPECT_EQ(barrier_point(-0.1, 0.9), 0.0);
  EXPECT_THROW(barrier_point(0.9, 0.9), InfeasibleError);
  double prev = barrier_point(0.0, 0.9);
  for (double d = 0.1; d < 0.9; d += 0.1) {
    const double b = barrier_point(d, 0.9);
    EXPECT_GT(b, prev);
    prev = b;
  }
  EXPECT_GT(barrier_point(0.9 - 1e-12, 0.9), 25.0);
}

TEST(Barriers, TrajectoryForms) {
  const Trajectory ref = line(12);
  EXPECT_DOUBLE_EQ(barrier_time(ref, ref, 0.9), -std::log(0.9));
  EXPECT_DOUBLE_EQ(barrier_traj(ref, ref, 0.9), -std::log(0.9));
  EXPECT_NEAR(barrier_time_traj(ref, ref, 0.9), -2.0 * std::log(0.9), 1e-15);
  EXPECT_NEAR(barrier_time_traj(ref, ref, 0.9), 0.2107, 1e-4);

  Trajectory lateral = ref;
  for (Point& q : lateral.points) q.y = 0.5;
  EXPECT_NEAR(barrier_time(lateral, ref, 0.9), -std::log(0.4), 1e-12);
  EXPECT_NEAR(barrier_traj(lateral, ref, 0.9), -std::log(0.4), 1e-12);

  Trajectory slid = ref;
  for (std::size_t i = 0; i + 1 < slid.size(); ++i) slid[i].x += 0.95;
  EXPECT_DOUBLE_EQ(barrier_traj(slid, ref, 0.9), -std::log(0.9));
  EXPECT_THROW(barrier_time(slid, ref, 0.9), InfeasibleError);
  EXPECT_NEAR(barrier_time_traj(slid, ref, 0.9), barrier_traj(slid, ref, 0.9) - std::log(0.9), 1e-15);

  Trajectory end_moved = ref;
  end_moved.points.back().x += 0.95;
  EXPECT_THROW(barrier_time_traj(end_moved, ref, 0.9), InfeasibleError);
  end_moved.points.back() = ref.points.back() + Point{0.0, 0.95};
  EXPECT_THROW(barrier_time_traj(end_moved, ref, 0.9), InfeasibleError);
}

TEST(Barriers, FiniteIffFeasibleAndMonotone) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const Scenario s = fixtures::random_left_turn(1);
  for (int trial = 0; trial < 50; ++trial) {
    Trajectory p = s.target_past;
    for (Point& q : p.points) q = q + Point{u(rng), u(rng)};
    BarrierConfig cfg;
    const double worst = max_constrained_distance(cfg, p, s.target_past, s.target_future, s.target_future);
    if (worst < 0.9) {
      EXPECT_TRUE(std::isfinite(barrier_time(p, s.target_past, 0.9)));
    } else {
      EXPECT_THROW(barrier_time(p, s.target_past, 0.9), InfeasibleError);
    }
  }
}
