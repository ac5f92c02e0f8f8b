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

// The model under attack. Predictor is the extension point; the built-in
// kinematic surrogate extrapolates the recent control actions of the target
// with a fixed set of reparameterised noise offsets per sample.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "advtraj/core.hpp"
#include "advtraj/dynamics.hpp"
#include "advtraj/gradtape.hpp"

namespace advtraj {

struct PredictorConfig {
  int K = 100;
  double noise_scale_a = 0.5;
  double noise_scale_kappa = 0.01;
  int smoothing_window = 4;
  std::uint64_t seed = 0;

  void validate() const {
    if (K < 1) throw ConfigError("predictor: K must be >= 1");
    if (noise_scale_a < 0.0 || noise_scale_kappa < 0.0) throw ConfigError("predictor: noise scales must be >= 0");
    if (smoothing_window < 2) throw ConfigError("predictor: smoothing_window must be >= 2");
  }
};

class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::string name() const = 0;

  // False when the predictor cannot be evaluated on the tape; the attack then
  // estimates gradients with central differences.
  virtual bool differentiable() const { return true; }

  virtual PredictionSet predict(const Trajectory& past_target, const Trajectory& past_ego, int horizon) const = 0;

  virtual BasicPredictionSet<Var> predict(const BasicTrajectory<Var>& /*past_target*/, const Trajectory& /*past_ego*/,
                                          int /*horizon*/) const {
    throw std::logic_error("predictor '" + name() + "' is gradient-free");
  }
};

// Pointwise mean over samples.
template <class S>
BasicTrajectory<S> predict_mean(const BasicPredictionSet<S>& pred) {
  if (pred.samples.empty()) throw std::invalid_argument("predict_mean: empty prediction set");
  BasicTrajectory<S> mean = pred.samples.front();
  const double inv_k = 1.0 / static_cast<double>(pred.K());
  for (std::size_t t = 0; t < mean.size(); ++t) {
    S sx = pred.samples[0][t].x;
    S sy = pred.samples[0][t].y;
    for (std::size_t k = 1; k < pred.K(); ++k) {
      sx = sx + pred.samples[k][t].x;
      sy = sy + pred.samples[k][t].y;
    }
    mean[t] = {sx * inv_k, sy * inv_k};
  }
  return mean;
}

class KinematicPredictor final : public Predictor {
 public:
  explicit KinematicPredictor(PredictorConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937_64 rng(cfg_.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    offsets_.reserve(static_cast<std::size_t>(cfg_.K));
    for (int k = 0; k < cfg_.K; ++k) {
      const double ea = normal(rng);
      const double ek = normal(rng);
      offsets_.push_back({ea * cfg_.noise_scale_a, ek * cfg_.noise_scale_kappa});
    }
  }

  std::string name() const override { return "kinematic"; }
  const PredictorConfig& config() const { return cfg_; }
  const std::vector<ControlInput>& offsets() const { return offsets_; }

  PredictionSet predict(const Trajectory& past_target, const Trajectory&, int horizon) const override {
    return run(past_target, horizon);
  }

  BasicPredictionSet<Var> predict(const BasicTrajectory<Var>& past_target, const Trajectory&,
                                  int horizon) const override {
    return run(past_target, horizon);
  }

 private:
  template <class S>
  BasicPredictionSet<S> run(const BasicTrajectory<S>& past, int horizon) const {
    if (past.size() < 3) throw std::invalid_argument("predict: past needs at least 3 points");
    if (horizon < 1) throw std::invalid_argument("predict: horizon must be >= 1");
    const BasicExtraction<S> ext = extract_controls(past);
    const std::size_t n = ext.controls.size();
    const std::size_t window = std::min<std::size_t>(static_cast<std::size_t>(cfg_.smoothing_window), n);
    S a_sum = ext.controls[n - window].a;
    S k_sum = ext.controls[n - window].kappa;
    for (std::size_t i = n - window + 1; i < n; ++i) {
      a_sum = a_sum + ext.controls[i].a;
      k_sum = k_sum + ext.controls[i].kappa;
    }
    const S a_nom = a_sum / static_cast<double>(window);
    const S k_nom = k_sum / static_cast<double>(window);

    BasicPredictionSet<S> out;
    out.samples.reserve(offsets_.size());
    for (const ControlInput& off : offsets_) {
      const BasicControlInput<S> u{a_nom + off.a, k_nom + off.kappa};
      BasicTrajectory<S> sample;
      sample.dt = past.dt;
      sample.t0_index = 1;
      sample.points.reserve(static_cast<std::size_t>(horizon));
      BasicAgentState<S> s = ext.states.back();
      for (int t = 0; t < horizon; ++t) {
        s = phi_forward(s, u, past.dt);
        sample.points.push_back({s.x, s.y});
      }
      out.samples.push_back(std::move(sample));
    }
    return out;
  }

  PredictorConfig cfg_;
  std::vector<ControlInput> offsets_;
};

// Wraps another predictor and hides its taped path.
class GradientFreePredictor final : public Predictor {
 public:
  explicit GradientFreePredictor(std::shared_ptr<const Predictor> inner) : inner_(std::move(inner)) {}

  std::string name() const override { return inner_->name() + "-fd"; }
  bool differentiable() const override { return false; }

  PredictionSet predict(const Trajectory& past_target, const Trajectory& past_ego, int horizon) const override {
    return inner_->predict(past_target, past_ego, horizon);
  }

 private:
  std::shared_ptr<const Predictor> inner_;
};

inline bool bitwise_equal(const PredictionSet& a, const PredictionSet& b) {
  if (a.K() != b.K()) return false;
  for (std::size_t k = 0; k < a.K(); ++k) {
    if (a.samples[k].size() != b.samples[k].size()) return false;
    for (std::size_t t = 0; t < a.samples[k].size(); ++t) {
      if (!(a.samples[k][t] == b.samples[k][t])) return false;
    }
  }
  return true;
}

// Double-call check of the determinism contract.
inline bool is_deterministic(const Predictor& p, const Trajectory& past_target, const Trajectory& past_ego,
                             int horizon) {
  return bitwise_equal(p.predict(past_target, past_ego, horizon), p.predict(past_target, past_ego, horizon));
}

class PredictorRegistry {
 public:
  using Factory = std::function<std::shared_ptr<const Predictor>(const PredictorConfig&)>;

  static PredictorRegistry& instance() {
    static PredictorRegistry registry = with_builtins();
    return registry;
  }

  void add(const std::string& name, Factory factory) { factories_[name] = std::move(factory); }

  bool contains(const std::string& name) const { return factories_.count(name) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, f] : factories_) out.push_back(n);
    return out;
  }

  std::shared_ptr<const Predictor> create(const std::string& name, const PredictorConfig& cfg) const {
    auto it = factories_.find(name);
    if (it == factories_.end()) throw ConfigError("unknown predictor '" + name + "'");
    return it->second(cfg);
  }

 private:
  static PredictorRegistry with_builtins() {
    PredictorRegistry r;
    r.add("kinematic", [](const PredictorConfig& c) { return std::make_shared<const KinematicPredictor>(c); });
    r.add("kinematic-fd", [](const PredictorConfig& c) {
      return std::make_shared<const GradientFreePredictor>(std::make_shared<const KinematicPredictor>(c));
    });
    return r;
  }

  std::map<std::string, Factory> factories_;
};

}  // namespace advtraj
