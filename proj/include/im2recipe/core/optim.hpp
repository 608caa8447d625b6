// Copyright 2026 The im2recipe Authors. All Rights Reserved.
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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "im2recipe/core/tensor.hpp"

namespace im2recipe {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Elementwise gradient clip; 0 disables.
  double clip = 0.0;
};

/// SGD or Adam over a set of Params. Frozen params are skipped entirely;
/// their Adam moments do not advance either.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {
    if (!(config_.learning_rate > 0.0)) throw ConfigError("optimizer: learning rate must be > 0");
  }

  const OptimizerConfig& config() const noexcept { return config_; }

  void step(std::span<Param* const> params) {
    for (const Param* p : params) {
      if (p->frozen) continue;
      if (!p->grad.all_finite()) throw TrainingDivergenceError("non-finite gradient in " + p->name);
    }
    ++t_;
    for (Param* p : params) {
      if (p->frozen) continue;
      auto value = p->value.data();
      auto grad = p->grad.data();
      if (config_.kind == OptimizerKind::kSgd) {
        for (std::size_t i = 0; i < value.size(); ++i) value[i] -= config_.learning_rate * clipped(grad[i]);
        continue;
      }
      Moments& m = moments_[p];
      if (m.first.size() != value.size()) {
        m.first.assign(value.size(), 0.0);
        m.second.assign(value.size(), 0.0);
        m.steps = 0;
      }
      ++m.steps;
      const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(m.steps));
      const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(m.steps));
      for (std::size_t i = 0; i < value.size(); ++i) {
        const double g = clipped(grad[i]);
        m.first[i] = config_.beta1 * m.first[i] + (1.0 - config_.beta1) * g;
        m.second[i] = config_.beta2 * m.second[i] + (1.0 - config_.beta2) * g * g;
        const double mhat = m.first[i] / bc1;
        const double vhat = m.second[i] / bc2;
        value[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
      }
    }
  }

  static void zero_grad(std::span<Param* const> params) {
    for (Param* p : params) p->zero_grad();
  }

  std::size_t steps() const noexcept { return t_; }

 private:
  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
    std::size_t steps = 0;
  };

  double clipped(double g) const {
    if (config_.clip <= 0.0) return g;
    return g > config_.clip ? config_.clip : (g < -config_.clip ? -config_.clip : g);
  }

  OptimizerConfig config_;
  std::size_t t_ = 0;
  std::unordered_map<const Param*, Moments> moments_;
};

}  // namespace im2recipe
