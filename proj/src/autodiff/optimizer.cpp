// Copyright 2026 The planret Authors.
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

#include "planret/autodiff/optimizer.hpp"

#include <cmath>

#include "planret/error.hpp"

namespace planret::ad {

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

template <typename T>
void Optimizer<T>::step(std::span<Parameter<T>> params) {
  for (const auto& p : params) {
    if (!p.grad.empty() && p.grad.shape() != p.value.shape()) {
      throw ShapeError("optimizer: gradient " + shape_to_string(p.grad.shape()) +
                       " does not match parameter '" + p.name + "' " +
                       shape_to_string(p.value.shape()));
    }
  }
  ++t_;
  if (config_.kind == OptimizerKind::kSgd) {
    for (auto& p : params) {
      if (p.grad.empty()) continue;
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        p.value[i] = static_cast<T>(p.value[i] - config_.lr * p.grad[i]);
      }
    }
    return;
  }

  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0);
      v_.emplace_back(p.value.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw ShapeError("optimizer: parameter count changed from " + std::to_string(m_.size()) +
                     " to " + std::to_string(params.size()));
  }
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (m_[k].size() != p.value.size()) {
      throw ShapeError("optimizer: moment state does not match parameter '" + p.name + "'");
    }
    if (p.grad.empty()) continue;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m_[k][i] = config_.beta1 * m_[k][i] + (1.0 - config_.beta1) * g;
      v_[k][i] = config_.beta2 * v_[k][i] + (1.0 - config_.beta2) * g * g;
      const double mhat = m_[k][i] / c1;
      const double vhat = v_[k][i] / c2;
      p.value[i] = static_cast<T>(p.value[i] - config_.lr * mhat / (std::sqrt(vhat) + config_.eps));
    }
  }
}

template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace planret::ad
