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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "planret/autodiff/graph.hpp"

namespace planret::ad {

/// Builds the function under test from leaf variables, one per input tensor.
using GraphBuilder = std::function<Var(Graph<double>&, std::span<const Var>)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_element = 0;
  std::size_t elements_checked = 0;
  /// Elements left out because the two one-sided differences disagreed,
  /// i.e. the step straddled a kink of a piecewise-linear op.
  std::size_t kinks_skipped = 0;
};

/// Compares reverse-mode gradients of sum(r * f(inputs)), r a seeded random
/// projection, against central finite differences. Relative error per element
/// is |a - b| / max(|a|, |b|, 1e-8).
GradCheckReport grad_check(const GraphBuilder& build, const std::vector<Tensor<double>>& inputs,
                           std::uint64_t seed, double step = 1e-5);

/// Canonical random instance of one catalog op (extents <= 6 per axis).
/// For stop_gradient the reference derivative is zero by definition, so the
/// report holds the largest absolute pullback value instead.
GradCheckReport grad_check(OpKind kind, std::uint64_t seed);

/// Every differentiable op in the layer catalog.
std::vector<OpKind> layer_catalog();

}  // namespace planret::ad
