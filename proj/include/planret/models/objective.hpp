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

// The per-kind training objective. Training assembles the inputs; gradient
// checks reuse the exact same graph.

#include <optional>
#include <utility>
#include <vector>

#include "planret/autodiff/graph.hpp"
#include "planret/models/model.hpp"

namespace planret::models {

template <typename T>
struct ObjectiveInputs {
  ad::Tensor<T> anchor;       // anatomy channels, (N, C, D, H, W)
  ad::Tensor<T> transformed;  // dose-variant channels; simsiam and multitask
  ad::Tensor<T> positive;     // siamese_triplet and multitask
  ad::Tensor<T> negative;
  ad::Tensor<T> eps;    // info_vae reparameterization noise, (N, M)
  ad::Tensor<T> prior;  // info_vae prior samples, (N, M)
  // Values for the detached projections of the anatomy and dose views. When
  // set they stand in for the live stop-gradient operands, so a finite
  // difference sees the same frozen targets that backward does.
  std::optional<ad::Tensor<T>> frozen_target1;
  std::optional<ad::Tensor<T>> frozen_target2;
};

struct ObjectiveTerms {
  ad::Var total;
  std::optional<ad::Var> recon;
  std::optional<ad::Var> kl;
  std::optional<ad::Var> mmd;
  std::optional<ad::Var> triplet;
  std::optional<ad::Var> simsiam;
  // Live projections of the two views, exposed for freezing.
  std::optional<ad::Var> projection1;
  std::optional<ad::Var> projection2;
};

/// vanilla: recon. info_vae: recon + (1 - a) KL + (a + l - 1) MMD.
/// siamese_triplet: triplet. simsiam: negative cosine of the predictor output
/// against the stop-gradient projection of the dose view. multitask: recon +
/// beta simsiam + gamma triplet, with the anchor embedding shared.
template <typename T>
ObjectiveTerms build_objective(ad::Graph<T>& g, Model<T>& model, const ObjectiveInputs<T>& in,
                               const LossWeights& w);

/// The total expressed as coefficients times unweighted terms, in a fixed
/// order per kind.
std::vector<std::pair<ad::Var, double>> weighted_terms(ModelKind kind, const ObjectiveTerms& t,
                                                       const LossWeights& w);

/// Tensors the kind reads from ObjectiveInputs.
bool needs_transformed(ModelKind kind);
bool needs_triplets(ModelKind kind);
bool needs_noise(ModelKind kind);

}  // namespace planret::models
