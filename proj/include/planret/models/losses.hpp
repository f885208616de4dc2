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

// Training objectives as graph builders. Each returns a single-element Var so
// it can be fed straight into Graph::backward.

#include <span>

#include "planret/autodiff/graph.hpp"
#include "planret/models/model.hpp"

namespace planret::models {

/// Mean squared error over every element.
template <typename T>
ad::Var recon_loss(ad::Graph<T>& g, ad::Var reconstruction, ad::Var target);

/// Batch mean of 0.5 * sum_j (mu_j^2 + exp(logvar_j) - 1 - logvar_j).
template <typename T>
ad::Var kl_gauss(ad::Graph<T>& g, ad::Var mu, ad::Var logvar);

/// z = mu + exp(logvar / 2) * eps.
template <typename T>
ad::Var reparameterize(ad::Graph<T>& g, ad::Var mu, ad::Var logvar, ad::Var eps);

/// Median of the pairwise Euclidean distances within the pooled rows of x and
/// y. Falls back to 1 when every pooled point coincides.
double median_pairwise_distance(std::span<const double> x, std::span<const double> y,
                                std::size_t dim);

/// Biased RBF-kernel MMD estimate. A non-positive bandwidth selects the median
/// heuristic, computed from the current values and held constant.
template <typename T>
ad::Var mmd_rbf(ad::Graph<T>& g, ad::Var x, ad::Var y, double bandwidth = 0.0);

/// recon + (1 - alpha) * kl + (alpha + lambda - 1) * mmd.
template <typename T>
ad::Var infovae_loss(ad::Graph<T>& g, ad::Var recon, ad::Var kl, ad::Var mmd,
                     const LossWeights& w);

/// Batch mean of max(|a - p| - |a - n| + margin, 0).
template <typename T>
ad::Var triplet_loss(ad::Graph<T>& g, ad::Var anchor, ad::Var positive, ad::Var negative,
                     double margin);

/// Negative cosine similarity of p against stop_gradient(z), batch mean.
template <typename T>
ad::Var simsiam_loss(ad::Graph<T>& g, ad::Var p, ad::Var z);

/// Average of both directions: 0.5 * (D(p1, z2) + D(p2, z1)).
template <typename T>
ad::Var symmetric_simsiam_loss(ad::Graph<T>& g, ad::Var p1, ad::Var z1, ad::Var p2, ad::Var z2);

/// recon + beta * simsiam + gamma * triplet.
template <typename T>
ad::Var multitask_loss(ad::Graph<T>& g, ad::Var recon, ad::Var simsiam, ad::Var triplet,
                       double beta, double gamma);

}  // namespace planret::models
