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

#include "planret/models/loss_check.hpp"

#include <algorithm>
#include <cmath>

#include "planret/models/losses.hpp"
#include "planret/models/objective.hpp"
#include "planret/rng.hpp"

namespace planret::models {
namespace {

using ad::Graph;
using ad::Shape;
using ad::Tensor;
using ad::Var;

Tensor<double> normal(const Shape& shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(shape);
  for (auto& v : t.data()) v = scale * rng.normal();
  return t;
}

Tensor<double> uniform(const Shape& shape, Rng& rng) {
  Tensor<double> t(shape);
  for (auto& v : t.data()) v = rng.uniform();
  return t;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kRecon: return "recon";
    case LossKind::kKl: return "kl_gauss";
    case LossKind::kReparameterize: return "reparameterize";
    case LossKind::kMmd: return "mmd_rbf";
    case LossKind::kInfoVae: return "infovae";
    case LossKind::kTriplet: return "triplet";
    case LossKind::kSimSiam: return "simsiam";
    case LossKind::kSymmetricSimSiam: return "symmetric_simsiam";
    case LossKind::kMultitask: return "multitask";
  }
  return "unknown";
}

std::vector<LossKind> loss_catalog() {
  return {LossKind::kRecon,   LossKind::kKl,      LossKind::kReparameterize,
          LossKind::kMmd,     LossKind::kInfoVae, LossKind::kTriplet,
          LossKind::kSimSiam, LossKind::kSymmetricSimSiam, LossKind::kMultitask};
}

ad::GradCheckReport loss_grad_check(LossKind kind, std::uint64_t seed) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
  LossWeights w;
  w.alpha = 0.3;
  w.lambda = 4.0;
  // Large enough that every hinge is active; the inactive branch is flat.
  const double margin = 10.0;

  switch (kind) {
    case LossKind::kRecon:
      return ad::grad_check(
          [](Graph<double>& g, std::span<const Var> v) { return recon_loss(g, v[0], v[1]); },
          {normal({2, 2, 3, 2, 2}, rng), normal({2, 2, 3, 2, 2}, rng)}, seed);
    case LossKind::kKl:
      return ad::grad_check(
          [](Graph<double>& g, std::span<const Var> v) { return kl_gauss(g, v[0], v[1]); },
          {normal({3, 4}, rng), normal({3, 4}, rng, 0.5)}, seed);
    case LossKind::kReparameterize:
      return ad::grad_check(
          [](Graph<double>& g, std::span<const Var> v) {
            return reparameterize(g, v[0], v[1], v[2]);
          },
          {normal({3, 4}, rng), normal({3, 4}, rng, 0.5), normal({3, 4}, rng)}, seed);
    case LossKind::kMmd: {
      auto x = normal({5, 3}, rng);
      auto y = normal({4, 3}, rng, 1.5);
      const double bw = median_pairwise_distance(x.data(), y.data(), 3);
      return ad::grad_check(
          [bw](Graph<double>& g, std::span<const Var> v) { return mmd_rbf(g, v[0], v[1], bw); },
          {std::move(x), std::move(y)}, seed);
    }
    case LossKind::kInfoVae: {
      std::vector<Tensor<double>> in{normal({2, 2, 2, 2, 2}, rng), uniform({2, 2, 2, 2, 2}, rng),
                                     normal({4, 3}, rng), normal({4, 3}, rng, 0.5),
                                     normal({4, 3}, rng), normal({4, 3}, rng)};
      return ad::grad_check(
          [w](Graph<double>& g, std::span<const Var> v) {
            const Var z = reparameterize(g, v[2], v[3], v[4]);
            return infovae_loss(g, recon_loss(g, v[0], v[1]), kl_gauss(g, v[2], v[3]),
                                mmd_rbf(g, z, v[5], 1.7), w);
          },
          in, seed);
    }
    case LossKind::kTriplet:
      return ad::grad_check(
          [margin](Graph<double>& g, std::span<const Var> v) {
            return triplet_loss(g, v[0], v[1], v[2], margin);
          },
          {normal({4, 5}, rng), normal({4, 5}, rng), normal({4, 5}, rng)}, seed);
    case LossKind::kSimSiam: {
      const auto z = normal({4, 5}, rng);
      return ad::grad_check(
          [z](Graph<double>& g, std::span<const Var> v) {
            return simsiam_loss(g, v[0], g.constant(z));
          },
          {normal({4, 5}, rng)}, seed);
    }
    case LossKind::kSymmetricSimSiam: {
      const auto z1 = normal({3, 4}, rng);
      const auto z2 = normal({3, 4}, rng);
      return ad::grad_check(
          [z1, z2](Graph<double>& g, std::span<const Var> v) {
            return symmetric_simsiam_loss(g, v[0], g.constant(z1), v[1], g.constant(z2));
          },
          {normal({3, 4}, rng), normal({3, 4}, rng)}, seed);
    }
    case LossKind::kMultitask: {
      const auto z = normal({3, 4}, rng);
      std::vector<Tensor<double>> in{normal({3, 2, 2, 2, 2}, rng), uniform({3, 2, 2, 2, 2}, rng),
                                     normal({3, 4}, rng), normal({3, 4}, rng),
                                     normal({3, 4}, rng), normal({3, 4}, rng)};
      return ad::grad_check(
          [z, w, margin](Graph<double>& g, std::span<const Var> v) {
            return multitask_loss(g, recon_loss(g, v[0], v[1]),
                                  simsiam_loss(g, v[2], g.constant(z)),
                                  triplet_loss(g, v[3], v[4], v[5], margin), w.beta, w.gamma);
          },
          in, seed);
    }
  }
  return {};
}

EncoderConfig tiny_encoder_config() {
  EncoderConfig c;
  c.widths = {4, 4};
  c.groups = 2;
  c.embedding_dim = 4;
  c.input = {8, 8, 8};
  return c;
}

ad::GradCheckReport model_grad_check(ModelKind kind, std::uint64_t seed,
                                     std::size_t per_parameter, double step) {
  const EncoderConfig config = tiny_encoder_config();
  Model<double> model(kind, config, seed);
  Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(kind)));
  // Perturb the neutral norm affine so its gradients are generic.
  for (auto& p : model.parameters()) {
    for (auto& v : p.value.data()) v += 0.1 * rng.normal();
  }

  const std::int64_t n = 2;
  const Shape vol{n, config.in_channels, config.input.nz, config.input.ny, config.input.nx};
  const Shape emb{n, config.embedding_dim};
  ObjectiveInputs<double> in;
  in.anchor = uniform(vol, rng);
  if (needs_transformed(kind)) in.transformed = uniform(vol, rng);
  if (needs_triplets(kind)) {
    in.positive = uniform(vol, rng);
    in.negative = uniform(vol, rng);
  }
  if (needs_noise(kind)) {
    in.eps = normal(emb, rng);
    in.prior = normal(emb, rng);
  }
  LossWeights w;
  w.alpha = 0.3;
  w.lambda = 4.0;
  // Inactive hinges are flat; a kink within one step is a measure-zero event.
  w.mmd_bandwidth = 1.5;

  {
    Graph<double> g;
    const ObjectiveTerms t = build_objective(g, model, in, w);
    if (t.projection1) {
      in.frozen_target1 = g.value(*t.projection1);
      in.frozen_target2 = g.value(*t.projection2);
    }
    model.zero_grad();
    g.backward(t.total);
  }
  // Terms are differenced separately and weighted afterwards, so a term that
  // does not depend on the perturbed element cancels exactly instead of
  // swamping a small weighted gradient with its rounding noise.
  auto terms_at = [&]() {
    Graph<double> g(false);
    const ObjectiveTerms t = build_objective(g, model, in, w);
    std::vector<std::pair<double, double>> out;
    for (const auto& [v, c] : weighted_terms(kind, t, w)) out.emplace_back(g.value(v).item(), c);
    return out;
  };
  auto slope = [](const std::vector<std::pair<double, double>>& hi,
                  const std::vector<std::pair<double, double>>& lo, double dx) {
    double s = 0.0;
    for (std::size_t i = 0; i < hi.size(); ++i) s += hi[i].second * (hi[i].first - lo[i].first);
    return s / dx;
  };

  ad::GradCheckReport report;
  for (std::size_t pi = 0; pi < model.parameters().size(); ++pi) {
    auto& p = model.parameters()[pi];
    std::vector<std::size_t> idx(p.value.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(std::min(idx.size(), per_parameter));
    for (std::size_t e : idx) {
      const double orig = p.value[e];
      const double xp = orig + step;
      const double xm = orig - step;
      const auto f0 = terms_at();
      p.value[e] = xp;
      const auto fp = terms_at();
      p.value[e] = xm;
      const auto fm = terms_at();
      p.value[e] = orig;
      const double ahead = slope(fp, f0, xp - orig);
      const double behind = slope(f0, fm, orig - xm);
      if (relative_error(ahead, behind) > 1e-3) {
        ++report.kinks_skipped;
        continue;
      }
      const double numeric = slope(fp, fm, xp - xm);
      // An exact analytic zero (a shift every branch sees alike) can only be
      // compared against the rounding floor of the difference quotient.
      const double err = p.grad[e] == 0.0 && std::abs(numeric) <= 1e-9
                             ? 0.0
                             : relative_error(p.grad[e], numeric);
      ++report.elements_checked;
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_input = pi;
        report.worst_element = e;
      }
    }
  }
  return report;
}

}  // namespace planret::models
