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

#include "planret/models/objective.hpp"

#include <string>

#include "planret/error.hpp"
#include "planret/models/losses.hpp"

namespace planret::models {

bool needs_transformed(ModelKind kind) { return uses_dose_branch(kind); }
bool needs_triplets(ModelKind kind) {
  return kind == ModelKind::kSiameseTriplet || kind == ModelKind::kMultitask;
}
bool needs_noise(ModelKind kind) { return kind == ModelKind::kInfoVae; }

std::vector<std::pair<ad::Var, double>> weighted_terms(ModelKind kind, const ObjectiveTerms& t,
                                                       const LossWeights& w) {
  switch (kind) {
    case ModelKind::kVanillaAutoencoder: return {{*t.recon, 1.0}};
    case ModelKind::kInfoVae:
      return {{*t.recon, 1.0}, {*t.kl, 1.0 - w.alpha}, {*t.mmd, w.alpha + w.lambda - 1.0}};
    case ModelKind::kSiameseTriplet: return {{*t.triplet, 1.0}};
    case ModelKind::kSimSiam: return {{*t.simsiam, 1.0}};
    case ModelKind::kMultitask:
      return {{*t.recon, 1.0}, {*t.simsiam, w.beta}, {*t.triplet, w.gamma}};
  }
  return {};
}

namespace {

template <typename T>
void require(const ad::Tensor<T>& t, const char* what, ModelKind kind) {
  if (t.empty())
    throw ConfigError(std::string(to_string(kind)) + " objective requires the " + what +
                      " input");
}

}  // namespace

template <typename T>
ObjectiveTerms build_objective(ad::Graph<T>& g, Model<T>& model, const ObjectiveInputs<T>& in,
                               const LossWeights& w) {
  const ModelKind kind = model.kind();
  require(in.anchor, "anchor", kind);
  const ad::Var x = g.constant(in.anchor);
  ObjectiveTerms t;
  switch (kind) {
    case ModelKind::kVanillaAutoencoder: {
      t.recon = recon_loss(g, model.decode(g, model.encode(g, x)), x);
      t.total = *t.recon;
      break;
    }
    case ModelKind::kInfoVae: {
      require(in.eps, "eps", kind);
      require(in.prior, "prior", kind);
      const auto vae = model.encode_vae(g, x);
      const ad::Var z = reparameterize(g, vae.mu, vae.logvar, g.constant(in.eps));
      t.recon = recon_loss(g, model.decode(g, z), x);
      t.kl = kl_gauss(g, vae.mu, vae.logvar);
      t.mmd = mmd_rbf(g, z, g.constant(in.prior), w.mmd_bandwidth);
      t.total = infovae_loss(g, *t.recon, *t.kl, *t.mmd, w);
      break;
    }
    case ModelKind::kSiameseTriplet: {
      require(in.positive, "positive", kind);
      require(in.negative, "negative", kind);
      const ad::Var za = model.encode(g, x);
      const ad::Var zp = model.encode(g, g.constant(in.positive));
      const ad::Var zn = model.encode(g, g.constant(in.negative));
      t.triplet = triplet_loss(g, za, zp, zn, w.margin);
      t.total = *t.triplet;
      break;
    }
    case ModelKind::kSimSiam:
    case ModelKind::kMultitask: {
      require(in.transformed, "transformed", kind);
      const ad::Var z1 = model.encode(g, x);
      const ad::Var z2 = model.encode(g, g.constant(in.transformed));
      const ad::Var e1 = model.project(g, z1);
      const ad::Var e2 = model.project(g, z2);
      t.projection1 = e1;
      t.projection2 = e2;
      const ad::Var target1 = in.frozen_target1 ? g.constant(*in.frozen_target1) : e1;
      const ad::Var target2 = in.frozen_target2 ? g.constant(*in.frozen_target2) : e2;
      const ad::Var p1 = model.predict(g, e1);
      if (w.symmetric_simsiam) {
        t.simsiam = symmetric_simsiam_loss(g, p1, target1, model.predict(g, e2), target2);
      } else {
        t.simsiam = simsiam_loss(g, p1, target2);
      }
      if (kind == ModelKind::kSimSiam) {
        t.total = *t.simsiam;
        break;
      }
      require(in.positive, "positive", kind);
      require(in.negative, "negative", kind);
      t.recon = recon_loss(g, model.decode(g, z1), x);
      const ad::Var zp = model.encode(g, g.constant(in.positive));
      const ad::Var zn = model.encode(g, g.constant(in.negative));
      t.triplet = triplet_loss(g, z1, zp, zn, w.margin);
      t.total = multitask_loss(g, *t.recon, *t.simsiam, *t.triplet, w.beta, w.gamma);
      break;
    }
  }
  return t;
}

template ObjectiveTerms build_objective(ad::Graph<float>&, Model<float>&,
                                        const ObjectiveInputs<float>&, const LossWeights&);
template ObjectiveTerms build_objective(ad::Graph<double>&, Model<double>&,
                                        const ObjectiveInputs<double>&, const LossWeights&);

}  // namespace planret::models
