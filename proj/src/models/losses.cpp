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

#include "planret/models/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "planret/error.hpp"

namespace planret::models {

template <typename T>
ad::Var recon_loss(ad::Graph<T>& g, ad::Var reconstruction, ad::Var target) {
  return g.mean_squared_error(reconstruction, target);
}

template <typename T>
ad::Var kl_gauss(ad::Graph<T>& g, ad::Var mu, ad::Var logvar) {
  const ad::Shape s = g.value(mu).shape();
  if (s.size() != 2) throw ShapeError("kl_gauss: expected (N, M), got " + ad::shape_to_string(s));
  const double n = static_cast<double>(s[0]);
  const double m = static_cast<double>(s[1]);
  const ad::Var terms = g.add(g.mul(mu, mu), g.sub(g.exp(logvar), logvar));
  return g.add_scalar(g.scale(g.reduce_sum(terms), 0.5 / n), -0.5 * m);
}

template <typename T>
ad::Var reparameterize(ad::Graph<T>& g, ad::Var mu, ad::Var logvar, ad::Var eps) {
  return g.add(mu, g.mul(g.exp(g.scale(logvar, 0.5)), eps));
}

double median_pairwise_distance(std::span<const double> x, std::span<const double> y,
                                std::size_t dim) {
  if (dim == 0) throw ShapeError("median_pairwise_distance: zero dimension");
  std::vector<const double*> rows;
  for (std::size_t i = 0; i + dim <= x.size(); i += dim) rows.push_back(x.data() + i);
  for (std::size_t i = 0; i + dim <= y.size(); i += dim) rows.push_back(y.data() + i);
  std::vector<double> d;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += (rows[i][k] - rows[j][k]) * (rows[i][k] - rows[j][k]);
      d.push_back(std::sqrt(s));
    }
  if (d.empty()) return 1.0;
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double med = d[mid];
  if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid)));
  return med > 0.0 ? med : 1.0;
}

template <typename T>
ad::Var mmd_rbf(ad::Graph<T>& g, ad::Var x, ad::Var y, double bandwidth) {
  const ad::Shape sx = g.value(x).shape();
  const ad::Shape sy = g.value(y).shape();
  if (sx.size() != 2 || sy.size() != 2 || sx[1] != sy[1])
    throw ShapeError("mmd_rbf: sample sets must be (n, d) and (m, d), got " +
                     ad::shape_to_string(sx) + " and " + ad::shape_to_string(sy));
  if (sx[0] < 1 || sy[0] < 1) throw DataError("mmd_rbf: empty sample set");
  if (!(bandwidth > 0.0)) {
    const auto xv = g.value(x).template cast<double>();
    const auto yv = g.value(y).template cast<double>();
    bandwidth = median_pairwise_distance(xv.data(), yv.data(), static_cast<std::size_t>(sx[1]));
  }
  const ad::Var kxx = g.reduce_mean(g.gaussian_rbf_kernel(x, x, bandwidth));
  const ad::Var kyy = g.reduce_mean(g.gaussian_rbf_kernel(y, y, bandwidth));
  const ad::Var kxy = g.reduce_mean(g.gaussian_rbf_kernel(x, y, bandwidth));
  return g.sub(g.add(kxx, kyy), g.scale(kxy, 2.0));
}

template <typename T>
ad::Var infovae_loss(ad::Graph<T>& g, ad::Var recon, ad::Var kl, ad::Var mmd,
                     const LossWeights& w) {
  return g.add(g.add(recon, g.scale(kl, 1.0 - w.alpha)), g.scale(mmd, w.alpha + w.lambda - 1.0));
}

template <typename T>
ad::Var triplet_loss(ad::Graph<T>& g, ad::Var anchor, ad::Var positive, ad::Var negative,
                     double margin) {
  const ad::Var gap =
      g.sub(g.euclidean_distance(anchor, positive), g.euclidean_distance(anchor, negative));
  return g.reduce_mean(g.leaky_relu(g.add_scalar(gap, margin), 0.0));
}

template <typename T>
ad::Var simsiam_loss(ad::Graph<T>& g, ad::Var p, ad::Var z) {
  return g.scale(g.reduce_mean(g.cosine_similarity(p, g.stop_gradient(z))), -1.0);
}

template <typename T>
ad::Var symmetric_simsiam_loss(ad::Graph<T>& g, ad::Var p1, ad::Var z1, ad::Var p2, ad::Var z2) {
  return g.scale(g.add(simsiam_loss(g, p1, z2), simsiam_loss(g, p2, z1)), 0.5);
}

template <typename T>
ad::Var multitask_loss(ad::Graph<T>& g, ad::Var recon, ad::Var simsiam, ad::Var triplet,
                       double beta, double gamma) {
  return g.add(g.add(recon, g.scale(simsiam, beta)), g.scale(triplet, gamma));
}

#define PLANRET_INSTANTIATE(T)                                                                 \
  template ad::Var recon_loss(ad::Graph<T>&, ad::Var, ad::Var);                                \
  template ad::Var kl_gauss(ad::Graph<T>&, ad::Var, ad::Var);                                  \
  template ad::Var reparameterize(ad::Graph<T>&, ad::Var, ad::Var, ad::Var);                   \
  template ad::Var mmd_rbf(ad::Graph<T>&, ad::Var, ad::Var, double);                           \
  template ad::Var infovae_loss(ad::Graph<T>&, ad::Var, ad::Var, ad::Var, const LossWeights&); \
  template ad::Var triplet_loss(ad::Graph<T>&, ad::Var, ad::Var, ad::Var, double);             \
  template ad::Var simsiam_loss(ad::Graph<T>&, ad::Var, ad::Var);                              \
  template ad::Var symmetric_simsiam_loss(ad::Graph<T>&, ad::Var, ad::Var, ad::Var, ad::Var);  \
  template ad::Var multitask_loss(ad::Graph<T>&, ad::Var, ad::Var, ad::Var, double, double);

PLANRET_INSTANTIATE(float)
PLANRET_INSTANTIATE(double)

#undef PLANRET_INSTANTIATE

}  // namespace planret::models
