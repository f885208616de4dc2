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

#include "planret/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "planret/error.hpp"

namespace planret::ad {
namespace {

Tensor<double> random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<double> t(shape);
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

// Values bounded away from zero so kinks (leaky_relu) are never straddled.
Tensor<double> signed_away_from_zero(const Shape& shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  Tensor<double> t(shape);
  for (auto& v : t.data()) v = sign(rng) ? mag(rng) : -mag(rng);
  return t;
}

double objective(const GraphBuilder& build, const std::vector<Tensor<double>>& inputs,
                 const Tensor<double>& projection) {
  Graph<double> g(false);
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(g.constant(t));
  const Tensor<double>& out = g.value(build(g, vars));
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += projection[i] * out[i];
  return acc;
}

}  // namespace

GradCheckReport grad_check(const GraphBuilder& build, const std::vector<Tensor<double>>& inputs,
                           std::uint64_t seed, double step) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);

  Graph<double> g;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(g.leaf(t));
  const Var out = build(g, vars);
  const Tensor<double> projection = random_tensor(g.value(out).shape(), rng);
  const Var loss = g.reduce_sum(g.mul(out, g.constant(projection)));
  g.backward(loss);

  GradCheckReport report;
  std::vector<Tensor<double>> work = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor<double> analytic = g.grad(vars[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k][i];
      const double xp = x0 + step;
      const double xm = x0 - step;
      work[k][i] = xp;
      const double fp = objective(build, work, projection);
      work[k][i] = xm;
      const double fm = objective(build, work, projection);
      work[k][i] = x0;
      const double numeric = (fp - fm) / (xp - xm);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.elements_checked;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_input = k;
        report.worst_element = i;
      }
    }
  }
  return report;
}

std::vector<OpKind> layer_catalog() {
  return {OpKind::kConv3d,           OpKind::kConv3dTranspose,  OpKind::kGroupNorm,
          OpKind::kLeakyRelu,        OpKind::kLinear,           OpKind::kMeanSquaredError,
          OpKind::kL2Norm,           OpKind::kEuclideanDistance, OpKind::kCosineSimilarity,
          OpKind::kAdd,              OpKind::kSub,              OpKind::kMul,
          OpKind::kScale,            OpKind::kAddScalar,        OpKind::kExp,
          OpKind::kReduceMean,       OpKind::kReduceSum,        OpKind::kReshape,
          OpKind::kStopGradient,     OpKind::kGaussianRbfKernel};
}

GradCheckReport grad_check(OpKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto rnd = [&rng](const Shape& s) { return random_tensor(s, rng); };
  switch (kind) {
    case OpKind::kConv3d:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) { return g.conv3d(v[0], v[1], v[2], 2, 1); },
          {rnd({1, 2, 4, 4, 4}), rnd({3, 2, 3, 3, 3}), rnd({3})}, seed);
    case OpKind::kConv3dTranspose:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) {
            return g.conv3d_transpose(v[0], v[1], v[2], 2, 1);
          },
          {rnd({1, 3, 2, 2, 2}), rnd({3, 2, 4, 4, 4}), rnd({2})}, seed);
    case OpKind::kGroupNorm:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) {
            return g.group_norm(v[0], 2, v[1], v[2], 1e-5);
          },
          {rnd({1, 4, 2, 2, 2}), rnd({4}), rnd({4})}, seed);
    case OpKind::kLeakyRelu:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) { return g.leaky_relu(v[0], 0.01); },
          {signed_away_from_zero({3, 5}, rng)}, seed);
    case OpKind::kLinear:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) { return g.linear(v[0], v[1], v[2]); },
          {rnd({3, 5}), rnd({4, 5}), rnd({4})}, seed);
    case OpKind::kMeanSquaredError:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) {
            return g.mean_squared_error(v[0], v[1]);
          },
          {rnd({2, 3}), rnd({2, 3})}, seed);
    case OpKind::kL2Norm:
      return grad_check([](Graph<double>& g, std::span<const Var> v) { return g.l2_norm(v[0]); },
                        {rnd({3, 4})}, seed);
    case OpKind::kEuclideanDistance:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) {
            return g.euclidean_distance(v[0], v[1]);
          },
          {rnd({3, 4}), rnd({3, 4})}, seed);
    case OpKind::kCosineSimilarity:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) { return g.cosine_similarity(v[0], v[1]); },
          {rnd({3, 4}), rnd({3, 4})}, seed);
    case OpKind::kAdd:
      return grad_check([](Graph<double>& g, std::span<const Var> v) { return g.add(v[0], v[1]); },
                        {rnd({2, 3}), rnd({2, 3})}, seed);
    case OpKind::kSub:
      return grad_check([](Graph<double>& g, std::span<const Var> v) { return g.sub(v[0], v[1]); },
                        {rnd({2, 3}), rnd({2, 3})}, seed);
    case OpKind::kMul:
      return grad_check([](Graph<double>& g, std::span<const Var> v) { return g.mul(v[0], v[1]); },
                        {rnd({2, 3}), rnd({2, 3})}, seed);
    case OpKind::kScale:
      return grad_check([](Graph<double>& g, std::span<const Var> v) { return g.scale(v[0], -1.7); },
                        {rnd({2, 3})}, seed);
    case OpKind::kAddScalar:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) { return g.add_scalar(v[0], 0.3); },
          {rnd({2, 3})}, seed);
    case OpKind::kExp:
      return grad_check([](Graph<double>& g, std::span<const Var> v) { return g.exp(v[0]); },
                        {rnd({2, 3})}, seed);
    case OpKind::kReduceMean:
      return grad_check([](Graph<double>& g, std::span<const Var> v) { return g.reduce_mean(v[0]); },
                        {rnd({2, 3})}, seed);
    case OpKind::kReduceSum:
      return grad_check([](Graph<double>& g, std::span<const Var> v) { return g.reduce_sum(v[0]); },
                        {rnd({2, 3})}, seed);
    case OpKind::kReshape:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) { return g.reshape(v[0], Shape{3, 2}); },
          {rnd({2, 3})}, seed);
    case OpKind::kGaussianRbfKernel:
      return grad_check(
          [](Graph<double>& g, std::span<const Var> v) {
            return g.gaussian_rbf_kernel(v[0], v[1], 1.3);
          },
          {rnd({3, 2}), rnd({4, 2})}, seed);
    case OpKind::kStopGradient: {
      Graph<double> g;
      const Var x = g.leaf(rnd({2, 3}));
      const Var y = g.stop_gradient(x);
      const Var loss = g.reduce_sum(g.mul(y, g.constant(rnd({2, 3}))));
      g.backward(loss);
      GradCheckReport report;
      const Tensor<double> gx = g.grad(x);
      for (std::size_t i = 0; i < gx.size(); ++i) {
        report.max_relative_error = std::max(report.max_relative_error, std::abs(gx[i]));
      }
      report.elements_checked = gx.size();
      return report;
    }
    case OpKind::kConstant:
    case OpKind::kLeaf:
    case OpKind::kParameter:
      break;
  }
  throw DataError("grad_check: '" + std::string(op_name(kind)) + "' is not a differentiable op");
}

}  // namespace planret::ad
