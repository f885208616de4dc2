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

#include "planret/autodiff/graph.hpp"

#include <cmath>

#include "kernels.hpp"
#include "planret/error.hpp"

namespace planret::ad {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kLeaf: return "leaf";
    case OpKind::kParameter: return "parameter";
    case OpKind::kConv3d: return "conv3d";
    case OpKind::kConv3dTranspose: return "conv3d_transpose";
    case OpKind::kGroupNorm: return "group_norm";
    case OpKind::kLeakyRelu: return "leaky_relu";
    case OpKind::kLinear: return "linear";
    case OpKind::kMeanSquaredError: return "mean_squared_error";
    case OpKind::kL2Norm: return "l2_norm";
    case OpKind::kEuclideanDistance: return "euclidean_distance";
    case OpKind::kCosineSimilarity: return "cosine_similarity";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kExp: return "exp";
    case OpKind::kReduceMean: return "reduce_mean";
    case OpKind::kReduceSum: return "reduce_sum";
    case OpKind::kReshape: return "reshape";
    case OpKind::kStopGradient: return "stop_gradient";
    case OpKind::kGaussianRbfKernel: return "gaussian_rbf_kernel";
  }
  return "unknown";
}

namespace {

[[noreturn]] void shape_fail(std::string_view op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

void require_same(std::string_view op, const Shape& a, const Shape& b) {
  if (a != b) shape_fail(op, "operand shapes " + shape_to_string(a) + " and " +
                                 shape_to_string(b) + " differ");
}

void require_rank(std::string_view op, const Shape& s, std::size_t rank) {
  if (s.size() != rank) {
    shape_fail(op, "expected rank " + std::to_string(rank) + ", got " + shape_to_string(s));
  }
}

}  // namespace

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (v.id >= nodes_.size()) throw DataError("graph: unknown node id " + std::to_string(v.id));
  return nodes_[v.id];
}

template <typename T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
  if (v.id >= nodes_.size()) throw DataError("graph: unknown node id " + std::to_string(v.id));
  return nodes_[v.id];
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
  const Node& n = node(v);
  return n.borrowed ? *n.borrowed : n.out;
}

template <typename T>
Tensor<T> Graph<T>::grad(Var v) const {
  const Node& n = node(v);
  if (!n.grad.empty()) return n.grad;
  return Tensor<T>(value(v).shape());
}

template <typename T>
Var Graph<T>::push(OpKind kind, std::vector<Var> parents, Tensor<T> out) {
  Node n;
  n.kind = kind;
  n.out = std::move(out);
  if (track_) {
    for (const Var p : parents) n.requires_grad = n.requires_grad || nodes_[p.id].requires_grad;
  }
  n.parents = std::move(parents);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
void Graph<T>::set_pullback(Var v, Pullback fn) {
  if (node(v).requires_grad) node(v).pullback = std::move(fn);
}

template <typename T>
Tensor<T>& Graph<T>::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor<T>(value(v).shape());
  return n.grad;
}

template <typename T>
Var Graph<T>::constant(Tensor<T> value) {
  return push(OpKind::kConstant, {}, std::move(value));
}

template <typename T>
Var Graph<T>::leaf(Tensor<T> value) {
  const Var v = push(OpKind::kLeaf, {}, std::move(value));
  node(v).requires_grad = track_;
  return v;
}

template <typename T>
Var Graph<T>::parameter(Parameter<T>& p) {
  const Var v = push(OpKind::kParameter, {}, Tensor<T>());
  Node& n = node(v);
  n.borrowed = &p.value;
  n.parameter = &p;
  n.requires_grad = track_;
  return v;
}

template <typename T>
Var Graph<T>::conv3d(Var x, Var weight, std::optional<Var> bias, int stride, int padding) {
  Tensor<T> y = kernels::conv3d_forward(value(x), value(weight), stride, padding);
  std::vector<Var> parents{x, weight};
  if (bias) {
    kernels::add_channel_bias(y, value(*bias));
    parents.push_back(*bias);
  }
  const Var out = push(OpKind::kConv3d, parents, std::move(y));
  set_pullback(out, [this, x, weight, bias, stride, padding](const Tensor<T>& g) {
    if (needs(x)) {
      const Tensor<T> gx =
          kernels::conv3d_backward_input(g, value(weight), value(x).shape(), stride, padding);
      auto& buf = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) buf[i] += gx[i];
    }
    if (needs(weight)) {
      const Tensor<T> gw =
          kernels::conv3d_backward_weight(value(x), g, value(weight).shape(), stride, padding);
      auto& buf = grad_buffer(weight);
      for (std::size_t i = 0; i < gw.size(); ++i) buf[i] += gw[i];
    }
    if (bias && needs(*bias)) {
      const Tensor<T> gb = kernels::channel_sum(g);
      auto& buf = grad_buffer(*bias);
      for (std::size_t i = 0; i < gb.size(); ++i) buf[i] += gb[i];
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::conv3d_transpose(Var x, Var weight, std::optional<Var> bias, int stride,
                               int padding) {
  const Shape& xs = value(x).shape();
  const Shape& ws = value(weight).shape();
  require_rank("conv3d_transpose", xs, 5);
  require_rank("conv3d_transpose", ws, 5);
  if (xs[1] != ws[0]) {
    shape_fail("conv3d_transpose", "input channels of " + shape_to_string(xs) +
                                       " do not match weight " + shape_to_string(ws));
  }
  Shape out_shape{xs[0], ws[1], 0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    out_shape[2 + a] = kernels::conv_transpose_output_extent(xs[2 + a], ws[2 + a], stride, padding);
    if (out_shape[2 + a] < 1) {
      shape_fail("conv3d_transpose", "empty output for input " + shape_to_string(xs));
    }
  }
  Tensor<T> y = kernels::conv3d_backward_input(value(x), value(weight), out_shape, stride, padding);
  std::vector<Var> parents{x, weight};
  if (bias) {
    kernels::add_channel_bias(y, value(*bias));
    parents.push_back(*bias);
  }
  const Var out = push(OpKind::kConv3dTranspose, parents, std::move(y));
  set_pullback(out, [this, x, weight, bias, stride, padding](const Tensor<T>& g) {
    if (needs(x)) {
      const Tensor<T> gx = kernels::conv3d_forward(g, value(weight), stride, padding);
      auto& buf = grad_buffer(x);
      for (std::size_t i = 0; i < gx.size(); ++i) buf[i] += gx[i];
    }
    if (needs(weight)) {
      const Tensor<T> gw =
          kernels::conv3d_backward_weight(g, value(x), value(weight).shape(), stride, padding);
      auto& buf = grad_buffer(weight);
      for (std::size_t i = 0; i < gw.size(); ++i) buf[i] += gw[i];
    }
    if (bias && needs(*bias)) {
      const Tensor<T> gb = kernels::channel_sum(g);
      auto& buf = grad_buffer(*bias);
      for (std::size_t i = 0; i < gb.size(); ++i) buf[i] += gb[i];
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::group_norm(Var x, int groups, Var scale, Var shift, double epsilon) {
  const Tensor<T>& xv = value(x);
  const Shape& s = xv.shape();
  if (s.size() < 2) shape_fail("group_norm", "input must have a channel axis");
  const std::int64_t n_batch = s[0];
  const std::int64_t channels = s[1];
  if (groups < 1 || channels % groups != 0) {
    shape_fail("group_norm", std::to_string(groups) + " groups do not divide " +
                                 std::to_string(channels) + " channels");
  }
  const Shape affine{channels};
  require_same("group_norm", value(scale).shape(), affine);
  require_same("group_norm", value(shift).shape(), affine);

  const std::size_t inner = xv.size() / static_cast<std::size_t>(n_batch * channels);
  const std::size_t per_group = static_cast<std::size_t>(channels / groups) * inner;
  const std::size_t n_groups = static_cast<std::size_t>(n_batch * groups);

  Tensor<T> xhat(s);
  std::vector<T> inv_std(n_groups);
  for (std::size_t gi = 0; gi < n_groups; ++gi) {
    const T* src = xv.data().data() + gi * per_group;
    T* dst = xhat.data().data() + gi * per_group;
    T mean{0};
    for (std::size_t i = 0; i < per_group; ++i) mean += src[i];
    mean /= static_cast<T>(per_group);
    T var{0};
    for (std::size_t i = 0; i < per_group; ++i) var += (src[i] - mean) * (src[i] - mean);
    var /= static_cast<T>(per_group);
    const T is = T{1} / std::sqrt(var + static_cast<T>(epsilon));
    inv_std[gi] = is;
    for (std::size_t i = 0; i < per_group; ++i) dst[i] = (src[i] - mean) * is;
  }
  Tensor<T> y(s);
  const Tensor<T>& sc = value(scale);
  const Tensor<T>& sh = value(shift);
  for (std::int64_t n = 0; n < n_batch; ++n) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const std::size_t base = static_cast<std::size_t>(n * channels + c) * inner;
      const T a = sc[static_cast<std::size_t>(c)];
      const T b = sh[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < inner; ++i) y[base + i] = xhat[base + i] * a + b;
    }
  }

  const Var out = push(OpKind::kGroupNorm, {x, scale, shift}, std::move(y));
  set_pullback(out, [this, x, scale, shift, xhat = std::move(xhat), inv_std = std::move(inv_std),
                     n_batch, channels, inner, per_group, n_groups](const Tensor<T>& g) {
    const Tensor<T>& sc = value(scale);
    if (needs(scale) || needs(shift)) {
      Tensor<T>& gs = grad_buffer(scale);
      Tensor<T>& gb = grad_buffer(shift);
      for (std::int64_t n = 0; n < n_batch; ++n) {
        for (std::int64_t c = 0; c < channels; ++c) {
          const std::size_t base = static_cast<std::size_t>(n * channels + c) * inner;
          T acc_s{0}, acc_b{0};
          for (std::size_t i = 0; i < inner; ++i) {
            acc_s += g[base + i] * xhat[base + i];
            acc_b += g[base + i];
          }
          gs[static_cast<std::size_t>(c)] += acc_s;
          gb[static_cast<std::size_t>(c)] += acc_b;
        }
      }
    }
    if (!needs(x)) return;
    Tensor<T>& gx = grad_buffer(x);
    const std::size_t ch_per_group = per_group / inner;
    std::vector<T> dxhat(per_group);
    for (std::size_t gi = 0; gi < n_groups; ++gi) {
      const std::size_t base = gi * per_group;
      const std::size_t first_channel = (gi % (static_cast<std::size_t>(channels) / ch_per_group)) *
                                        ch_per_group;
      T mean_d{0}, mean_dx{0};
      for (std::size_t i = 0; i < per_group; ++i) {
        const std::size_t c = first_channel + i / inner;
        dxhat[i] = g[base + i] * sc[c];
        mean_d += dxhat[i];
        mean_dx += dxhat[i] * xhat[base + i];
      }
      mean_d /= static_cast<T>(per_group);
      mean_dx /= static_cast<T>(per_group);
      for (std::size_t i = 0; i < per_group; ++i) {
        gx[base + i] += inv_std[gi] * (dxhat[i] - mean_d - xhat[base + i] * mean_dx);
      }
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::leaky_relu(Var x, double negative_slope) {
  const Tensor<T>& xv = value(x);
  const T slope = static_cast<T>(negative_slope);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > T{0} ? xv[i] : slope * xv[i];
  const Var out = push(OpKind::kLeakyRelu, {x}, std::move(y));
  set_pullback(out, [this, x, slope](const Tensor<T>& g) {
    const Tensor<T>& xv = value(x);
    Tensor<T>& gx = grad_buffer(x);
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += xv[i] > T{0} ? g[i] : slope * g[i];
  });
  return out;
}

template <typename T>
Var Graph<T>::linear(Var x, Var weight, std::optional<Var> bias) {
  const Tensor<T>& xv = value(x);
  const Tensor<T>& wv = value(weight);
  require_rank("linear", xv.shape(), 2);
  require_rank("linear", wv.shape(), 2);
  const std::int64_t n = xv.dim(0), in = xv.dim(1), outf = wv.dim(0);
  if (wv.dim(1) != in) {
    shape_fail("linear", "input " + shape_to_string(xv.shape()) + " does not match weight " +
                             shape_to_string(wv.shape()));
  }
  if (bias) require_same("linear", value(*bias).shape(), Shape{outf});
  Tensor<T> y(Shape{n, outf});
  for (std::int64_t r = 0; r < n; ++r) {
    const T* xr = xv.data().data() + r * in;
    for (std::int64_t o = 0; o < outf; ++o) {
      const T* wr = wv.data().data() + o * in;
      T acc = bias ? value(*bias)[static_cast<std::size_t>(o)] : T{0};
      for (std::int64_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
      y[static_cast<std::size_t>(r * outf + o)] = acc;
    }
  }
  std::vector<Var> parents{x, weight};
  if (bias) parents.push_back(*bias);
  const Var out = push(OpKind::kLinear, parents, std::move(y));
  set_pullback(out, [this, x, weight, bias, n, in, outf](const Tensor<T>& g) {
    const Tensor<T>& xv = value(x);
    const Tensor<T>& wv = value(weight);
    if (needs(x)) {
      Tensor<T>& gx = grad_buffer(x);
      for (std::int64_t r = 0; r < n; ++r) {
        for (std::int64_t o = 0; o < outf; ++o) {
          const T go = g[static_cast<std::size_t>(r * outf + o)];
          const T* wr = wv.data().data() + o * in;
          T* gr = gx.data().data() + r * in;
          for (std::int64_t i = 0; i < in; ++i) gr[i] += go * wr[i];
        }
      }
    }
    if (needs(weight)) {
      Tensor<T>& gw = grad_buffer(weight);
      for (std::int64_t r = 0; r < n; ++r) {
        const T* xr = xv.data().data() + r * in;
        for (std::int64_t o = 0; o < outf; ++o) {
          const T go = g[static_cast<std::size_t>(r * outf + o)];
          T* gr = gw.data().data() + o * in;
          for (std::int64_t i = 0; i < in; ++i) gr[i] += go * xr[i];
        }
      }
    }
    if (bias && needs(*bias)) {
      Tensor<T>& gb = grad_buffer(*bias);
      for (std::int64_t r = 0; r < n; ++r) {
        for (std::int64_t o = 0; o < outf; ++o) {
          gb[static_cast<std::size_t>(o)] += g[static_cast<std::size_t>(r * outf + o)];
        }
      }
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::mean_squared_error(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require_same("mean_squared_error", av.shape(), bv.shape());
  T acc{0};
  for (std::size_t i = 0; i < av.size(); ++i) acc += (av[i] - bv[i]) * (av[i] - bv[i]);
  const T count = static_cast<T>(av.size());
  const Var out = push(OpKind::kMeanSquaredError, {a, b}, Tensor<T>::scalar(acc / count));
  set_pullback(out, [this, a, b, count](const Tensor<T>& g) {
    const Tensor<T>& av = value(a);
    const Tensor<T>& bv = value(b);
    const T f = T{2} * g[0] / count;
    if (needs(a)) {
      Tensor<T>& ga = grad_buffer(a);
      for (std::size_t i = 0; i < av.size(); ++i) ga[i] += f * (av[i] - bv[i]);
    }
    if (needs(b)) {
      Tensor<T>& gb = grad_buffer(b);
      for (std::size_t i = 0; i < av.size(); ++i) gb[i] -= f * (av[i] - bv[i]);
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::l2_norm(Var x) {
  const Tensor<T>& xv = value(x);
  require_rank("l2_norm", xv.shape(), 2);
  const std::int64_t n = xv.dim(0), d = xv.dim(1);
  Tensor<T> y(Shape{n});
  for (std::int64_t r = 0; r < n; ++r) {
    T acc{0};
    for (std::int64_t i = 0; i < d; ++i) acc += xv[r * d + i] * xv[r * d + i];
    y[static_cast<std::size_t>(r)] = std::sqrt(acc);
  }
  const Var out = push(OpKind::kL2Norm, {x}, std::move(y));
  set_pullback(out, [this, x, out, n, d](const Tensor<T>& g) {
    const Tensor<T>& xv = value(x);
    const Tensor<T>& norms = value(out);
    Tensor<T>& gx = grad_buffer(x);
    for (std::int64_t r = 0; r < n; ++r) {
      const T nr = norms[static_cast<std::size_t>(r)];
      if (nr == T{0}) continue;
      const T f = g[static_cast<std::size_t>(r)] / nr;
      for (std::int64_t i = 0; i < d; ++i) gx[r * d + i] += f * xv[r * d + i];
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::euclidean_distance(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require_rank("euclidean_distance", av.shape(), 2);
  require_same("euclidean_distance", av.shape(), bv.shape());
  const std::int64_t n = av.dim(0), d = av.dim(1);
  Tensor<T> y(Shape{n});
  for (std::int64_t r = 0; r < n; ++r) {
    T acc{0};
    for (std::int64_t i = 0; i < d; ++i) {
      const T diff = av[r * d + i] - bv[r * d + i];
      acc += diff * diff;
    }
    y[static_cast<std::size_t>(r)] = std::sqrt(acc);
  }
  const Var out = push(OpKind::kEuclideanDistance, {a, b}, std::move(y));
  set_pullback(out, [this, a, b, out, n, d](const Tensor<T>& g) {
    const Tensor<T>& av = value(a);
    const Tensor<T>& bv = value(b);
    const Tensor<T>& dist = value(out);
    for (std::int64_t r = 0; r < n; ++r) {
      const T dr = dist[static_cast<std::size_t>(r)];
      if (dr == T{0}) continue;  // subgradient 0 at coincident points
      const T f = g[static_cast<std::size_t>(r)] / dr;
      for (std::int64_t i = 0; i < d; ++i) {
        const T diff = av[r * d + i] - bv[r * d + i];
        if (needs(a)) grad_buffer(a)[r * d + i] += f * diff;
        if (needs(b)) grad_buffer(b)[r * d + i] -= f * diff;
      }
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::cosine_similarity(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require_rank("cosine_similarity", av.shape(), 2);
  require_same("cosine_similarity", av.shape(), bv.shape());
  const std::int64_t n = av.dim(0), d = av.dim(1);
  Tensor<T> y(Shape{n});
  std::vector<T> na(static_cast<std::size_t>(n)), nb(static_cast<std::size_t>(n));
  for (std::int64_t r = 0; r < n; ++r) {
    T aa{0}, bb{0}, ab{0};
    for (std::int64_t i = 0; i < d; ++i) {
      aa += av[r * d + i] * av[r * d + i];
      bb += bv[r * d + i] * bv[r * d + i];
      ab += av[r * d + i] * bv[r * d + i];
    }
    if (aa == T{0} || bb == T{0}) {
      throw NumericError("cosine_similarity: zero-norm vector in row " + std::to_string(r));
    }
    na[static_cast<std::size_t>(r)] = std::sqrt(aa);
    nb[static_cast<std::size_t>(r)] = std::sqrt(bb);
    y[static_cast<std::size_t>(r)] = ab / (na[static_cast<std::size_t>(r)] * nb[static_cast<std::size_t>(r)]);
  }
  const Var out = push(OpKind::kCosineSimilarity, {a, b}, std::move(y));
  set_pullback(out, [this, a, b, out, n, d, na = std::move(na), nb = std::move(nb)](
                        const Tensor<T>& g) {
    const Tensor<T>& av = value(a);
    const Tensor<T>& bv = value(b);
    const Tensor<T>& cs = value(out);
    for (std::int64_t r = 0; r < n; ++r) {
      const std::size_t ri = static_cast<std::size_t>(r);
      const T gr = g[ri];
      const T c = cs[ri];
      const T inv = T{1} / (na[ri] * nb[ri]);
      for (std::int64_t i = 0; i < d; ++i) {
        const T ai = av[r * d + i];
        const T bi = bv[r * d + i];
        if (needs(a)) grad_buffer(a)[r * d + i] += gr * (bi * inv - c * ai / (na[ri] * na[ri]));
        if (needs(b)) grad_buffer(b)[r * d + i] += gr * (ai * inv - c * bi / (nb[ri] * nb[ri]));
      }
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::gaussian_rbf_kernel(Var x, Var y, double bandwidth) {
  const Tensor<T>& xv = value(x);
  const Tensor<T>& yv = value(y);
  require_rank("gaussian_rbf_kernel", xv.shape(), 2);
  require_rank("gaussian_rbf_kernel", yv.shape(), 2);
  if (xv.dim(1) != yv.dim(1)) {
    shape_fail("gaussian_rbf_kernel", "feature dims of " + shape_to_string(xv.shape()) + " and " +
                                          shape_to_string(yv.shape()) + " differ");
  }
  if (!(bandwidth > 0.0)) throw NumericError("gaussian_rbf_kernel: bandwidth must be positive");
  const std::int64_t n = xv.dim(0), m = yv.dim(0), d = xv.dim(1);
  const T inv2s2 = static_cast<T>(1.0 / (2.0 * bandwidth * bandwidth));
  Tensor<T> k(Shape{n, m});
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < m; ++j) {
      T acc{0};
      for (std::int64_t f = 0; f < d; ++f) {
        const T diff = xv[i * d + f] - yv[j * d + f];
        acc += diff * diff;
      }
      k[static_cast<std::size_t>(i * m + j)] = std::exp(-acc * inv2s2);
    }
  }
  const Var out = push(OpKind::kGaussianRbfKernel, {x, y}, std::move(k));
  set_pullback(out, [this, x, y, out, n, m, d, inv2s2](const Tensor<T>& g) {
    const Tensor<T>& xv = value(x);
    const Tensor<T>& yv = value(y);
    const Tensor<T>& kv = value(out);
    const T two = T{2} * inv2s2;  // 1 / sigma^2
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < m; ++j) {
        const T w = g[static_cast<std::size_t>(i * m + j)] * kv[static_cast<std::size_t>(i * m + j)] * two;
        for (std::int64_t f = 0; f < d; ++f) {
          const T diff = xv[i * d + f] - yv[j * d + f];
          if (needs(x)) grad_buffer(x)[i * d + f] -= w * diff;
          if (needs(y)) grad_buffer(y)[j * d + f] += w * diff;
        }
      }
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::add(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require_same("add", av.shape(), bv.shape());
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  const Var out = push(OpKind::kAdd, {a, b}, std::move(y));
  set_pullback(out, [this, a, b](const Tensor<T>& g) {
    if (needs(a)) {
      auto& ga = grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (needs(b)) {
      auto& gb = grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::sub(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require_same("sub", av.shape(), bv.shape());
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] - bv[i];
  const Var out = push(OpKind::kSub, {a, b}, std::move(y));
  set_pullback(out, [this, a, b](const Tensor<T>& g) {
    if (needs(a)) {
      auto& ga = grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (needs(b)) {
      auto& gb = grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::mul(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  require_same("mul", av.shape(), bv.shape());
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const Var out = push(OpKind::kMul, {a, b}, std::move(y));
  set_pullback(out, [this, a, b](const Tensor<T>& g) {
    const Tensor<T>& av = value(a);
    const Tensor<T>& bv = value(b);
    if (needs(a)) {
      auto& ga = grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (needs(b)) {
      auto& gb = grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
  return out;
}

template <typename T>
Var Graph<T>::scale(Var x, double factor) {
  const Tensor<T>& xv = value(x);
  const T f = static_cast<T>(factor);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] * f;
  const Var out = push(OpKind::kScale, {x}, std::move(y));
  set_pullback(out, [this, x, f](const Tensor<T>& g) {
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * f;
  });
  return out;
}

template <typename T>
Var Graph<T>::add_scalar(Var x, double offset) {
  const Tensor<T>& xv = value(x);
  const T c = static_cast<T>(offset);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] + c;
  const Var out = push(OpKind::kAddScalar, {x}, std::move(y));
  set_pullback(out, [this, x](const Tensor<T>& g) {
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
  return out;
}

template <typename T>
Var Graph<T>::exp(Var x) {
  const Tensor<T>& xv = value(x);
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::exp(xv[i]);
  const Var out = push(OpKind::kExp, {x}, std::move(y));
  set_pullback(out, [this, x, out](const Tensor<T>& g) {
    const Tensor<T>& yv = value(out);
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i];
  });
  return out;
}

template <typename T>
Var Graph<T>::reduce_sum(Var x) {
  const Tensor<T>& xv = value(x);
  T acc{0};
  for (const T v : xv.data()) acc += v;
  const Var out = push(OpKind::kReduceSum, {x}, Tensor<T>::scalar(acc));
  set_pullback(out, [this, x](const Tensor<T>& g) {
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
  });
  return out;
}

template <typename T>
Var Graph<T>::reduce_mean(Var x) {
  const Tensor<T>& xv = value(x);
  T acc{0};
  for (const T v : xv.data()) acc += v;
  const T count = static_cast<T>(xv.size());
  const Var out = push(OpKind::kReduceMean, {x}, Tensor<T>::scalar(acc / count));
  set_pullback(out, [this, x, count](const Tensor<T>& g) {
    auto& gx = grad_buffer(x);
    const T f = g[0] / count;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += f;
  });
  return out;
}

template <typename T>
Var Graph<T>::reshape(Var x, Shape shape) {
  Tensor<T> y = value(x).reshaped(std::move(shape));
  const Var out = push(OpKind::kReshape, {x}, std::move(y));
  set_pullback(out, [this, x](const Tensor<T>& g) {
    auto& gx = grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
  return out;
}

template <typename T>
Var Graph<T>::stop_gradient(Var x) {
  Tensor<T> y = value(x);
  const Var out = push(OpKind::kStopGradient, {x}, std::move(y));
  node(out).requires_grad = false;
  return out;
}

template <typename T>
std::vector<LeafGradient<T>> Graph<T>::backward(Var loss) {
  if (!track_) throw DataError("backward: graph was built without gradient tracking");
  if (swept_) throw DataError("backward: graph has already been differentiated");
  if (value(loss).size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_to_string(value(loss).shape()));
  }
  swept_ = true;
  if (node(loss).requires_grad) {
    grad_buffer(loss)[0] = T{1};
    for (std::int64_t i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.requires_grad || n.grad.empty() || !n.pullback) continue;
      n.pullback(n.grad);
    }
  }
  std::vector<LeafGradient<T>> leaves;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (!n.requires_grad || (n.kind != OpKind::kLeaf && n.kind != OpKind::kParameter)) continue;
    Tensor<T> g = grad(Var{i});
    if (n.parameter != nullptr) {
      Parameter<T>& p = *n.parameter;
      if (p.grad.shape() != p.value.shape()) p.zero_grad();
      for (std::size_t j = 0; j < g.size(); ++j) p.grad[j] += g[j];
    }
    leaves.push_back(LeafGradient<T>{Var{i}, n.parameter, std::move(g)});
  }
  return leaves;
}

template class Graph<float>;
template class Graph<double>;

}  // namespace planret::ad
