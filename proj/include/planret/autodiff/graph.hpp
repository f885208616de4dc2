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

// Tape-based reverse-mode differentiation. Every op evaluates eagerly when it
// is recorded, so node creation order is a topological order and the reverse
// sweep is a single backwards pass over the tape.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "planret/autodiff/tensor.hpp"

namespace planret::ad {

enum class OpKind : std::uint8_t {
  kConstant,
  kLeaf,
  kParameter,
  kConv3d,
  kConv3dTranspose,
  kGroupNorm,
  kLeakyRelu,
  kLinear,
  kMeanSquaredError,
  kL2Norm,
  kEuclideanDistance,
  kCosineSimilarity,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kExp,
  kReduceMean,
  kReduceSum,
  kReshape,
  kStopGradient,
  kGaussianRbfKernel,
};

std::string_view op_name(OpKind kind);

struct Var {
  std::uint32_t id = 0;
};

/// A named trainable array. Graphs borrow `value` and add into `grad`.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void zero_grad() { grad = Tensor<T>(value.shape()); }
};

template <typename T>
struct LeafGradient {
  Var var;
  const Parameter<T>* parameter = nullptr;  // null for plain leaves
  Tensor<T> grad;
};

template <typename T>
class Graph {
 public:
  /// With `track_gradients` false no node requires a gradient and backward()
  /// is unavailable; used for evaluation-time embedding.
  explicit Graph(bool track_gradients = true) : track_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = delete;
  Graph& operator=(Graph&&) = delete;

  Var constant(Tensor<T> value);
  Var leaf(Tensor<T> value);
  Var parameter(Parameter<T>& p);

  Var conv3d(Var x, Var weight, std::optional<Var> bias, int stride, int padding);
  Var conv3d_transpose(Var x, Var weight, std::optional<Var> bias, int stride, int padding);
  Var group_norm(Var x, int groups, Var scale, Var shift, double epsilon = 1e-5);
  Var leaky_relu(Var x, double negative_slope = 0.01);
  Var linear(Var x, Var weight, std::optional<Var> bias);

  Var mean_squared_error(Var a, Var b);
  Var l2_norm(Var x);
  Var euclidean_distance(Var a, Var b);
  Var cosine_similarity(Var a, Var b);
  Var gaussian_rbf_kernel(Var x, Var y, double bandwidth);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double factor);
  Var add_scalar(Var x, double offset);
  Var exp(Var x);
  Var reduce_mean(Var x);
  Var reduce_sum(Var x);
  Var reshape(Var x, Shape shape);
  Var stop_gradient(Var x);

  const Tensor<T>& value(Var v) const;
  /// Accumulated gradient; a zero tensor for nodes that received none.
  Tensor<T> grad(Var v) const;
  OpKind kind(Var v) const { return node(v).kind; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  std::span<const Var> parents(Var v) const { return node(v).parents; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse sweep from a single-element loss. Returns the gradient of every
  /// leaf that requires one and adds parameter gradients into Parameter::grad.
  std::vector<LeafGradient<T>> backward(Var loss);

 private:
  using Pullback = std::function<void(const Tensor<T>& grad_out)>;

  struct Node {
    OpKind kind = OpKind::kConstant;
    std::vector<Var> parents;
    Tensor<T> out;
    const Tensor<T>* borrowed = nullptr;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* parameter = nullptr;
    Pullback pullback;
  };

  const Node& node(Var v) const;
  Node& node(Var v);
  Var push(OpKind kind, std::vector<Var> parents, Tensor<T> out);
  void set_pullback(Var v, Pullback fn);
  bool needs(Var v) const { return node(v).requires_grad; }
  Tensor<T>& grad_buffer(Var v);

  bool track_;
  bool swept_ = false;
  std::deque<Node> nodes_;  // stable references across growth
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace planret::ad
