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

// Dense loop kernels behind the graph ops. Layouts are row-major:
// volumes (N, C, D, H, W), conv weights (Cout, Cin, K, K, K).

#include <cstdint>

#include "planret/autodiff/tensor.hpp"

namespace planret::ad::kernels {

std::int64_t conv_output_extent(std::int64_t in, std::int64_t kernel, int stride, int padding);
std::int64_t conv_transpose_output_extent(std::int64_t in, std::int64_t kernel, int stride,
                                          int padding);

template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Tensor<T>& w, int stride, int padding);

// Adjoint of conv3d_forward with respect to its input; `input_shape` is the
// shape of the forward input.
template <typename T>
Tensor<T> conv3d_backward_input(const Tensor<T>& grad_out, const Tensor<T>& w,
                                const Shape& input_shape, int stride, int padding);

template <typename T>
Tensor<T> conv3d_backward_weight(const Tensor<T>& x, const Tensor<T>& grad_out,
                                 const Shape& weight_shape, int stride, int padding);

// y[n, c, ...] += bias[c]
template <typename T>
void add_channel_bias(Tensor<T>& y, const Tensor<T>& bias);

template <typename T>
Tensor<T> channel_sum(const Tensor<T>& grad_out);

}  // namespace planret::ad::kernels
