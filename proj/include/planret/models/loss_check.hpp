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

// Finite-difference verification of every objective, both on free leaf
// inputs and through the parameters of a small model.

#include <cstdint>
#include <string_view>
#include <vector>

#include "planret/autodiff/grad_check.hpp"
#include "planret/models/model.hpp"

namespace planret::models {

enum class LossKind : std::uint8_t {
  kRecon,
  kKl,
  kReparameterize,
  kMmd,
  kInfoVae,
  kTriplet,
  kSimSiam,
  kSymmetricSimSiam,
  kMultitask,
};

std::string_view to_string(LossKind kind);
std::vector<LossKind> loss_catalog();

/// Random small instance of one loss with every differentiable operand a leaf.
ad::GradCheckReport loss_grad_check(LossKind kind, std::uint64_t seed);

/// A small 64-bit model of the given kind; compares the backward pass of its
/// full objective with central differences on up to `per_parameter` randomly
/// chosen elements of every parameter tensor. With hundreds of leaky_relu
/// units a step occasionally straddles a kink; such elements are detected by
/// their one-sided differences and counted in kinks_skipped.
ad::GradCheckReport model_grad_check(ModelKind kind, std::uint64_t seed,
                                     std::size_t per_parameter = 12, double step = 1e-5);

/// Configuration used by model_grad_check.
EncoderConfig tiny_encoder_config();

}  // namespace planret::models
