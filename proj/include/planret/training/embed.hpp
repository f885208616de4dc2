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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "planret/models/model.hpp"
#include "planret/volumes/preprocess.hpp"

namespace planret::training {

struct InputOptions {
  volumes::MaskEncoding encoding = volumes::MaskEncoding::kScaledLabel;
  volumes::Window window;
};

int input_channels(const InputOptions& options);

/// One case as a (C, D, H, W) network input at the encoder's grid, resampling
/// first when the stored grid differs. Throws ConfigError when the encoding
/// does not produce the channel count the encoder expects.
ad::Tensor<float> prepare_input(const volumes::Case& c, const models::EncoderConfig& encoder,
                                const InputOptions& options, volumes::ChannelVariant variant);

/// Stacks equally shaped (C, D, H, W) tensors into one batch.
ad::Tensor<float> stack(std::span<const ad::Tensor<float>* const> items);

struct EmbeddingMatrix {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<float> values;  // row-major, ids.size() x dim

  std::size_t rows() const noexcept { return ids.size(); }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// Anatomy-only embedding, one case per forward pass, so rows do not depend
/// on how cases are spread over `threads`.
EmbeddingMatrix embed_cases(models::Model<float>& model, std::span<const volumes::Case> cases,
                            const InputOptions& options, int threads = 1);

}  // namespace planret::training
