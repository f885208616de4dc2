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

#include "planret/training/embed.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "planret/error.hpp"

namespace planret::training {

int input_channels(const InputOptions& options) {
  return 1 + volumes::mask_channels(options.encoding);
}

ad::Tensor<float> prepare_input(const volumes::Case& c, const models::EncoderConfig& encoder,
                                const InputOptions& options, volumes::ChannelVariant variant) {
  if (input_channels(options) != encoder.in_channels)
    throw ConfigError("mask encoding yields " + std::to_string(input_channels(options)) +
                      " input channels but the encoder expects " +
                      std::to_string(encoder.in_channels));
  const volumes::Dims want = encoder.input;
  const volumes::Dims have = c.volume.ct.dims;
  if (have.nx == want.nx && have.ny == want.ny && have.nz == want.nz) {
    return volumes::assemble_channels(c.volume, c.meta.prescription_gy, variant, options.encoding,
                                      options.window);
  }
  return volumes::assemble_channels(volumes::preprocess(c.volume, want), c.meta.prescription_gy,
                                    variant, options.encoding, options.window);
}

ad::Tensor<float> stack(std::span<const ad::Tensor<float>* const> items) {
  if (items.empty()) throw ShapeError("stack: no items");
  const ad::Shape& s = items.front()->shape();
  ad::Shape shape{static_cast<std::int64_t>(items.size())};
  shape.insert(shape.end(), s.begin(), s.end());
  ad::Tensor<float> out(shape);
  const std::size_t n = items.front()->size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i]->shape() != s)
      throw ShapeError("stack: item " + std::to_string(i) + " has shape " +
                       ad::shape_to_string(items[i]->shape()) + ", expected " +
                       ad::shape_to_string(s));
    std::copy(items[i]->data().begin(), items[i]->data().end(), out.data().begin() + i * n);
  }
  return out;
}

EmbeddingMatrix embed_cases(models::Model<float>& model, std::span<const volumes::Case> cases,
                            const InputOptions& options, int threads) {
  EmbeddingMatrix out;
  out.dim = static_cast<std::size_t>(model.config().embedding_dim);
  out.values.assign(cases.size() * out.dim, 0.0f);
  for (const auto& c : cases) out.ids.push_back(c.meta.case_id);

  auto work = [&](std::size_t i) {
    const ad::Tensor<float> x = prepare_input(cases[i], model.config(), options,
                                              volumes::ChannelVariant::kAnatomy);
    const ad::Tensor<float>* one[] = {&x};
    const ad::Tensor<float> z = model.embed(stack(one));
    if (!z.all_finite())
      throw NumericError("non-finite embedding for case " + cases[i].meta.case_id);
    std::copy(z.data().begin(), z.data().end(), out.values.begin() + i * out.dim);
  };

  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, cases.size() ? cases.size() : 1);
  if (workers == 1) {
    for (std::size_t i = 0; i < cases.size(); ++i) work(i);
    return out;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < cases.size(); i += workers) work(i);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace planret::training
