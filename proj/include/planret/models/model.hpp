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

// The five encoder families share one convolutional trunk. Heads are created
// only for the kinds that use them, so a checkpoint lists exactly the
// parameters its kind trains.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "planret/autodiff/graph.hpp"
#include "planret/volumes/grid.hpp"

namespace planret::models {

enum class ModelKind : std::uint8_t {
  kVanillaAutoencoder,
  kInfoVae,
  kSiameseTriplet,
  kSimSiam,
  kMultitask,
};

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::kVanillaAutoencoder, ModelKind::kInfoVae,
                                               ModelKind::kSiameseTriplet, ModelKind::kSimSiam,
                                               ModelKind::kMultitask};

std::string_view to_string(ModelKind kind);
/// Throws ConfigError listing the accepted names.
ModelKind parse_model_kind(std::string_view text);

bool has_decoder(ModelKind kind);
bool has_vae_heads(ModelKind kind);
bool has_projector(ModelKind kind);
/// Kinds whose training pairs an anatomy view with a dose view.
bool uses_dose_branch(ModelKind kind);

struct EncoderConfig {
  std::vector<int> widths{8, 16, 32, 64};
  int groups = 4;
  double negative_slope = 0.01;
  int embedding_dim = 32;
  int in_channels = 2;
  volumes::Dims input{16, 16, 16};

  /// Throws ConfigError on an unusable configuration.
  void validate() const;
  /// Spatial extents after the last stride-2 stage.
  volumes::Dims bottleneck() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct LossWeights {
  double alpha = 0.0;
  double lambda = 10.0;
  double margin = 1.0;
  double beta = 1e-2;
  double gamma = 1e-1;
  bool symmetric_simsiam = false;
  /// Fixed RBF bandwidth for the MMD term; non-positive selects the median
  /// heuristic per batch.
  double mmd_bandwidth = 0.0;

  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

template <typename T>
struct VaeOutput {
  ad::Var mu;
  ad::Var logvar;
};

template <typename T>
class Model {
 public:
  Model(ModelKind kind, EncoderConfig config, std::uint64_t seed);

  ModelKind kind() const noexcept { return kind_; }
  const EncoderConfig& config() const noexcept { return config_; }

  std::vector<ad::Parameter<T>>& parameters() noexcept { return params_; }
  const std::vector<ad::Parameter<T>>& parameters() const noexcept { return params_; }
  ad::Parameter<T>& parameter(std::string_view name);
  const ad::Parameter<T>& parameter(std::string_view name) const;
  void zero_grad();

  /// Embedding z of shape (N, M). For info_vae this is the μ head.
  ad::Var encode(ad::Graph<T>& g, ad::Var x);
  VaeOutput<T> encode_vae(ad::Graph<T>& g, ad::Var x);
  /// Mirror of the trunk; output has the encoder's input shape.
  ad::Var decode(ad::Graph<T>& g, ad::Var z);
  ad::Var project(ad::Graph<T>& g, ad::Var z);
  ad::Var predict(ad::Graph<T>& g, ad::Var z);

  /// Evaluation-time embedding of a (N, C, D, H, W) batch without gradients.
  ad::Tensor<T> embed(const ad::Tensor<T>& x);

 private:
  ad::Var features(ad::Graph<T>& g, ad::Var x);
  ad::Var param(ad::Graph<T>& g, std::string_view name) { return g.parameter(parameter(name)); }
  void add(std::string name, ad::Shape shape);
  ad::Var mlp(ad::Graph<T>& g, ad::Var z, const std::string& prefix);

  ModelKind kind_;
  EncoderConfig config_;
  std::vector<ad::Parameter<T>> params_;
};

extern template class Model<float>;
extern template class Model<double>;

/// Copies values between precisions; parameter manifests must agree.
template <typename To, typename From>
void copy_parameters(const Model<From>& from, Model<To>& to);

}  // namespace planret::models
