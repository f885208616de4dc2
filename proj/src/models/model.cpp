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

#include "planret/models/model.hpp"

#include <algorithm>
#include <cmath>

#include "planret/error.hpp"
#include "planret/rng.hpp"

namespace planret::models {
namespace {

constexpr int kKernel = 4;
constexpr int kStride = 2;
constexpr int kPadding = 1;

struct KindInfo {
  ModelKind kind;
  std::string_view name;
};

constexpr KindInfo kKinds[] = {
    {ModelKind::kVanillaAutoencoder, "vanilla_autoencoder"},
    {ModelKind::kInfoVae, "info_vae"},
    {ModelKind::kSiameseTriplet, "siamese_triplet"},
    {ModelKind::kSimSiam, "simsiam"},
    {ModelKind::kMultitask, "multitask"},
};

std::string stage(std::string_view prefix, std::size_t i, std::string_view suffix) {
  return std::string(prefix) + std::to_string(i) + "." + std::string(suffix);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  std::string names;
  for (const auto& k : kKinds) {
    if (k.name == text) return k.kind;
    names += names.empty() ? "" : ", ";
    names += k.name;
  }
  throw ConfigError("unknown model kind '" + std::string(text) + "' (expected one of " + names +
                    ")");
}

bool has_decoder(ModelKind kind) {
  return kind == ModelKind::kVanillaAutoencoder || kind == ModelKind::kInfoVae ||
         kind == ModelKind::kMultitask;
}
bool has_vae_heads(ModelKind kind) { return kind == ModelKind::kInfoVae; }
bool has_projector(ModelKind kind) {
  return kind == ModelKind::kSimSiam || kind == ModelKind::kMultitask;
}
bool uses_dose_branch(ModelKind kind) { return has_projector(kind); }

void EncoderConfig::validate() const {
  if (widths.empty()) throw ConfigError("encoder needs at least one stage");
  if (groups < 1) throw ConfigError("group_norm groups must be positive");
  for (int w : widths) {
    if (w < 1) throw ConfigError("stage widths must be positive");
    if (w % groups != 0)
      throw ConfigError("groups " + std::to_string(groups) + " does not divide stage width " +
                        std::to_string(w));
  }
  if (embedding_dim < 2) throw ConfigError("embedding dim must be at least 2");
  if (in_channels < 1) throw ConfigError("input channels must be positive");
  if (!(negative_slope >= 0.0) || negative_slope >= 1.0)
    throw ConfigError("negative slope must lie in [0, 1)");
  const int total = 1 << widths.size();
  for (int n : {input.nx, input.ny, input.nz}) {
    if (n < total || n % total != 0)
      throw ConfigError("input extents " + volumes::to_string(input) +
                        " are not divisible by the total stride " + std::to_string(total));
  }
}

volumes::Dims EncoderConfig::bottleneck() const {
  const int total = 1 << widths.size();
  return {input.nx / total, input.ny / total, input.nz / total};
}

void LossWeights::validate() const {
  if (!(margin > 0.0)) throw ConfigError("triplet margin must be positive");
  if (!(beta >= 0.0) || !(gamma >= 0.0)) throw ConfigError("beta and gamma must be nonnegative");
  if (!std::isfinite(alpha) || !std::isfinite(lambda))
    throw ConfigError("alpha and lambda must be finite");
}

template <typename T>
Model<T>::Model(ModelKind kind, EncoderConfig config, std::uint64_t seed)
    : kind_(kind), config_(std::move(config)) {
  config_.validate();
  const auto& w = config_.widths;
  const std::int64_t m = config_.embedding_dim;
  const volumes::Dims b = config_.bottleneck();
  const std::int64_t flat = std::int64_t{w.back()} * b.voxels();
  const std::int64_t k = kKernel;

  int in = config_.in_channels;
  for (std::size_t i = 0; i < w.size(); ++i) {
    // no conv bias: group_norm removes any per-channel offset
    add(stage("enc.conv", i, "weight"), {w[i], in, k, k, k});
    add(stage("enc.norm", i, "scale"), {w[i]});
    add(stage("enc.norm", i, "shift"), {w[i]});
    in = w[i];
  }
  add("enc.fc.weight", {m, flat});
  // Pure distance objectives cannot see a common offset.
  if (kind_ != ModelKind::kSiameseTriplet) add("enc.fc.bias", {m});
  if (has_vae_heads(kind_)) {
    add("vae.logvar.weight", {m, flat});
    add("vae.logvar.bias", {m});
  }
  if (has_decoder(kind_)) {
    add("dec.fc.weight", {flat, m});
    add("dec.fc.bias", {flat});
    for (std::size_t j = 0; j < w.size(); ++j) {
      const std::size_t i = w.size() - 1 - j;
      const int out = i == 0 ? config_.in_channels : w[i - 1];
      add(stage("dec.deconv", j, "weight"), {w[i], out, k, k, k});
      if (i == 0) {
        add(stage("dec.deconv", j, "bias"), {out});
      } else {
        add(stage("dec.norm", j, "scale"), {out});
        add(stage("dec.norm", j, "shift"), {out});
      }
    }
  }
  if (has_projector(kind_)) {
    const std::int64_t h = std::max<std::int64_t>(1, m / 4);
    add("proj.fc0.weight", {m, m});
    add("proj.fc0.bias", {m});
    add("proj.fc1.weight", {m, m});
    add("proj.fc1.bias", {m});
    add("pred.fc0.weight", {h, m});
    add("pred.fc0.bias", {h});
    add("pred.fc1.weight", {m, h});
    add("pred.fc1.bias", {m});
  }

  // He-normal weights with the fan-in seen by each output; unit norm scales.
  Rng rng(seed);
  for (auto& p : params_) {
    const auto& s = p.value.shape();
    const std::string& name = p.name;
    auto ends_with = [&](std::string_view suffix) {
      return name.size() >= suffix.size() &&
             name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".scale")) {
      p.value.fill(T{1});
    } else if (ends_with(".weight")) {
      double fan_in = 1.0;
      if (s.size() == 2) {
        fan_in = static_cast<double>(s[1]);
      } else if (name.rfind("dec.deconv", 0) == 0) {
        fan_in = static_cast<double>(s[0] * s[2] * s[3] * s[4]) / (kStride * kStride * kStride);
      } else {
        fan_in = static_cast<double>(s[1] * s[2] * s[3] * s[4]);
      }
      const double sd = std::sqrt(2.0 / fan_in);
      for (auto& v : p.value.data()) v = static_cast<T>(sd * rng.normal());
    }
  }
}

template <typename T>
void Model<T>::add(std::string name, ad::Shape shape) {
  ad::Parameter<T> p;
  p.name = std::move(name);
  p.value = ad::Tensor<T>(std::move(shape));
  p.zero_grad();
  params_.push_back(std::move(p));
}

template <typename T>
ad::Parameter<T>& Model<T>::parameter(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw ConfigError("model " + std::string(to_string(kind_)) + " has no parameter '" +
                    std::string(name) + "'");
}

template <typename T>
const ad::Parameter<T>& Model<T>::parameter(std::string_view name) const {
  return const_cast<Model*>(this)->parameter(name);
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
ad::Var Model<T>::features(ad::Graph<T>& g, ad::Var x) {
  const ad::Shape s = g.value(x).shape();
  const auto& in = config_.input;
  if (s.size() != 5 || s[1] != config_.in_channels || s[2] != in.nz || s[3] != in.ny ||
      s[4] != in.nx) {
    throw ShapeError("encode: expected input (N, " + std::to_string(config_.in_channels) + ", " +
                     std::to_string(in.nz) + ", " + std::to_string(in.ny) + ", " +
                     std::to_string(in.nx) + "), got " + ad::shape_to_string(s));
  }
  ad::Var h = x;
  for (std::size_t i = 0; i < config_.widths.size(); ++i) {
    h = g.conv3d(h, param(g, stage("enc.conv", i, "weight")), std::nullopt, kStride, kPadding);
    h = g.group_norm(h, config_.groups, param(g, stage("enc.norm", i, "scale")),
                     param(g, stage("enc.norm", i, "shift")));
    h = g.leaky_relu(h, config_.negative_slope);
  }
  const std::int64_t n = s[0];
  const std::int64_t flat = static_cast<std::int64_t>(g.value(h).size()) / n;
  return g.reshape(h, {n, flat});
}

template <typename T>
ad::Var Model<T>::encode(ad::Graph<T>& g, ad::Var x) {
  const ad::Var f = features(g, x);
  std::optional<ad::Var> bias;
  if (kind_ != ModelKind::kSiameseTriplet) bias = param(g, "enc.fc.bias");
  return g.linear(f, param(g, "enc.fc.weight"), bias);
}

template <typename T>
VaeOutput<T> Model<T>::encode_vae(ad::Graph<T>& g, ad::Var x) {
  if (!has_vae_heads(kind_))
    throw ConfigError(std::string(to_string(kind_)) + " has no variational heads");
  const ad::Var f = features(g, x);
  return {g.linear(f, param(g, "enc.fc.weight"), param(g, "enc.fc.bias")),
          g.linear(f, param(g, "vae.logvar.weight"), param(g, "vae.logvar.bias"))};
}

template <typename T>
ad::Var Model<T>::decode(ad::Graph<T>& g, ad::Var z) {
  if (!has_decoder(kind_)) throw ConfigError(std::string(to_string(kind_)) + " has no decoder");
  const ad::Shape s = g.value(z).shape();
  if (s.size() != 2 || s[1] != config_.embedding_dim)
    throw ShapeError("decode: expected (N, " + std::to_string(config_.embedding_dim) + "), got " +
                     ad::shape_to_string(s));
  const volumes::Dims b = config_.bottleneck();
  const auto& w = config_.widths;
  ad::Var h = g.linear(z, param(g, "dec.fc.weight"), param(g, "dec.fc.bias"));
  h = g.reshape(h, {s[0], w.back(), b.nz, b.ny, b.nx});
  for (std::size_t j = 0; j < w.size(); ++j) {
    const bool last = j + 1 == w.size();
    std::optional<ad::Var> bias;
    if (last) bias = param(g, stage("dec.deconv", j, "bias"));
    h = g.conv3d_transpose(h, param(g, stage("dec.deconv", j, "weight")), bias, kStride, kPadding);
    if (!last) {
      h = g.group_norm(h, config_.groups, param(g, stage("dec.norm", j, "scale")),
                       param(g, stage("dec.norm", j, "shift")));
      h = g.leaky_relu(h, config_.negative_slope);
    }
  }
  return h;
}

template <typename T>
ad::Var Model<T>::mlp(ad::Graph<T>& g, ad::Var z, const std::string& prefix) {
  if (!has_projector(kind_))
    throw ConfigError(std::string(to_string(kind_)) + " has no projector or predictor");
  ad::Var h = g.linear(z, param(g, prefix + ".fc0.weight"), param(g, prefix + ".fc0.bias"));
  h = g.leaky_relu(h, config_.negative_slope);
  return g.linear(h, param(g, prefix + ".fc1.weight"), param(g, prefix + ".fc1.bias"));
}

template <typename T>
ad::Var Model<T>::project(ad::Graph<T>& g, ad::Var z) {
  return mlp(g, z, "proj");
}

template <typename T>
ad::Var Model<T>::predict(ad::Graph<T>& g, ad::Var z) {
  return mlp(g, z, "pred");
}

template <typename T>
ad::Tensor<T> Model<T>::embed(const ad::Tensor<T>& x) {
  ad::Graph<T> g(false);
  return g.value(encode(g, g.constant(x)));
}

template class Model<float>;
template class Model<double>;

template <typename To, typename From>
void copy_parameters(const Model<From>& from, Model<To>& to) {
  const auto& src = from.parameters();
  auto& dst = to.parameters();
  if (src.size() != dst.size())
    throw ShapeError("copy_parameters: parameter counts differ (" + std::to_string(src.size()) +
                     " vs " + std::to_string(dst.size()) + ")");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].value.shape() != dst[i].value.shape())
      throw ShapeError("copy_parameters: manifest mismatch at " + src[i].name);
    dst[i].value = src[i].value.template cast<To>();
  }
}

template void copy_parameters(const Model<float>&, Model<double>&);
template void copy_parameters(const Model<double>&, Model<float>&);
template void copy_parameters(const Model<float>&, Model<float>&);
template void copy_parameters(const Model<double>&, Model<double>&);

}  // namespace planret::models
