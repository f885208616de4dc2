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

#include "planret/training/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "planret/binary_io.hpp"
#include "planret/error.hpp"
#include "planret/models/checkpoint.hpp"
#include "planret/models/objective.hpp"
#include "planret/rng.hpp"
#include "planret/training/triplets.hpp"

namespace planret::training {

using models::ModelKind;
using volumes::ChannelVariant;

SplitView::SplitView(std::span<const volumes::Case> cases, volumes::Split split)
    : cases_(cases), split_(split) {
  for (std::size_t i = 0; i < cases.size(); ++i)
    if (cases[i].meta.split == split) members_.push_back(i);
}

const volumes::Case& SplitView::get(std::size_t i) {
  const volumes::Case& c = cases_[members_.at(i)];
  log_.push_back(c.meta.case_id);
  return c;
}

const volumes::CaseMeta& SplitView::meta(std::size_t i) const {
  return cases_[members_.at(i)].meta;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(optimizer.lr > 0.0)) throw ConfigError("learning rate must be positive");
  encoder.validate();
  weights.validate();
  if (input_channels(input) != encoder.in_channels)
    throw ConfigError("mask encoding yields " + std::to_string(input_channels(input)) +
                      " channels but the encoder expects " + std::to_string(encoder.in_channels));
}

namespace {

const char* term_name(std::size_t slot, ModelKind kind) {
  switch (kind) {
    case ModelKind::kVanillaAutoencoder: return "recon";
    case ModelKind::kInfoVae: return slot == 0 ? "recon" : slot == 1 ? "kl" : "mmd";
    case ModelKind::kSiameseTriplet: return "triplet";
    case ModelKind::kSimSiam: return "simsiam";
    case ModelKind::kMultitask: return slot == 0 ? "recon" : slot == 1 ? "simsiam" : "triplet";
  }
  return "term";
}

ad::Tensor<float> gather(const std::vector<ad::Tensor<float>>& pool,
                         std::span<const std::size_t> idx) {
  std::vector<const ad::Tensor<float>*> items;
  for (std::size_t i : idx) items.push_back(&pool[i]);
  return stack(items);
}

ad::Tensor<float> normals(ad::Shape shape, Rng& rng) {
  ad::Tensor<float> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<float>(rng.normal());
  return t;
}

}  // namespace

TrainResult train(SplitView& data, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (data.size() == 0) throw DataError("training split is empty");
  const auto start = std::chrono::steady_clock::now();
  const ModelKind kind = config.kind;

  std::vector<ad::Tensor<float>> anatomy;
  std::vector<ad::Tensor<float>> dose;
  std::vector<int> classes;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const volumes::Case& c = data.get(i);
    anatomy.push_back(prepare_input(c, config.encoder, config.input, ChannelVariant::kAnatomy));
    if (models::needs_transformed(kind))
      dose.push_back(prepare_input(c, config.encoder, config.input, ChannelVariant::kDose));
    classes.push_back(c.meta.class_id);
  }
  std::optional<TripletSampler> sampler;
  if (models::needs_triplets(kind)) sampler.emplace(classes);

  TrainResult result{models::Model<float>(kind, config.encoder, derive_seed(config.seed, 0)), {}};
  auto& model = result.model;
  TrainReport& report = result.report;
  report.kind = kind;
  report.train_cases = data.size();
  report.min_batch_loss = INFINITY;
  report.max_batch_loss = -INFINITY;

  ad::Optimizer<float> optimizer(config.optimizer);
  Rng rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> order(data.size());
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const std::int64_t m = config.encoder.embedding_dim;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    EpochRecord record;
    std::vector<double> term_sums;
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch, ++batch_index) {
      const std::span<const std::size_t> anchors(order.data() + begin,
                                                 std::min(batch, order.size() - begin));
      const auto n = static_cast<std::int64_t>(anchors.size());
      models::ObjectiveInputs<float> in;
      in.anchor = gather(anatomy, anchors);
      if (models::needs_transformed(kind)) {
        in.transformed = gather(dose, anchors);
        ++report.dose_branch_batches;
      }
      if (sampler) {
        const TripletBatch t = sampler->complete(anchors, rng);
        in.positive = gather(anatomy, t.positive);
        in.negative = gather(anatomy, t.negative);
      }
      if (models::needs_noise(kind)) {
        in.eps = normals({n, m}, rng);
        in.prior = normals({n, m}, rng);
      }

      ad::Graph<float> g;
      const models::ObjectiveTerms terms = models::build_objective(g, model, in, config.weights);
      const double loss = g.value(terms.total).item();
      if (!std::isfinite(loss))
        throw NumericError("non-finite " + std::string(models::to_string(kind)) +
                           " loss at epoch " + std::to_string(epoch + 1) + " batch " +
                           std::to_string(batch_index + 1));
      model.zero_grad();
      g.backward(terms.total);
      optimizer.step(model.parameters());

      const auto weighted = models::weighted_terms(kind, terms, config.weights);
      term_sums.resize(weighted.size(), 0.0);
      for (std::size_t k = 0; k < weighted.size(); ++k)
        term_sums[k] += static_cast<double>(n) * g.value(weighted[k].first).item();
      loss_sum += static_cast<double>(n) * loss;
      report.min_batch_loss = std::min(report.min_batch_loss, loss);
      report.max_batch_loss = std::max(report.max_batch_loss, loss);
      ++report.batches;
    }
    const double total = static_cast<double>(order.size());
    record.loss = loss_sum / total;
    for (std::size_t k = 0; k < term_sums.size(); ++k)
      record.terms.emplace_back(term_name(k, kind), term_sums[k] / total);
    if (on_epoch) on_epoch(epoch + 1, record);
    report.epochs.push_back(std::move(record));
  }
  report.checksum = models::parameter_checksum(model);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

KeyValueText TrainReport::to_text() const {
  KeyValueText kv;
  kv.set("kind", std::string(models::to_string(kind)));
  kv.set("epochs", static_cast<std::int64_t>(epochs.size()));
  kv.set("train_cases", static_cast<std::int64_t>(train_cases));
  kv.set("batches", static_cast<std::int64_t>(batches));
  kv.set("dose_branch", std::string(dose_branch_batches > 0 ? "true" : "false"));
  kv.set("dose_branch_batches", static_cast<std::int64_t>(dose_branch_batches));
  kv.set("min_batch_loss", min_batch_loss);
  kv.set("max_batch_loss", max_batch_loss);
  kv.set("wall_seconds", wall_seconds);
  kv.set("parameter_checksum", std::to_string(checksum));
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    const std::string prefix = "epoch." + std::to_string(e + 1) + ".";
    kv.set(prefix + "loss", epochs[e].loss);
    for (const auto& [name, value] : epochs[e].terms) kv.set(prefix + name, value);
  }
  return kv;
}

void write_train_report(const std::filesystem::path& path, const TrainReport& report) {
  write_file(path, report.to_text().serialize());
}

}  // namespace planret::training
