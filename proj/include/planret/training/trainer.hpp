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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "planret/autodiff/optimizer.hpp"
#include "planret/kv_text.hpp"
#include "planret/models/model.hpp"
#include "planret/training/embed.hpp"
#include "planret/volumes/phantom.hpp"

namespace planret::training {

/// The cases of one split. Every volume read goes through get(), which
/// records the case id, so tests can prove which cases training touched.
class SplitView {
 public:
  SplitView(std::span<const volumes::Case> cases, volumes::Split split);

  volumes::Split split() const noexcept { return split_; }
  std::size_t size() const noexcept { return members_.size(); }
  const volumes::Case& get(std::size_t i);
  const volumes::CaseMeta& meta(std::size_t i) const;
  const std::vector<std::string>& access_log() const noexcept { return log_; }

 private:
  std::span<const volumes::Case> cases_;
  volumes::Split split_;
  std::vector<std::size_t> members_;
  std::vector<std::string> log_;
};

struct TrainConfig {
  models::ModelKind kind = models::ModelKind::kMultitask;
  int epochs = 20;
  int batch_size = 8;
  ad::OptimizerConfig optimizer;
  models::LossWeights weights;
  std::uint64_t seed = 1;
  models::EncoderConfig encoder;
  InputOptions input;

  void validate() const;
};

struct EpochRecord {
  double loss = 0.0;
  // Batch-size weighted means of the unweighted terms the kind uses.
  std::vector<std::pair<std::string, double>> terms;
};

struct TrainReport {
  models::ModelKind kind = models::ModelKind::kMultitask;
  std::vector<EpochRecord> epochs;
  std::size_t train_cases = 0;
  std::size_t batches = 0;
  std::size_t dose_branch_batches = 0;
  double min_batch_loss = 0.0;
  double max_batch_loss = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t checksum = 0;

  KeyValueText to_text() const;
};

struct TrainResult {
  models::Model<float> model;
  TrainReport report;
};

using EpochCallback = std::function<void(int epoch, const EpochRecord&)>;

/// Runs the kind's objective over the view for config.epochs full passes of
/// shuffled anchors. Deterministic for a fixed config. A non-finite batch
/// loss aborts with a NumericError naming the epoch and batch.
TrainResult train(SplitView& data, const TrainConfig& config, const EpochCallback& on_epoch = {});

void write_train_report(const std::filesystem::path& path, const TrainReport& report);

}  // namespace planret::training
