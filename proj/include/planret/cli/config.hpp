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

// Run configuration shared by every subcommand. The on-disk form is a JSON
// document; every key is optional and unknown keys are rejected. Command-line
// flags are applied as overrides on dotted key paths before parsing, so the
// resolved document echoed into the output directory reproduces the run.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "planret/autodiff/optimizer.hpp"
#include "planret/eval/retrieval_metrics.hpp"
#include "planret/models/model.hpp"
#include "planret/training/embed.hpp"
#include "planret/volumes/criteria.hpp"
#include "planret/volumes/grid.hpp"

namespace planret::cli {

struct DataSection {
  std::string dir = "data";
  int per_class = 10;
  volumes::Dims dims{16, 16, 16};
  std::array<double, 3> split_fractions{235.0 / 405.0, 43.0 / 405.0, 127.0 / 405.0};
};

struct TrainSection {
  int epochs = 30;
  int batch_size = 8;
  ad::OptimizerConfig optimizer;
};

struct QuerySection {
  std::string case_id;
  std::string volume;
  int k = 5;
  std::vector<std::string> filter;
  bool slices = false;
};

struct EvalModel {
  std::string name;
  std::string checkpoint;
};

struct EvalSection {
  int max_k = 5;
  volumes::Split query_split = volumes::Split::kTest;
  eval::ScoreWeighting weighting;
  std::vector<EvalModel> models;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";
  DataSection data;
  models::ModelKind kind = models::ModelKind::kMultitask;
  models::EncoderConfig encoder;  // in_channels follows the input encoding
  models::LossWeights loss;
  TrainSection train;
  training::InputOptions input;
  std::string checkpoint;
  std::string index;
  volumes::Split database_split = volumes::Split::kTrain;
  QuerySection query;
  EvalSection eval;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Sets `path` (dot separated) to `value`. The value is parsed as JSON when
/// it is valid JSON and taken as a string otherwise.
struct Override {
  std::string path;
  std::string value;
};

/// Parses "a.b=value".
Override parse_override(const std::string& text);

/// Defaults, then the optional config file, then overrides in order.
RunConfig resolve_config(const std::filesystem::path& file, const std::vector<Override>& overrides);
RunConfig parse_config(const std::string& json_text, const std::vector<Override>& overrides);

/// Canonical JSON with every field present.
std::string to_json(const RunConfig& config);

std::string to_string(volumes::MaskEncoding encoding);
volumes::MaskEncoding parse_mask_encoding(const std::string& name);

}  // namespace planret::cli
