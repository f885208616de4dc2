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

// Checkpoint layout: a "key = value" header terminated by a line reading
// "end", then every parameter as raw little-endian float32 in manifest order.

#include <cstdint>
#include <filesystem>
#include <string>

#include "planret/kv_text.hpp"
#include "planret/models/model.hpp"

namespace planret::models {

inline constexpr std::string_view kCheckpointMagic = "planret-checkpoint";
inline constexpr int kCheckpointVersion = 1;

std::string encode_checkpoint(const Model<float>& model);
/// Throws DataError on a malformed header, a manifest that disagrees with the
/// declared configuration, or a truncated or oversized payload.
Model<float> decode_checkpoint(const std::string& bytes, const std::string& context);

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path);
Model<float> load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over the little-endian bytes of every parameter value.
std::uint64_t parameter_checksum(const Model<float>& model);

void write_encoder_config(KeyValueText& kv, const EncoderConfig& c);
EncoderConfig read_encoder_config(const KeyValueText& kv);

}  // namespace planret::models
