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

// On-disk case layout, per case in one directory:
//   <id>.ct.vol    float32 little-endian, z-major
//   <id>.mask.vol  uint8, z-major
//   <id>.dose.vol  float32 little-endian, z-major
//   <id>.meta      key = value sidecar (dims, spacing, dtypes, criteria, ...)
// plus manifest.tsv listing case_id, class_id and split for the directory.

#include <filesystem>
#include <string>
#include <vector>

#include "planret/volumes/phantom.hpp"

namespace planret::volumes {

struct ManifestEntry {
  std::string case_id;
  int class_id = 0;
  Split split = Split::kTrain;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

void write_case(const std::filesystem::path& dir, const Case& c);
Case read_case(const std::filesystem::path& dir, const std::string& case_id);
CaseMeta read_meta(const std::filesystem::path& dir, const std::string& case_id);

std::filesystem::path dose_path(const std::filesystem::path& dir, const std::string& case_id);

void write_manifest(const std::filesystem::path& dir, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

std::string serialize_meta(const CaseMeta& meta);
/// Parses the criteria/identity fields of a meta block (dims and dtypes are
/// ignored here).
CaseMeta parse_meta(const std::string& text);

}  // namespace planret::volumes
