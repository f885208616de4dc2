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

// The plan database: embeddings with filterable metadata, exact Euclidean
// k-nearest-neighbour queries and a versioned binary file format.
//
// File layout (little-endian):
//   "PLIX" | u32 version | u32 dim | u64 count
//   per record: u32 id length | id bytes | u32 meta length | meta text |
//               dim x float32

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "planret/error.hpp"
#include "planret/volumes/criteria.hpp"

namespace planret::index {

inline constexpr std::uint32_t kIndexVersion = 1;

class EmptyDatabaseError : public DataError {
 public:
  using DataError::DataError;
};

struct EmbeddingRecord {
  std::string case_id;
  std::vector<float> vector;
  volumes::CaseMeta meta;
  std::string dose_ref;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// Conjunction of optional metadata constraints. The default passes all.
struct MetaFilter {
  std::optional<volumes::BodySite> site;
  std::optional<std::string> protocol;
  std::optional<bool> multi_target;
  std::optional<volumes::PtvSize> size;
  std::optional<volumes::PtvLocation> location;
  std::optional<int> class_id;

  bool matches(const volumes::CaseMeta& meta) const;
  bool all_pass() const;
  /// "all" or e.g. "site=prostate,size=large".
  std::string describe() const;
  /// Parses "key=value" terms; keys are site, protocol, target_levels,
  /// ptv_size, ptv_location and class_id. Throws ConfigError.
  static MetaFilter parse(std::span<const std::string> terms);
};

struct QueryHit {
  std::string case_id;
  double distance = 0.0;
  int class_id = 0;
  std::string dose_ref;
};

struct QueryResult {
  std::vector<QueryHit> hits;  // distances nondecreasing, ties by case_id
  bool truncated = false;      // fewer than k records were available
  std::string filter;
};

/// Records visible through a filter, in insertion order. Records are never
/// moved or modified once inserted, so a view stays valid while the index
/// grows.
class IndexView {
 public:
  std::size_t size() const noexcept { return records_.size(); }
  const EmbeddingRecord& operator[](std::size_t i) const { return *records_[i]; }
  const std::string& filter() const noexcept { return filter_; }

  /// Exact top-k by Euclidean distance accumulated in double precision.
  QueryResult query(std::span<const float> q, std::size_t k) const;

 private:
  friend class PlanIndex;
  std::vector<const EmbeddingRecord*> records_;
  std::size_t dim_ = 0;
  std::string filter_;
};

class PlanIndex {
 public:
  explicit PlanIndex(std::size_t dim);
  PlanIndex(const PlanIndex& other);
  PlanIndex& operator=(const PlanIndex&) = delete;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const;

  /// Throws ShapeError on a dimension mismatch, DataError on a duplicate id
  /// or a non-finite vector.
  void insert(EmbeddingRecord record);
  const EmbeddingRecord* find(const std::string& case_id) const;

  IndexView filter(const MetaFilter& predicate) const;
  QueryResult query(std::span<const float> q, std::size_t k, const MetaFilter& predicate = {}) const;

  std::string encode() const;
  static PlanIndex decode(const std::string& bytes, const std::string& context);
  void save(const std::filesystem::path& path) const;
  static PlanIndex load(const std::filesystem::path& path);

  friend bool operator==(const PlanIndex& a, const PlanIndex& b);

 private:
  std::size_t dim_;
  std::deque<EmbeddingRecord> records_;
  mutable std::shared_mutex mutex_;
};

}  // namespace planret::index
