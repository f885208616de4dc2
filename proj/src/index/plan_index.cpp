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

#include "planret/index/plan_index.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "planret/binary_io.hpp"
#include "planret/kv_text.hpp"
#include "planret/volumes/case_io.hpp"

namespace planret::index {
namespace {

constexpr std::string_view kMagic = "PLIX";

}  // namespace

bool MetaFilter::matches(const volumes::CaseMeta& meta) const {
  const auto& c = meta.criteria;
  return (!site || *site == c.site) && (!protocol || *protocol == meta.protocol) &&
         (!multi_target || *multi_target == c.multi_target) && (!size || *size == c.size) &&
         (!location || *location == c.location) && (!class_id || *class_id == meta.class_id);
}

bool MetaFilter::all_pass() const {
  return !site && !protocol && !multi_target && !size && !location && !class_id;
}

std::string MetaFilter::describe() const {
  if (all_pass()) return "all";
  std::vector<std::string> parts;
  if (site) parts.push_back("site=" + volumes::to_string(*site));
  if (protocol) parts.push_back("protocol=" + *protocol);
  if (multi_target)
    parts.push_back("target_levels=" + volumes::target_levels_name(*multi_target));
  if (size) parts.push_back("ptv_size=" + volumes::to_string(*size));
  if (location) parts.push_back("ptv_location=" + volumes::to_string(*location));
  if (class_id) parts.push_back("class_id=" + std::to_string(*class_id));
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

MetaFilter MetaFilter::parse(std::span<const std::string> terms) {
  MetaFilter f;
  for (const std::string& term : terms) {
    const auto eq = term.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == term.size())
      throw ConfigError("filter term '" + term + "' is not key=value");
    const std::string key = term.substr(0, eq);
    const std::string value = term.substr(eq + 1);
    try {
      if (key == "site") {
        f.site = volumes::parse_site(value);
      } else if (key == "protocol") {
        f.protocol = value;
      } else if (key == "target_levels") {
        f.multi_target = volumes::parse_target_levels(value);
      } else if (key == "ptv_size") {
        f.size = volumes::parse_size(value);
      } else if (key == "ptv_location") {
        f.location = volumes::parse_location(value);
      } else if (key == "class_id") {
        const auto id = parse_int(value);
        if (id < 0 || id >= volumes::kNumClasses) throw ConfigError("class_id out of range");
        f.class_id = static_cast<int>(id);
      } else {
        throw ConfigError("unknown filter key '" + key +
                          "' (site, protocol, target_levels, ptv_size, ptv_location, class_id)");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("filter term '" + term + "': " + e.what());
    }
  }
  return f;
}

QueryResult IndexView::query(std::span<const float> q, std::size_t k) const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (q.size() != dim_)
    throw ShapeError("query vector has dim " + std::to_string(q.size()) + ", index has " +
                     std::to_string(dim_));
  if (records_.empty())
    throw EmptyDatabaseError("no records match filter '" + filter_ + "'; the database is empty");
  struct Scored {
    double d2;
    const EmbeddingRecord* r;
  };
  std::vector<Scored> scored;
  scored.reserve(records_.size());
  for (const EmbeddingRecord* r : records_) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double diff = static_cast<double>(q[i]) - static_cast<double>(r->vector[i]);
      s += diff * diff;
    }
    scored.push_back({s, r});
  }
  const std::size_t take = std::min(k, scored.size());
  auto before = [](const Scored& a, const Scored& b) {
    return a.d2 != b.d2 ? a.d2 < b.d2 : a.r->case_id < b.r->case_id;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), before);
  QueryResult out;
  out.truncated = k > scored.size();
  out.filter = filter_;
  for (std::size_t i = 0; i < take; ++i) {
    const auto* r = scored[i].r;
    out.hits.push_back({r->case_id, std::sqrt(scored[i].d2), r->meta.class_id, r->dose_ref});
  }
  return out;
}

PlanIndex::PlanIndex(std::size_t dim) : dim_(dim) {
  if (dim < 1) throw ConfigError("index dimension must be positive");
}

PlanIndex::PlanIndex(const PlanIndex& other) : dim_(other.dim_) {
  const std::shared_lock lock(other.mutex_);
  records_ = other.records_;
}

std::size_t PlanIndex::size() const {
  const std::shared_lock lock(mutex_);
  return records_.size();
}

void PlanIndex::insert(EmbeddingRecord record) {
  if (record.vector.size() != dim_)
    throw ShapeError("record '" + record.case_id + "' has dim " +
                     std::to_string(record.vector.size()) + ", index has " + std::to_string(dim_));
  for (float v : record.vector)
    if (!std::isfinite(v)) throw DataError("record '" + record.case_id + "' is not finite");
  const std::unique_lock lock(mutex_);
  for (const auto& r : records_)
    if (r.case_id == record.case_id)
      throw DataError("duplicate case id '" + record.case_id + "' in index");
  records_.push_back(std::move(record));
}

const EmbeddingRecord* PlanIndex::find(const std::string& case_id) const {
  const std::shared_lock lock(mutex_);
  for (const auto& r : records_)
    if (r.case_id == case_id) return &r;
  return nullptr;
}

IndexView PlanIndex::filter(const MetaFilter& predicate) const {
  IndexView view;
  view.dim_ = dim_;
  view.filter_ = predicate.describe();
  const std::shared_lock lock(mutex_);
  for (const auto& r : records_)
    if (predicate.matches(r.meta)) view.records_.push_back(&r);
  return view;
}

QueryResult PlanIndex::query(std::span<const float> q, std::size_t k,
                             const MetaFilter& predicate) const {
  return filter(predicate).query(q, k);
}

std::string PlanIndex::encode() const {
  const std::shared_lock lock(mutex_);
  ByteWriter w;
  w.bytes(std::string(kMagic));
  w.u32(kIndexVersion);
  w.u32(static_cast<std::uint32_t>(dim_));
  w.u64(records_.size());
  for (const auto& r : records_) {
    w.u32(static_cast<std::uint32_t>(r.case_id.size()));
    w.bytes(r.case_id);
    KeyValueText kv = KeyValueText::parse(volumes::serialize_meta(r.meta));
    kv.set("dose_ref", r.dose_ref);
    const std::string meta = kv.serialize();
    w.u32(static_cast<std::uint32_t>(meta.size()));
    w.bytes(meta);
    w.f32s(r.vector);
  }
  return w.take();
}

PlanIndex PlanIndex::decode(const std::string& bytes, const std::string& context) {
  ByteReader r(bytes, context);
  if (r.bytes(4) != kMagic) throw DataError(context + ": not a plan index (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kIndexVersion)
    throw DataError(context + ": unsupported index version " + std::to_string(version));
  const std::uint32_t dim = r.u32();
  if (dim == 0) throw DataError(context + ": zero embedding dimension");
  const std::uint64_t count = r.u64();
  PlanIndex index(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    EmbeddingRecord rec;
    rec.case_id = r.bytes(r.u32());
    const KeyValueText kv = KeyValueText::parse(r.bytes(r.u32()));
    rec.meta = volumes::parse_meta(kv.serialize());
    rec.dose_ref = kv.find("dose_ref").value_or("");
    if (rec.meta.case_id != rec.case_id)
      throw DataError(context + ": record '" + rec.case_id + "' carries meta for '" +
                      rec.meta.case_id + "'");
    rec.vector.resize(dim);
    r.f32s(rec.vector);
    index.insert(std::move(rec));
  }
  if (r.remaining() != 0)
    throw DataError(context + ": " + std::to_string(r.remaining()) + " trailing bytes");
  return index;
}

void PlanIndex::save(const std::filesystem::path& path) const { write_file(path, encode()); }

PlanIndex PlanIndex::load(const std::filesystem::path& path) {
  return decode(read_file(path), path.string());
}

bool operator==(const PlanIndex& a, const PlanIndex& b) {
  if (&a == &b) return true;
  const std::shared_lock la(a.mutex_);
  const std::shared_lock lb(b.mutex_);
  return a.dim_ == b.dim_ && a.records_ == b.records_;
}

}  // namespace planret::index
