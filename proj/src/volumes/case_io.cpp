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

#include "planret/volumes/case_io.hpp"

#include <sstream>
#include <type_traits>

#include "planret/binary_io.hpp"
#include "planret/error.hpp"
#include "planret/kv_text.hpp"

namespace planret::volumes {
namespace fs = std::filesystem;

namespace {

fs::path part(const fs::path& dir, const std::string& id, const char* suffix) {
  return dir / (id + suffix);
}

void put_meta_fields(KeyValueText& kv, const CaseMeta& m) {
  kv.set("case_id", m.case_id);
  kv.set("site", to_string(m.criteria.site));
  kv.set("target_levels", target_levels_name(m.criteria.multi_target));
  kv.set("ptv_size", to_string(m.criteria.size));
  kv.set("ptv_location", to_string(m.criteria.location));
  kv.set("class_id", m.class_id);
  kv.set("split", to_string(m.split));
  kv.set("protocol", m.protocol);
  kv.set("prescription_gy", m.prescription_gy);
}

CaseMeta meta_from(const KeyValueText& kv) {
  CaseMeta m;
  m.case_id = kv.get("case_id");
  m.criteria.site = parse_site(kv.get("site"));
  m.criteria.multi_target = parse_target_levels(kv.get("target_levels"));
  m.criteria.size = parse_size(kv.get("ptv_size"));
  m.criteria.location = parse_location(kv.get("ptv_location"));
  m.class_id = static_cast<int>(kv.get_int("class_id"));
  if (m.class_id != classify_case(m.criteria)) {
    throw DataError("meta for '" + m.case_id + "': class_id " + std::to_string(m.class_id) +
                    " disagrees with its criteria");
  }
  m.split = parse_split(kv.get("split"));
  m.protocol = kv.get("protocol");
  m.prescription_gy = kv.get_double("prescription_gy");
  return m;
}

template <typename T>
Grid<T> read_grid(const fs::path& path, Dims dims, Spacing spacing) {
  const std::string bytes = read_file(path);
  Grid<T> g(dims, spacing);
  ByteReader r(bytes, path.string());
  if constexpr (std::is_same_v<T, float>) {
    r.f32s(g.data);
  } else {
    for (auto& v : g.data) v = r.u8();
  }
  if (r.remaining() != 0) {
    throw DataError(path.string() + ": " + std::to_string(r.remaining()) +
                    " trailing bytes beyond dims " + to_string(dims));
  }
  return g;
}

}  // namespace

std::string serialize_meta(const CaseMeta& meta) {
  KeyValueText kv;
  put_meta_fields(kv, meta);
  return kv.serialize();
}

CaseMeta parse_meta(const std::string& text) { return meta_from(KeyValueText::parse(text)); }

fs::path dose_path(const fs::path& dir, const std::string& case_id) {
  return part(dir, case_id, ".dose.vol");
}

void write_case(const fs::path& dir, const Case& c) {
  validate(c.volume);
  const auto& v = c.volume;
  const Dims d = v.dims();
  const Spacing s = v.spacing();
  KeyValueText kv;
  kv.set("format", std::string("planret-case 1"));
  kv.set("dims", std::to_string(d.nx) + " " + std::to_string(d.ny) + " " + std::to_string(d.nz));
  kv.set("spacing", format_double(s.x) + " " + format_double(s.y) + " " + format_double(s.z));
  kv.set("dtype.ct", std::string("float32"));
  kv.set("dtype.mask", std::string("uint8"));
  kv.set("dtype.dose", std::string("float32"));
  kv.set("byte_order", std::string("little"));
  put_meta_fields(kv, c.meta);

  ByteWriter ct, mask, dose;
  ct.f32s(v.ct.data);
  for (const auto b : v.mask.data) mask.u8(b);
  dose.f32s(v.dose.data);
  write_file(part(dir, c.meta.case_id, ".ct.vol"), ct.buffer());
  write_file(part(dir, c.meta.case_id, ".mask.vol"), mask.buffer());
  write_file(dose_path(dir, c.meta.case_id), dose.buffer());
  write_file(part(dir, c.meta.case_id, ".meta"), kv.serialize());
}

CaseMeta read_meta(const fs::path& dir, const std::string& case_id) {
  return parse_meta(read_file(part(dir, case_id, ".meta")));
}

Case read_case(const fs::path& dir, const std::string& case_id) {
  const auto kv = KeyValueText::parse(read_file(part(dir, case_id, ".meta")));
  const auto dims = kv.get_words("dims");
  const auto spacing = kv.get_words("spacing");
  if (dims.size() != 3 || spacing.size() != 3) {
    throw DataError("meta for '" + case_id + "': dims and spacing need three values");
  }
  if (kv.get("dtype.ct") != "float32" || kv.get("dtype.mask") != "uint8" ||
      kv.get("dtype.dose") != "float32") {
    throw DataError("meta for '" + case_id + "': unsupported voxel dtype");
  }
  const Dims d{static_cast<int>(parse_int(dims[0])), static_cast<int>(parse_int(dims[1])),
               static_cast<int>(parse_int(dims[2]))};
  if (d.nx < 1 || d.ny < 1 || d.nz < 1) throw DataError("meta for '" + case_id + "': bad dims");
  const Spacing s{parse_double(spacing[0]), parse_double(spacing[1]), parse_double(spacing[2])};

  Case c;
  c.meta = meta_from(kv);
  c.volume.ct = read_grid<float>(part(dir, case_id, ".ct.vol"), d, s);
  c.volume.mask = read_grid<std::uint8_t>(part(dir, case_id, ".mask.vol"), d, s);
  c.volume.dose = read_grid<float>(dose_path(dir, case_id), d, s);
  validate(c.volume);
  return c;
}

void write_manifest(const fs::path& dir, const std::vector<ManifestEntry>& entries) {
  std::string out = "case_id\tclass_id\tsplit\n";
  for (const auto& e : entries) {
    out += e.case_id + "\t" + std::to_string(e.class_id) + "\t" + to_string(e.split) + "\n";
  }
  write_file(dir / "manifest.tsv", out);
}

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
  const std::string text = read_file(dir / "manifest.tsv");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "case_id\tclass_id\tsplit") {
    throw DataError((dir / "manifest.tsv").string() + ": unexpected header");
  }
  std::vector<ManifestEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    ManifestEntry e;
    std::string cls, split;
    if (!std::getline(fields, e.case_id, '\t') || !std::getline(fields, cls, '\t') ||
        !std::getline(fields, split)) {
      throw DataError("manifest: malformed line '" + line + "'");
    }
    e.class_id = static_cast<int>(parse_int(cls));
    e.split = parse_split(split);
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace planret::volumes
