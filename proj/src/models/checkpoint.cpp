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

#include "planret/models/checkpoint.hpp"

#include <string>

#include "planret/binary_io.hpp"
#include "planret/error.hpp"

namespace planret::models {
namespace {

constexpr std::string_view kEnd = "\nend\n";

std::string join_ints(const std::vector<std::int64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

void write_encoder_config(KeyValueText& kv, const EncoderConfig& c) {
  kv.set("widths", join_ints({c.widths.begin(), c.widths.end()}));
  kv.set("groups", c.groups);
  kv.set("negative_slope", c.negative_slope);
  kv.set("embedding_dim", c.embedding_dim);
  kv.set("in_channels", c.in_channels);
  kv.set("input_dims", join_ints({c.input.nx, c.input.ny, c.input.nz}));
}

EncoderConfig read_encoder_config(const KeyValueText& kv) {
  EncoderConfig c;
  c.widths.clear();
  for (const auto& w : kv.get_words("widths")) c.widths.push_back(static_cast<int>(parse_int(w)));
  c.groups = static_cast<int>(kv.get_int("groups"));
  c.negative_slope = kv.get_double("negative_slope");
  c.embedding_dim = static_cast<int>(kv.get_int("embedding_dim"));
  c.in_channels = static_cast<int>(kv.get_int("in_channels"));
  const auto dims = kv.get_words("input_dims");
  if (dims.size() != 3) throw DataError("input_dims must list three extents");
  c.input = {static_cast<int>(parse_int(dims[0])), static_cast<int>(parse_int(dims[1])),
             static_cast<int>(parse_int(dims[2]))};
  return c;
}

std::string encode_checkpoint(const Model<float>& model) {
  KeyValueText kv;
  kv.set("format", std::string(kCheckpointMagic));
  kv.set("version", kCheckpointVersion);
  kv.set("kind", std::string(to_string(model.kind())));
  write_encoder_config(kv, model.config());
  kv.set("byte_order", std::string("little"));
  kv.set("dtype", std::string("float32"));
  kv.set("parameter_count", static_cast<std::int64_t>(model.parameters().size()));
  for (const auto& p : model.parameters()) kv.set("param." + p.name, join_ints(p.value.shape()));
  kv.set("payload_fnv1a", std::to_string(parameter_checksum(model)));

  ByteWriter w;
  w.bytes(kv.serialize());
  w.bytes(std::string(kEnd.substr(1)));
  for (const auto& p : model.parameters()) w.f32s(p.value.data());
  return w.take();
}

Model<float> decode_checkpoint(const std::string& bytes, const std::string& context) {
  const std::string_view text(bytes);
  const std::size_t end = text.find(kEnd);
  if (end == std::string_view::npos) throw DataError(context + ": checkpoint header not terminated");
  const KeyValueText kv = KeyValueText::parse(std::string(text.substr(0, end + 1)));
  if (kv.find("format") != std::string(kCheckpointMagic))
    throw DataError(context + ": not a planret checkpoint");
  if (kv.get_int("version") != kCheckpointVersion)
    throw DataError(context + ": unsupported checkpoint version " + kv.get("version"));
  if (kv.get("byte_order") != "little" || kv.get("dtype") != "float32")
    throw DataError(context + ": unsupported payload encoding");

  EncoderConfig config;
  try {
    config = read_encoder_config(kv);
    config.validate();
  } catch (const ConfigError& e) {
    throw DataError(context + ": " + e.what());
  }
  Model<float> model(parse_model_kind(kv.get("kind")), config, 0);
  if (kv.get_int("parameter_count") != static_cast<std::int64_t>(model.parameters().size()))
    throw DataError(context + ": parameter count disagrees with the declared model");

  const std::string payload = bytes.substr(end + kEnd.size());
  ByteReader r(payload, context);
  for (auto& p : model.parameters()) {
    const auto declared = kv.find("param." + p.name);
    if (!declared) throw DataError(context + ": manifest is missing parameter " + p.name);
    if (*declared != join_ints(p.value.shape()))
      throw DataError(context + ": parameter " + p.name + " declared with shape (" + *declared +
                      ") but the model expects " + ad::shape_to_string(p.value.shape()));
    r.f32s(p.value.data());
  }
  if (r.remaining() != 0)
    throw DataError(context + ": " + std::to_string(r.remaining()) + " trailing payload bytes");
  if (kv.get("payload_fnv1a") != std::to_string(parameter_checksum(model)))
    throw DataError(context + ": payload checksum mismatch");
  return model;
}

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(model));
}

Model<float> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path), path.string());
}

std::uint64_t parameter_checksum(const Model<float>& model) {
  ByteWriter w;
  for (const auto& p : model.parameters()) w.f32s(p.value.data());
  const std::string bytes = w.take();
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
}

}  // namespace planret::models
