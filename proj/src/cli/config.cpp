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

#include "planret/cli/config.hpp"

#include <cmath>
#include <json.hpp>

#include "planret/binary_io.hpp"
#include "planret/error.hpp"

namespace planret::cli {
namespace {

using Json = nlohmann::ordered_json;

Json dims_json(const volumes::Dims& d) { return Json::array({d.nx, d.ny, d.nz}); }

std::string split_name(volumes::Split s) { return volumes::to_string(s); }

// Overlays `user` onto `base`; every key in `user` must already exist.
void merge(Json& base, const Json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError("config " + where + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    Json& slot = base[key];
    if (slot.is_object()) {
      merge(slot, value, path);
    } else {
      slot = value;
    }
  }
}

class Reader {
 public:
  explicit Reader(const Json& root) : root_(root) {}

  template <typename T>
  T get(const std::string& path) const {
    const Json& v = at(path);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
            throw ConfigError("");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("config key '" + path + "' has the wrong type: " + v.dump());
    }
  }

  volumes::Dims dims(const std::string& path) const {
    const auto v = ints(path);
    if (v.size() != 3) throw ConfigError("config key '" + path + "' needs three extents");
    return {v[0], v[1], v[2]};
  }

  std::vector<int> ints(const std::string& path) const {
    const Json& v = at(path);
    if (!v.is_array()) throw ConfigError("config key '" + path + "' must be an array");
    std::vector<int> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) throw ConfigError("config key '" + path + "' holds a non-integer");
      out.push_back(x.get<int>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& path) const {
    const Json& v = at(path);
    if (!v.is_array()) throw ConfigError("config key '" + path + "' must be an array");
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) throw ConfigError("config key '" + path + "' holds a non-string");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  const Json& at(const std::string& path) const {
    const Json* node = &root_;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      node = &node->at(key);
      if (dot == std::string::npos) return *node;
      start = dot + 1;
    }
  }

 private:
  const Json& root_;
};

Json& walk(Json& root, const std::string& path) {
  Json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) {
      throw ConfigError("unknown config key '" + path + "'");
    }
    node = &(*node)[key];
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

Json default_json() { return Json::parse(to_json(RunConfig{})); }

RunConfig from_json(const Json& j) {
  const Reader r(j);
  RunConfig c;
  c.command = r.get<std::string>("command");
  c.seed = r.get<std::uint64_t>("seed");
  c.threads = r.get<int>("threads");
  c.out = r.get<std::string>("out");

  c.data.dir = r.get<std::string>("data.dir");
  c.data.per_class = r.get<int>("data.per_class");
  c.data.dims = r.dims("data.dims");
  const Json& fr = r.at("data.split_fractions");
  if (!fr.is_array() || fr.size() != 3) throw ConfigError("data.split_fractions needs three values");
  for (int i = 0; i < 3; ++i) {
    if (!fr[i].is_number()) throw ConfigError("data.split_fractions holds a non-number");
    c.data.split_fractions[i] = fr[i].get<double>();
  }

  c.kind = models::parse_model_kind(r.get<std::string>("model.kind"));
  c.encoder.widths = r.ints("model.encoder.widths");
  c.encoder.groups = r.get<int>("model.encoder.groups");
  c.encoder.negative_slope = r.get<double>("model.encoder.negative_slope");
  c.encoder.embedding_dim = r.get<int>("model.encoder.embedding_dim");
  c.encoder.input = r.dims("model.encoder.input_dims");

  c.loss.alpha = r.get<double>("loss.alpha");
  c.loss.lambda = r.get<double>("loss.lambda");
  c.loss.margin = r.get<double>("loss.margin");
  c.loss.beta = r.get<double>("loss.beta");
  c.loss.gamma = r.get<double>("loss.gamma");
  c.loss.symmetric_simsiam = r.get<bool>("loss.symmetric_simsiam");
  c.loss.mmd_bandwidth = r.get<double>("loss.mmd_bandwidth");

  c.train.epochs = r.get<int>("train.epochs");
  c.train.batch_size = r.get<int>("train.batch_size");
  c.train.optimizer.kind = ad::parse_optimizer(r.get<std::string>("train.optimizer.kind"));
  c.train.optimizer.lr = r.get<double>("train.optimizer.lr");
  c.train.optimizer.beta1 = r.get<double>("train.optimizer.beta1");
  c.train.optimizer.beta2 = r.get<double>("train.optimizer.beta2");
  c.train.optimizer.eps = r.get<double>("train.optimizer.eps");

  c.input.encoding = parse_mask_encoding(r.get<std::string>("input.mask_encoding"));
  c.input.window.width = r.get<double>("input.window.width");
  c.input.window.level = r.get<double>("input.window.level");
  c.encoder.in_channels = training::input_channels(c.input);

  c.checkpoint = r.get<std::string>("paths.checkpoint");
  c.index = r.get<std::string>("paths.index");
  c.database_split = volumes::parse_split(r.get<std::string>("index.split"));

  c.query.case_id = r.get<std::string>("query.case_id");
  c.query.volume = r.get<std::string>("query.volume");
  c.query.k = r.get<int>("query.k");
  c.query.filter = r.strings("query.filter");
  c.query.slices = r.get<bool>("query.slices");

  c.eval.max_k = r.get<int>("eval.max_k");
  c.eval.query_split = volumes::parse_split(r.get<std::string>("eval.split"));
  c.eval.weighting.base = r.get<double>("eval.score.base");
  c.eval.weighting.exponent_offset = r.get<int>("eval.score.exponent_offset");
  const Json& ms = r.at("eval.models");
  if (!ms.is_array()) throw ConfigError("eval.models must be an array");
  for (const auto& m : ms) {
    if (!m.is_object() || !m.contains("name") || !m.contains("checkpoint") || m.size() != 2 ||
        !m["name"].is_string() || !m["checkpoint"].is_string()) {
      throw ConfigError("eval.models entries need exactly a string name and checkpoint");
    }
    c.eval.models.push_back({m["name"].get<std::string>(), m["checkpoint"].get<std::string>()});
  }
  return c;
}

}  // namespace

void RunConfig::validate() const {
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (data.per_class < 1) throw ConfigError("data.per_class must be at least 1");
  for (int n : {data.dims.nx, data.dims.ny, data.dims.nz}) {
    if (n < 1) throw ConfigError("data.dims must be positive");
  }
  double total = 0;
  for (double f : data.split_fractions) {
    if (!(f >= 0.0)) throw ConfigError("data.split_fractions must be nonnegative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("data.split_fractions must sum to 1");
  encoder.validate();
  loss.validate();
  if (train.epochs < 1) throw ConfigError("train.epochs must be at least 1");
  if (train.batch_size < 1) throw ConfigError("train.batch_size must be at least 1");
  if (!(train.optimizer.lr > 0.0)) throw ConfigError("train.optimizer.lr must be positive");
  if (!(input.window.width > 0.0)) throw ConfigError("input.window.width must be positive");
  if (query.k < 1) throw ConfigError("query.k must be at least 1");
  if (eval.max_k < 1) throw ConfigError("eval.max_k must be at least 1");
  if (!(eval.weighting.base > 0.0)) throw ConfigError("eval.score.base must be positive");
  for (std::size_t i = 0; i < eval.models.size(); ++i) {
    const auto& name = eval.models[i].name;
    if (name.empty() || name.find_first_of(",/\\ \n") != std::string::npos)
      throw ConfigError("eval model name '" + name + "' must be nonempty without , / or spaces");
    for (std::size_t j = 0; j < i; ++j) {
      if (eval.models[j].name == name) throw ConfigError("duplicate eval model name '" + name + "'");
    }
  }
}

Override parse_override(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + text + "' is not of the form key.path=value");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

RunConfig parse_config(const std::string& json_text, const std::vector<Override>& overrides) {
  Json resolved = default_json();
  if (!json_text.empty()) {
    Json user;
    try {
      user = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    merge(resolved, user, "");
  }
  for (const auto& o : overrides) {
    Json& slot = walk(resolved, o.path);
    if (slot.is_object()) throw ConfigError("override '" + o.path + "' names a section");
    Json value = Json::parse(o.value, nullptr, false);
    if (value.is_discarded()) value = o.value;
    slot = std::move(value);
  }
  RunConfig c;
  try {
    c = from_json(resolved);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

RunConfig resolve_config(const std::filesystem::path& file, const std::vector<Override>& overrides) {
  std::string text;
  if (!file.empty()) {
    try {
      text = read_file(file);
    } catch (const IoError& e) {
      throw ConfigError(std::string("cannot read config: ") + e.what());
    }
  }
  return parse_config(text, overrides);
}

std::string to_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["data"] = {{"dir", c.data.dir},
               {"per_class", c.data.per_class},
               {"dims", dims_json(c.data.dims)},
               {"split_fractions", c.data.split_fractions}};
  j["model"] = {{"kind", models::to_string(c.kind)},
                {"encoder",
                 {{"widths", c.encoder.widths},
                  {"groups", c.encoder.groups},
                  {"negative_slope", c.encoder.negative_slope},
                  {"embedding_dim", c.encoder.embedding_dim},
                  {"input_dims", dims_json(c.encoder.input)}}}};
  j["loss"] = {{"alpha", c.loss.alpha},
               {"lambda", c.loss.lambda},
               {"margin", c.loss.margin},
               {"beta", c.loss.beta},
               {"gamma", c.loss.gamma},
               {"symmetric_simsiam", c.loss.symmetric_simsiam},
               {"mmd_bandwidth", c.loss.mmd_bandwidth}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"optimizer",
                 {{"kind", ad::optimizer_name(c.train.optimizer.kind)},
                  {"lr", c.train.optimizer.lr},
                  {"beta1", c.train.optimizer.beta1},
                  {"beta2", c.train.optimizer.beta2},
                  {"eps", c.train.optimizer.eps}}}};
  j["input"] = {{"mask_encoding", to_string(c.input.encoding)},
                {"window", {{"width", c.input.window.width}, {"level", c.input.window.level}}}};
  j["paths"] = {{"checkpoint", c.checkpoint}, {"index", c.index}};
  j["index"] = {{"split", split_name(c.database_split)}};
  j["query"] = {{"case_id", c.query.case_id},
                {"volume", c.query.volume},
                {"k", c.query.k},
                {"filter", c.query.filter},
                {"slices", c.query.slices}};
  Json models = Json::array();
  for (const auto& m : c.eval.models) models.push_back({{"name", m.name}, {"checkpoint", m.checkpoint}});
  j["eval"] = {{"max_k", c.eval.max_k},
               {"split", split_name(c.eval.query_split)},
               {"score",
                {{"base", c.eval.weighting.base},
                 {"exponent_offset", c.eval.weighting.exponent_offset}}},
               {"models", models}};
  return j.dump(2) + "\n";
}

std::string to_string(volumes::MaskEncoding encoding) {
  return encoding == volumes::MaskEncoding::kOneHot ? "one_hot" : "scaled_label";
}

volumes::MaskEncoding parse_mask_encoding(const std::string& name) {
  if (name == "scaled_label") return volumes::MaskEncoding::kScaledLabel;
  if (name == "one_hot") return volumes::MaskEncoding::kOneHot;
  throw ConfigError("unknown mask encoding '" + name + "' (expected scaled_label or one_hot)");
}

}  // namespace planret::cli
