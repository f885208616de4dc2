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

#include "planret/kv_text.hpp"

#include <charconv>
#include <sstream>

#include "planret/error.hpp"

namespace planret {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw DataError("malformed number '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& text) {
  std::int64_t v = 0;
  const auto t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw DataError("malformed integer '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

KeyValueText KeyValueText::parse(const std::string& text) {
  KeyValueText kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + t +
                      "'");
    }
    kv.entries_.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

void KeyValueText::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KeyValueText::set(const std::string& key, double value) { set(key, format_double(value)); }

void KeyValueText::set(const std::string& key, std::int64_t value) {
  set(key, std::to_string(value));
}

bool KeyValueText::contains(const std::string& key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueText::find(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& KeyValueText::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw DataError("missing key '" + key + "'");
}

double KeyValueText::get_double(const std::string& key) const {
  try {
    return parse_double(get(key));
  } catch (const DataError& e) {
    throw DataError("key '" + key + "': " + e.what());
  }
}

std::int64_t KeyValueText::get_int(const std::string& key) const {
  try {
    return parse_int(get(key));
  } catch (const DataError& e) {
    throw DataError("key '" + key + "': " + e.what());
  }
}

std::vector<std::string> KeyValueText::get_words(const std::string& key) const {
  return split_words(get(key));
}

std::string KeyValueText::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace planret
