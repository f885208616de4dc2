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

// Line-oriented "key = value" documents used for case sidecars, checkpoint
// headers and training reports. Order is preserved; '#' starts a comment.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace planret {

class KeyValueText {
 public:
  static KeyValueText parse(const std::string& text);

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }

  bool contains(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;
  /// Throws DataError naming the key when it is absent or malformed.
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::vector<std::string> get_words(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string serialize() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest text that parses back to the identical double.
std::string format_double(double value);
double parse_double(const std::string& text);
std::int64_t parse_int(const std::string& text);
std::vector<std::string> split_words(const std::string& text);

}  // namespace planret
