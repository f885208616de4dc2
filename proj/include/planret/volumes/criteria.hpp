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

#include <array>
#include <cstdint>
#include <string>

namespace planret::volumes {

enum class BodySite : std::uint8_t { kProstate = 0, kHeadAndNeck = 1 };
enum class PtvSize : std::uint8_t { kSmall = 0, kLarge = 1 };
enum class PtvLocation : std::uint8_t { kLeft = 0, kRight = 1, kCenter = 2, kBilateral = 3 };
enum class Split : std::uint8_t { kTrain = 0, kValidation = 1, kTest = 2 };

inline constexpr int kNumClasses = 32;

/// The four classification criteria. Target levels are binary: one
/// prescription level or several.
struct ClassCriteria {
  BodySite site = BodySite::kProstate;
  bool multi_target = false;
  PtvSize size = PtvSize::kSmall;
  PtvLocation location = PtvLocation::kLeft;

  friend bool operator==(const ClassCriteria&, const ClassCriteria&) = default;
};

/// Mixed-radix code site*16 + levels*8 + size*4 + location.
int classify_case(const ClassCriteria& criteria);
ClassCriteria criteria_from_class(int class_id);

struct CaseMeta {
  std::string case_id;
  ClassCriteria criteria;
  int class_id = 0;
  Split split = Split::kTrain;
  std::string protocol;
  double prescription_gy = 70.0;

  friend bool operator==(const CaseMeta&, const CaseMeta&) = default;
};

/// Protocol tag derived from the criteria, e.g. "prostate_single_level".
std::string default_protocol(const ClassCriteria& criteria);

std::string to_string(BodySite v);
std::string to_string(PtvSize v);
std::string to_string(PtvLocation v);
std::string to_string(Split v);
std::string target_levels_name(bool multi_target);

BodySite parse_site(const std::string& s);
PtvSize parse_size(const std::string& s);
PtvLocation parse_location(const std::string& s);
Split parse_split(const std::string& s);
bool parse_target_levels(const std::string& s);

}  // namespace planret::volumes
