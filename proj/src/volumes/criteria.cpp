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

#include "planret/volumes/criteria.hpp"

#include "planret/error.hpp"

namespace planret::volumes {

int classify_case(const ClassCriteria& c) {
  return static_cast<int>(c.site) * 16 + (c.multi_target ? 8 : 0) + static_cast<int>(c.size) * 4 +
         static_cast<int>(c.location);
}

ClassCriteria criteria_from_class(int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw DataError("class id " + std::to_string(class_id) + " outside 0..31");
  }
  ClassCriteria c;
  c.site = static_cast<BodySite>(class_id / 16);
  c.multi_target = (class_id / 8) % 2 == 1;
  c.size = static_cast<PtvSize>((class_id / 4) % 2);
  c.location = static_cast<PtvLocation>(class_id % 4);
  return c;
}

std::string default_protocol(const ClassCriteria& c) {
  return to_string(c.site) + "_" + target_levels_name(c.multi_target);
}

std::string to_string(BodySite v) {
  return v == BodySite::kProstate ? "prostate" : "head_and_neck";
}

std::string to_string(PtvSize v) { return v == PtvSize::kSmall ? "small" : "large"; }

std::string to_string(PtvLocation v) {
  switch (v) {
    case PtvLocation::kLeft: return "left";
    case PtvLocation::kRight: return "right";
    case PtvLocation::kCenter: return "center";
    case PtvLocation::kBilateral: return "bilateral";
  }
  return "?";
}

std::string to_string(Split v) {
  switch (v) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

std::string target_levels_name(bool multi_target) {
  return multi_target ? "multi_level" : "single_level";
}

BodySite parse_site(const std::string& s) {
  if (s == "prostate") return BodySite::kProstate;
  if (s == "head_and_neck") return BodySite::kHeadAndNeck;
  throw DataError("unknown body site '" + s + "'");
}

PtvSize parse_size(const std::string& s) {
  if (s == "small") return PtvSize::kSmall;
  if (s == "large") return PtvSize::kLarge;
  throw DataError("unknown PTV size '" + s + "'");
}

PtvLocation parse_location(const std::string& s) {
  if (s == "left") return PtvLocation::kLeft;
  if (s == "right") return PtvLocation::kRight;
  if (s == "center") return PtvLocation::kCenter;
  if (s == "bilateral") return PtvLocation::kBilateral;
  throw DataError("unknown PTV location '" + s + "'");
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw DataError("unknown split '" + s + "'");
}

bool parse_target_levels(const std::string& s) {
  if (s == "single_level") return false;
  if (s == "multi_level") return true;
  throw DataError("unknown target levels '" + s + "'");
}

}  // namespace planret::volumes
