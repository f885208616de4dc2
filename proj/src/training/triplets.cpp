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

#include "planret/training/triplets.hpp"

#include <algorithm>
#include <string>

#include "planret/error.hpp"

namespace planret::training {

TripletSampler::TripletSampler(std::vector<int> class_ids) : class_ids_(std::move(class_ids)) {
  classes_ = class_ids_;
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  members_.resize(classes_.size());
  for (std::size_t i = 0; i < class_ids_.size(); ++i)
    members_[class_slot(class_ids_[i])].push_back(i);
  if (classes_.size() < 2)
    throw DataError("triplet sampling needs at least two classes, found " +
                    std::to_string(classes_.size()));
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    if (members_[c].size() < 2)
      throw DataError("class " + std::to_string(classes_[c]) +
                      " has a single member; no positive can be drawn for it");
  }
}

std::size_t TripletSampler::class_slot(int class_id) const {
  const auto it = std::lower_bound(classes_.begin(), classes_.end(), class_id);
  return static_cast<std::size_t>(it - classes_.begin());
}

TripletBatch TripletSampler::sample(std::size_t batch_size, Rng& rng) const {
  std::vector<std::size_t> anchors(batch_size);
  for (auto& a : anchors) a = static_cast<std::size_t>(rng.below(class_ids_.size()));
  return complete(anchors, rng);
}

TripletBatch TripletSampler::complete(std::span<const std::size_t> anchors, Rng& rng) const {
  TripletBatch b;
  b.anchor.assign(anchors.begin(), anchors.end());
  for (std::size_t a : anchors) {
    const auto& same = members_[class_slot(class_ids_.at(a))];
    // uniform over the classmates with the anchor's own slot skipped
    const auto self = static_cast<std::size_t>(std::find(same.begin(), same.end(), a) - same.begin());
    std::size_t pick = static_cast<std::size_t>(rng.below(same.size() - 1));
    if (pick >= self) ++pick;
    b.positive.push_back(same[pick]);

    const std::size_t others = class_ids_.size() - same.size();
    std::size_t k = static_cast<std::size_t>(rng.below(others));
    for (std::size_t c = 0; c < members_.size(); ++c) {
      if (classes_[c] == class_ids_[a]) continue;
      if (k < members_[c].size()) {
        b.negative.push_back(members_[c][k]);
        break;
      }
      k -= members_[c].size();
    }
  }
  return b;
}

}  // namespace planret::training
