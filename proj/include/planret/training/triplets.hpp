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

#include <cstddef>
#include <span>
#include <vector>

#include "planret/rng.hpp"

namespace planret::training {

/// Indices into the case list the sampler was built from.
struct TripletBatch {
  std::vector<std::size_t> anchor;
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
};

class TripletSampler {
 public:
  /// Throws DataError naming the first class with a single member, or when
  /// fewer than two classes are present.
  explicit TripletSampler(std::vector<int> class_ids);

  /// Uniform anchors with replacement.
  TripletBatch sample(std::size_t batch_size, Rng& rng) const;
  /// Positives uniform over the anchor's classmates, negatives uniform over
  /// all cases of other classes.
  TripletBatch complete(std::span<const std::size_t> anchors, Rng& rng) const;

  std::size_t size() const noexcept { return class_ids_.size(); }
  int class_of(std::size_t i) const { return class_ids_.at(i); }

 private:
  std::vector<int> class_ids_;
  std::vector<int> classes_;                    // sorted distinct ids
  std::vector<std::vector<std::size_t>> members_;  // parallel to classes_
  std::size_t class_slot(int class_id) const;
};

}  // namespace planret::training
