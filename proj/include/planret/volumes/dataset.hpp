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
#include <span>
#include <vector>

#include "planret/volumes/phantom.hpp"

namespace planret::volumes {

/// 235 / 43 / 127 out of 405 cases.
inline constexpr std::array<double, 3> kDefaultSplitFractions{235.0 / 405.0, 43.0 / 405.0,
                                                              127.0 / 405.0};

struct DatasetConfig {
  int per_class = 10;
  std::uint64_t seed = 1;
  std::array<double, 3> split_fractions = kDefaultSplitFractions;
  /// Template for every phantom; criteria and seed are filled per case.
  PhantomSpec phantom;
  int threads = 1;
};

/// Split sizes by largest remainder over the whole dataset, so totals match
/// N * fraction to within one case. Within a class, members are spread evenly
/// across the train / validation / test sequence.
std::vector<Split> assign_splits(std::span<const int> class_ids,
                                 const std::array<double, 3>& fractions, std::uint64_t seed);

/// per_class phantoms for each of the 32 classes, generated in parallel with
/// per-case seeds derived from (seed, case index); output is independent of
/// the thread count. Case ids are "case_NNNN" in class-major order.
std::vector<Case> make_dataset(const DatasetConfig& config);

}  // namespace planret::volumes
