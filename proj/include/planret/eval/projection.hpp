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
#include <cstddef>
#include <span>
#include <vector>

namespace planret::eval {

struct Projection2d {
  std::vector<std::array<double, 2>> coords;
  std::array<double, 2> variance{};  // eigenvalues of the two kept axes
};

/// Mean-centred projection of `rows` points of dimension `dim` (row-major)
/// onto the top two principal axes. Each axis is signed so that its
/// largest-magnitude loading is positive; ties go to the lower index.
/// Throws DataError when rows < 3 or dim < 2.
Projection2d pca_project_2d(std::span<const float> values, std::size_t rows, std::size_t dim);

}  // namespace planret::eval
