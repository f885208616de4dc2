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
#include <cstdint>
#include <string>
#include <vector>

namespace planret::volumes {

/// Voxel counts along x (lateral), y (anterior-posterior), z (cranio-caudal).
struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t voxels() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Voxel pitch in millimetres.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  friend bool operator==(const Spacing&, const Spacing&) = default;
};

std::string to_string(const Dims& d);

/// Voxel block stored z-major: index = (z * ny + y) * nx + x.
template <typename T>
struct Grid {
  Dims dims;
  Spacing spacing;
  std::vector<T> data;

  Grid() = default;
  Grid(Dims d, Spacing s, T fill = T{}) : dims(d), spacing(s), data(d.voxels(), fill) {}

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * static_cast<std::size_t>(dims.ny) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(dims.nx) +
           static_cast<std::size_t>(x);
  }
  T& at(int x, int y, int z) { return data[index(x, y, z)]; }
  const T& at(int x, int y, int z) const { return data[index(x, y, z)]; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

}  // namespace planret::volumes
