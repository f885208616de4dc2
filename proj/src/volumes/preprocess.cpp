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

#include "planret/volumes/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "planret/error.hpp"

namespace planret::volumes {
namespace {

struct Tap {
  int i0;
  int i1;
  double frac;
};

std::vector<Tap> axis_taps(int source, int target) {
  std::vector<Tap> taps(static_cast<std::size_t>(target));
  const double ratio = static_cast<double>(source - 1) / static_cast<double>(target - 1);
  for (int t = 0; t < target; ++t) {
    const double s = t * ratio;
    int i0 = static_cast<int>(std::floor(s));
    i0 = std::clamp(i0, 0, source - 2);
    taps[static_cast<std::size_t>(t)] = {i0, i0 + 1, s - i0};
  }
  return taps;
}

std::vector<int> axis_nearest(int source, int target) {
  std::vector<int> idx(static_cast<std::size_t>(target));
  const double ratio = static_cast<double>(source - 1) / static_cast<double>(target - 1);
  for (int t = 0; t < target; ++t) {
    idx[static_cast<std::size_t>(t)] =
        std::clamp(static_cast<int>(std::floor(t * ratio + 0.5)), 0, source - 1);
  }
  return idx;
}

}  // namespace

template <typename T>
Grid<T> resample(const Grid<T>& grid, Dims target, Interpolation mode) {
  const Dims s = grid.dims;
  if (s.nx < 2 || s.ny < 2 || s.nz < 2) {
    throw DataError("resample: source dims " + to_string(s) + " must be >= 2 per axis");
  }
  if (target.nx < 2 || target.ny < 2 || target.nz < 2) {
    throw DataError("resample: target dims " + to_string(target) + " must be >= 2 per axis");
  }
  Spacing spacing{grid.spacing.x * (s.nx - 1) / (target.nx - 1),
                  grid.spacing.y * (s.ny - 1) / (target.ny - 1),
                  grid.spacing.z * (s.nz - 1) / (target.nz - 1)};
  Grid<T> out(target, spacing);

  if (mode == Interpolation::kNearest) {
    const auto ix = axis_nearest(s.nx, target.nx);
    const auto iy = axis_nearest(s.ny, target.ny);
    const auto iz = axis_nearest(s.nz, target.nz);
    for (int z = 0; z < target.nz; ++z)
      for (int y = 0; y < target.ny; ++y)
        for (int x = 0; x < target.nx; ++x) {
          out.at(x, y, z) = grid.at(ix[static_cast<std::size_t>(x)], iy[static_cast<std::size_t>(y)],
                                    iz[static_cast<std::size_t>(z)]);
        }
    return out;
  }

  if constexpr (!std::is_floating_point_v<T>) {
    throw DataError("resample: trilinear interpolation requires a floating-point grid");
  } else {
    const auto tx = axis_taps(s.nx, target.nx);
    const auto ty = axis_taps(s.ny, target.ny);
    const auto tz = axis_taps(s.nz, target.nz);
    for (int z = 0; z < target.nz; ++z) {
      const Tap& c = tz[static_cast<std::size_t>(z)];
      for (int y = 0; y < target.ny; ++y) {
        const Tap& b = ty[static_cast<std::size_t>(y)];
        for (int x = 0; x < target.nx; ++x) {
          const Tap& a = tx[static_cast<std::size_t>(x)];
          auto v = [&](int xi, int yi, int zi) { return static_cast<double>(grid.at(xi, yi, zi)); };
          const double c00 = v(a.i0, b.i0, c.i0) * (1 - a.frac) + v(a.i1, b.i0, c.i0) * a.frac;
          const double c10 = v(a.i0, b.i1, c.i0) * (1 - a.frac) + v(a.i1, b.i1, c.i0) * a.frac;
          const double c01 = v(a.i0, b.i0, c.i1) * (1 - a.frac) + v(a.i1, b.i0, c.i1) * a.frac;
          const double c11 = v(a.i0, b.i1, c.i1) * (1 - a.frac) + v(a.i1, b.i1, c.i1) * a.frac;
          const double c0 = c00 * (1 - b.frac) + c10 * b.frac;
          const double c1 = c01 * (1 - b.frac) + c11 * b.frac;
          out.at(x, y, z) = static_cast<T>(c0 * (1 - c.frac) + c1 * c.frac);
        }
      }
    }
    return out;
  }
}

template Grid<float> resample(const Grid<float>&, Dims, Interpolation);
template Grid<double> resample(const Grid<double>&, Dims, Interpolation);
template Grid<std::uint8_t> resample(const Grid<std::uint8_t>&, Dims, Interpolation);

float window_normalize(float hu, Window window) {
  if (!(window.width > 0.0)) throw ConfigError("window width must be positive");
  const double lo = window.level - window.width / 2.0;
  const double hi = window.level + window.width / 2.0;
  const double clipped = std::clamp(static_cast<double>(hu), lo, hi);
  return static_cast<float>((clipped - lo) / window.width);
}

Grid<float> window_normalize(const Grid<float>& ct, Window window) {
  Grid<float> out(ct.dims, ct.spacing);
  for (std::size_t i = 0; i < ct.data.size(); ++i) out.data[i] = window_normalize(ct.data[i], window);
  return out;
}

CaseVolume preprocess(const CaseVolume& volume, Dims target) {
  CaseVolume out;
  out.ct = resample(volume.ct, target, Interpolation::kTrilinear);
  out.mask = resample(volume.mask, target, Interpolation::kNearest);
  out.dose = resample(volume.dose, target, Interpolation::kTrilinear);
  for (auto& v : out.dose.data) v = std::max(v, 0.0f);
  return out;
}

int mask_channels(MaskEncoding encoding) { return encoding == MaskEncoding::kOneHot ? 4 : 1; }

ad::Tensor<float> assemble_channels(const CaseVolume& volume, double prescription_gy,
                                    ChannelVariant variant, MaskEncoding encoding,
                                    Window window) {
  const Dims d = volume.dims();
  const std::size_t n = d.voxels();
  const int channels = 1 + mask_channels(encoding);
  ad::Tensor<float> t(ad::Shape{channels, d.nz, d.ny, d.nx});
  float* p = t.data().data();
  if (variant == ChannelVariant::kAnatomy) {
    for (std::size_t i = 0; i < n; ++i) p[i] = window_normalize(volume.ct.data[i], window);
  } else {
    if (!(prescription_gy > 0.0)) throw DataError("prescription must be positive");
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<float>(std::clamp(volume.dose.data[i] / prescription_gy, 0.0, 1.0));
    }
  }
  if (encoding == MaskEncoding::kScaledLabel) {
    for (std::size_t i = 0; i < n; ++i) p[n + i] = static_cast<float>(volume.mask.data[i]) / 4.0f;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const int label = volume.mask.data[i];
      if (label > 0) p[static_cast<std::size_t>(label) * n + i] = 1.0f;
    }
  }
  return t;
}

}  // namespace planret::volumes
