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

#include "planret/autodiff/tensor.hpp"
#include "planret/volumes/phantom.hpp"

namespace planret::volumes {

enum class Interpolation { kTrilinear, kNearest };

/// Align-corners resampling: source corner voxel centers map onto target
/// corner voxel centers. Label grids must use kNearest.
template <typename T>
Grid<T> resample(const Grid<T>& grid, Dims target, Interpolation mode);

struct Window {
  double width = 400.0;
  double level = 0.0;
};

/// Clip to [level - width/2, level + width/2] and map linearly onto [0, 1].
float window_normalize(float hu, Window window = {});
Grid<float> window_normalize(const Grid<float>& ct, Window window = {});

/// Resamples ct and dose trilinearly and the mask by nearest neighbour.
CaseVolume preprocess(const CaseVolume& volume, Dims target);

enum class ChannelVariant { kAnatomy, kDose };
enum class MaskEncoding { kScaledLabel, kOneHot };

int mask_channels(MaskEncoding encoding);

/// (channels, nz, ny, nx) network input. Channel 0 is the windowed CT
/// (anatomy) or dose / prescription clipped to [0, 1] (dose). The contours
/// follow as one label/4 channel or four one-hot channels.
ad::Tensor<float> assemble_channels(const CaseVolume& volume, double prescription_gy,
                                    ChannelVariant variant,
                                    MaskEncoding encoding = MaskEncoding::kScaledLabel,
                                    Window window = {});

}  // namespace planret::volumes
