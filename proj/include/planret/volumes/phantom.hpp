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

// Synthetic stand-in anatomy: an elliptical body, one or two spherical PTV
// lobes, an optional lower-dose PTV shell, and two organs at risk whose
// placement depends on the body site.

#include <array>
#include <cstdint>
#include <string>

#include "planret/volumes/criteria.hpp"
#include "planret/volumes/grid.hpp"

namespace planret::volumes {

enum MaskLabel : std::uint8_t {
  kBackground = 0,
  kPrimaryPtv = 1,
  kSecondaryPtv = 2,
  kOarA = 3,
  kOarB = 4,
};

inline constexpr float kAirHu = -1000.0f;

struct CaseVolume {
  Grid<float> ct;           // Hounsfield units
  Grid<std::uint8_t> mask;  // labels 0..4
  Grid<float> dose;         // Gy, >= 0

  const Dims& dims() const { return ct.dims; }
  const Spacing& spacing() const { return ct.spacing; }
};

/// Throws DataError unless the three grids share dims, labels are <= 4 and
/// dose is non-negative.
void validate(const CaseVolume& volume);

struct Case {
  CaseVolume volume;
  CaseMeta meta;
};

/// Geometry is expressed in normalized coordinates where the grid spans
/// [-1, 1] between its corner voxel centers. PTV radii are fractions of the
/// body width, defined as the mean of the lateral and anterior-posterior
/// body diameters.
struct PhantomSpec {
  ClassCriteria criteria;
  std::uint64_t seed = 0;
  Dims dims{16, 16, 16};
  Spacing spacing{4.0, 4.0, 4.0};
  double body_radius_jitter = 0.04;
  std::array<double, 2> small_ptv_fraction{0.08, 0.12};
  std::array<double, 2> large_ptv_fraction{0.18, 0.25};
  double bilateral_lobe_scale = 0.7;
  double centroid_jitter = 0.05;
  double ct_noise_hu = 20.0;
  double prescription_gy = 70.0;
  double dose_falloff_mm = 6.0;
};

/// Deterministic for a fixed spec. Throws DataError for a degenerate spec
/// (PTV not contained in the body, overlapping size ranges, tiny grids).
Case generate_phantom(const PhantomSpec& spec, const std::string& case_id);

/// Prescription inside the primary PTV with a Gaussian falloff of width
/// `falloff_mm` in distance from it; a secondary PTV, when present, holds
/// 80% of prescription with the same falloff.
Grid<float> synthesize_dose(const CaseVolume& volume, double prescription_gy, double falloff_mm);

/// Reads the four criteria back from geometry alone: site from body aspect
/// ratio, target levels from presence of label 2, laterality from the
/// primary-PTV centroid and midline occupancy, size from a voxel-count
/// threshold at 15% of body width.
ClassCriteria recover_criteria(const CaseVolume& volume);

/// Exact squared Euclidean distance (mm^2) to the nearest voxel with `label`.
Grid<double> squared_distance_to_label(const Grid<std::uint8_t>& mask, std::uint8_t label);

}  // namespace planret::volumes
