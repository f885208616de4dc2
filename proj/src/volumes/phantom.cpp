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

#include "planret/volumes/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "planret/error.hpp"
#include "planret/rng.hpp"

namespace planret::volumes {
namespace {

constexpr double kPi = 3.14159265358979323846;

double half_extent(int n) { return (n - 1) / 2.0; }

// Nearest voxel center, in normalized coordinates.
double snap(double u, double h) { return (std::round(u * h + h) - h) / h; }

// Voxel center at or beyond |u|, keeping the sign of u.
double snap_outward(double u, double h) {
  const double v = u * h + h;
  const double idx = u >= 0.0 ? std::ceil(v - 1e-9) : std::floor(v + 1e-9);
  return (idx - h) / h;
}

// Voxel center at or inside |u|, keeping the sign of u.
double snap_inward(double u, double h) {
  const double v = u * h + h;
  const double idx = u >= 0.0 ? std::floor(v + 1e-9) : std::ceil(v - 1e-9);
  return (idx - h) / h;
}

struct Lobe {
  double cx, cy, cz, radius;
};

struct Body {
  double rx, ry, rz;
  bool contains(double x, double y, double z) const {
    return (x / rx) * (x / rx) + (y / ry) * (y / ry) + (z / rz) * (z / rz) <= 1.0;
  }
};

double lobe_distance(const Lobe& l, double x, double y, double z) {
  return std::sqrt((x - l.cx) * (x - l.cx) + (y - l.cy) * (y - l.cy) + (z - l.cz) * (z - l.cz));
}

// Lower envelope of parabolas (Felzenszwalb-Huttenlocher), one line at a time.
void distance_transform_1d(std::vector<double>& f, double pitch, std::vector<int>& v,
                           std::vector<double>& zb, std::vector<double>& out) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    const double xq = q * pitch;
    while (k >= 0) {
      const double xv = v[k] * pitch;
      const double s = ((f[q] + xq * xq) - (f[v[k]] + xv * xv)) / (2.0 * (xq - xv));
      if (s <= zb[k]) {
        --k;
      } else {
        break;
      }
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      zb[0] = -kInf;
    } else {
      const double xv = v[k] * pitch;
      const double s = ((f[q] + xq * xq) - (f[v[k]] + xv * xv)) / (2.0 * (xq - xv));
      ++k;
      v[k] = q;
      zb[k] = s;
    }
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    const double xq = q * pitch;
    while (j < k && zb[j + 1] < xq) ++j;
    const double d = xq - v[j] * pitch;
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

void validate(const CaseVolume& v) {
  if (v.ct.dims.voxels() == 0) throw DataError("case volume has no voxels");
  if (!(v.mask.dims == v.ct.dims) || !(v.dose.dims == v.ct.dims) ||
      v.ct.data.size() != v.ct.dims.voxels() || v.mask.data.size() != v.ct.dims.voxels() ||
      v.dose.data.size() != v.ct.dims.voxels()) {
    throw DataError("ct, mask and dose grids do not share dims " + to_string(v.ct.dims));
  }
  for (const auto label : v.mask.data) {
    if (label > kOarB) throw DataError("mask label " + std::to_string(label) + " outside 0..4");
  }
  for (const auto d : v.dose.data) {
    if (!(d >= 0.0f)) throw DataError("dose grid has negative or non-finite values");
  }
}

std::string to_string(const Dims& d) {
  return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

Grid<double> squared_distance_to_label(const Grid<std::uint8_t>& mask, std::uint8_t label) {
  const Dims d = mask.dims;
  Grid<double> out(d, mask.spacing, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    if (mask.data[i] == label) out.data[i] = 0.0;
  }
  const int longest = std::max({d.nx, d.ny, d.nz});
  std::vector<double> f(static_cast<std::size_t>(longest)), res(static_cast<std::size_t>(longest));
  std::vector<int> v(static_cast<std::size_t>(longest));
  std::vector<double> zb(static_cast<std::size_t>(longest) + 1);
  auto pass = [&](int n, double pitch, auto&& ref) {
    f.resize(static_cast<std::size_t>(n));
    res.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = ref(i);
    distance_transform_1d(f, pitch, v, zb, res);
    for (int i = 0; i < n; ++i) ref(i) = res[static_cast<std::size_t>(i)];
  };
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      pass(d.nx, mask.spacing.x, [&](int i) -> double& { return out.at(i, y, z); });
  for (int z = 0; z < d.nz; ++z)
    for (int x = 0; x < d.nx; ++x)
      pass(d.ny, mask.spacing.y, [&](int i) -> double& { return out.at(x, i, z); });
  for (int y = 0; y < d.ny; ++y)
    for (int x = 0; x < d.nx; ++x)
      pass(d.nz, mask.spacing.z, [&](int i) -> double& { return out.at(x, y, i); });
  return out;
}

Grid<float> synthesize_dose(const CaseVolume& volume, double prescription_gy, double falloff_mm) {
  if (!(falloff_mm > 0.0)) throw DataError("dose falloff must be positive");
  const auto& mask = volume.mask;
  const bool has_primary =
      std::find(mask.data.begin(), mask.data.end(), kPrimaryPtv) != mask.data.end();
  if (!has_primary) throw DataError("cannot synthesize dose: mask has no primary PTV (label 1)");
  const bool has_secondary =
      std::find(mask.data.begin(), mask.data.end(), kSecondaryPtv) != mask.data.end();

  const Grid<double> d1 = squared_distance_to_label(mask, kPrimaryPtv);
  Grid<double> d2;
  if (has_secondary) d2 = squared_distance_to_label(mask, kSecondaryPtv);
  const double inv = 1.0 / (2.0 * falloff_mm * falloff_mm);
  Grid<float> dose(mask.dims, mask.spacing, 0.0f);
  for (std::size_t i = 0; i < dose.data.size(); ++i) {
    double v = prescription_gy * std::exp(-d1.data[i] * inv);
    if (has_secondary) v = std::max(v, 0.8 * prescription_gy * std::exp(-d2.data[i] * inv));
    dose.data[i] = static_cast<float>(v);
  }
  return dose;
}

Case generate_phantom(const PhantomSpec& spec, const std::string& case_id) {
  const Dims d = spec.dims;
  if (d.nx < 8 || d.ny < 8 || d.nz < 8) {
    throw DataError("phantom grid " + to_string(d) + " is smaller than 8 voxels per axis");
  }
  const auto& sr = spec.small_ptv_fraction;
  const auto& lr = spec.large_ptv_fraction;
  if (!(sr[0] > 0.0 && sr[0] <= sr[1] && sr[1] < lr[0] && lr[0] <= lr[1])) {
    throw DataError("PTV radius ranges must be positive, ordered, and small strictly below large");
  }

  Rng rng(spec.seed);
  const ClassCriteria& c = spec.criteria;
  const bool prostate = c.site == BodySite::kProstate;
  const double hx = half_extent(d.nx), hy = half_extent(d.ny), hz = half_extent(d.nz);
  const double j = spec.body_radius_jitter;

  Body body{};
  body.rx = (prostate ? 0.90 : 0.66) + rng.uniform(-j, j);
  body.ry = (prostate ? 0.50 : 0.66) + rng.uniform(-j, j);
  body.rz = 0.92 + rng.uniform(-j / 2, j / 2);
  const double body_width = body.rx + body.ry;

  const auto& range = c.size == PtvSize::kSmall ? sr : lr;
  const double radius = rng.uniform(range[0], range[1]) * body_width;
  const double cy = snap(rng.uniform(-spec.centroid_jitter, spec.centroid_jitter), hy);
  const double cz = snap(rng.uniform(-spec.centroid_jitter, spec.centroid_jitter), hz);
  const double lateral_draw = rng.uniform(0.55, 0.8);
  const double gap_draw = rng.uniform(0.0, 0.03);

  std::vector<Lobe> lobes;
  switch (c.location) {
    case PtvLocation::kLeft:
    case PtvLocation::kRight: {
      const double sign = c.location == PtvLocation::kLeft ? -1.0 : 1.0;
      // at least 1.5 voxels off the midplane, never pushed out of the body
      const double offset = std::max(snap_inward((body.rx - radius) * lateral_draw, hx),
                                     snap_outward(0.75 / hx, hx));
      lobes.push_back({sign * offset, cy, cz, radius});
      break;
    }
    case PtvLocation::kCenter:
      lobes.push_back({0.0, cy, cz, radius});
      break;
    case PtvLocation::kBilateral: {
      const double lobe = spec.bilateral_lobe_scale * radius;
      const double cx = lobe + 0.6 / hx + gap_draw;
      lobes.push_back({-cx, cy, cz, lobe});
      lobes.push_back({cx, cy, cz, lobe});
      break;
    }
  }
  for (const Lobe& l : lobes) {
    if (std::abs(l.cx) + l.radius > body.rx || std::abs(l.cy) + l.radius > body.ry ||
        std::abs(l.cz) + l.radius > body.rz) {
      throw DataError("degenerate phantom spec: PTV radius " + std::to_string(l.radius) +
                      " at x=" + std::to_string(l.cx) + " exceeds the body");
    }
  }

  Case out;
  CaseVolume& vol = out.volume;
  vol.ct = Grid<float>(d, spec.spacing, kAirHu);
  vol.mask = Grid<std::uint8_t>(d, spec.spacing, kBackground);

  const double shell = std::max(1.0 / hx, 0.1 * body_width);
  for (int z = 0; z < d.nz; ++z) {
    const double uz = (z - hz) / hz;
    for (int y = 0; y < d.ny; ++y) {
      const double uy = (y - hy) / hy;
      for (int x = 0; x < d.nx; ++x) {
        const double ux = (x - hx) / hx;
        const double noise = rng.normal();
        if (!body.contains(ux, uy, uz)) continue;
        vol.ct.at(x, y, z) = static_cast<float>(spec.ct_noise_hu * noise);

        std::uint8_t label = kBackground;
        if (prostate) {
          const Lobe bladder{0.0, 0.55 * body.ry, 0.3 * body.rz, 0.16 * body_width};
          if (lobe_distance(bladder, ux, uy, uz) <= bladder.radius) label = kOarA;
          const double rdy = uy + 0.6 * body.ry;
          if (std::sqrt(ux * ux + rdy * rdy) <= 0.09 * body_width && uz >= -0.7 * body.rz &&
              uz <= 0.3 * body.rz) {
            label = kOarB;
          }
        } else {
          const double cdy = uy + 0.65 * body.ry;
          if (std::sqrt(ux * ux + cdy * cdy) <= std::max(0.07 * body_width, 0.55 / hx)) {
            label = kOarA;
          }
          for (const double side : {-1.0, 1.0}) {
            const Lobe parotid{side * 0.62 * body.rx, 0.1 * body.ry, 0.45 * body.rz,
                               0.12 * body_width};
            if (lobe_distance(parotid, ux, uy, uz) <= parotid.radius) label = kOarB;
          }
        }
        double nearest = std::numeric_limits<double>::infinity();
        for (const Lobe& l : lobes) {
          nearest = std::min(nearest, lobe_distance(l, ux, uy, uz) - l.radius);
        }
        if (c.multi_target && nearest > 0.0 && nearest <= shell) label = kSecondaryPtv;
        if (nearest <= 0.0) label = kPrimaryPtv;
        vol.mask.at(x, y, z) = label;
      }
    }
  }
  vol.dose = synthesize_dose(vol, spec.prescription_gy, spec.dose_falloff_mm);

  out.meta.case_id = case_id;
  out.meta.criteria = c;
  out.meta.class_id = classify_case(c);
  out.meta.split = Split::kTrain;
  out.meta.protocol = default_protocol(c);
  out.meta.prescription_gy = spec.prescription_gy;
  return out;
}

ClassCriteria recover_criteria(const CaseVolume& volume) {
  const Dims d = volume.dims();
  const auto& ct = volume.ct;
  const auto& mask = volume.mask;
  const int zc = d.nz / 2;

  int width_x = 0, width_y = 0;
  for (int y = 0; y < d.ny; ++y) {
    int run = 0;
    for (int x = 0; x < d.nx; ++x) run += ct.at(x, y, zc) > -500.0f ? 1 : 0;
    width_x = std::max(width_x, run);
  }
  for (int x = 0; x < d.nx; ++x) {
    int run = 0;
    for (int y = 0; y < d.ny; ++y) run += ct.at(x, y, zc) > -500.0f ? 1 : 0;
    width_y = std::max(width_y, run);
  }
  if (width_x == 0 || width_y == 0) throw DataError("no body voxels found");

  ClassCriteria c;
  c.site = static_cast<double>(width_x) / width_y > 1.35 ? BodySite::kProstate
                                                         : BodySite::kHeadAndNeck;
  c.multi_target = std::find(mask.data.begin(), mask.data.end(), kSecondaryPtv) != mask.data.end();

  const double hx = half_extent(d.nx);
  double sum_x = 0.0;
  std::size_t count = 0, midline = 0;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        if (mask.at(x, y, z) != kPrimaryPtv) continue;
        sum_x += x;
        ++count;
        if (std::abs(x - hx) < 0.75) ++midline;
      }
  if (count == 0) throw DataError("no primary PTV voxels found");
  const double centroid = sum_x / static_cast<double>(count) - hx;
  if (centroid < -0.75) {
    c.location = PtvLocation::kLeft;
  } else if (centroid > 0.75) {
    c.location = PtvLocation::kRight;
  } else {
    c.location = midline == 0 ? PtvLocation::kBilateral : PtvLocation::kCenter;
  }

  const double r_thr = 0.15 * (width_x + width_y) / 2.0;
  double threshold = 4.0 / 3.0 * kPi * r_thr * r_thr * r_thr;
  if (c.location == PtvLocation::kBilateral) threshold *= 2.0 * 0.7 * 0.7 * 0.7;
  c.size = static_cast<double>(count) > threshold ? PtvSize::kLarge : PtvSize::kSmall;
  return c;
}

}  // namespace planret::volumes
