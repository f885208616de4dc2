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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "planret/error.hpp"
#include "planret/rng.hpp"
#include "planret/volumes/case_io.hpp"
#include "planret/volumes/dataset.hpp"
#include "planret/volumes/preprocess.hpp"

namespace planret::volumes {
namespace {

PhantomSpec spec_for(int class_id, std::uint64_t seed) {
  PhantomSpec s;
  s.criteria = criteria_from_class(class_id);
  s.seed = seed;
  return s;
}

std::size_t count_label(const CaseVolume& v, std::uint8_t label) {
  return static_cast<std::size_t>(std::count(v.mask.data.begin(), v.mask.data.end(), label));
}

TEST(CriteriaTest, EncodingEndpoints) {
  EXPECT_EQ(classify_case({BodySite::kProstate, false, PtvSize::kSmall, PtvLocation::kLeft}), 0);
  EXPECT_EQ(
      classify_case({BodySite::kHeadAndNeck, true, PtvSize::kLarge, PtvLocation::kBilateral}), 31);
}

TEST(CriteriaTest, BijectionOverAllCombinations) {
  std::set<int> ids;
  for (const auto site : {BodySite::kProstate, BodySite::kHeadAndNeck})
    for (const bool multi : {false, true})
      for (const auto size : {PtvSize::kSmall, PtvSize::kLarge})
        for (const auto loc : {PtvLocation::kLeft, PtvLocation::kRight, PtvLocation::kCenter,
                               PtvLocation::kBilateral}) {
          const ClassCriteria c{site, multi, size, loc};
          const int id = classify_case(c);
          EXPECT_EQ(criteria_from_class(id), c);
          ids.insert(id);
        }
  EXPECT_EQ(ids.size(), 32u);
  EXPECT_EQ(*ids.begin(), 0);
  EXPECT_EQ(*ids.rbegin(), 31);
  EXPECT_THROW(criteria_from_class(32), DataError);
}

TEST(PhantomTest, DeterministicForFixedSeed) {
  const Case a = generate_phantom(spec_for(0, 7), "a");
  const Case b = generate_phantom(spec_for(0, 7), "a");
  EXPECT_EQ(a.volume.ct, b.volume.ct);
  EXPECT_EQ(a.volume.mask, b.volume.mask);
  EXPECT_EQ(a.volume.dose, b.volume.dose);
}

TEST(PhantomTest, LeftLocationCentroidIsLeftOfMidplane) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Case c = generate_phantom(spec_for(0, seed), "l");
    const auto& m = c.volume.mask;
    double sx = 0;
    std::size_t n = 0;
    for (int z = 0; z < m.dims.nz; ++z)
      for (int y = 0; y < m.dims.ny; ++y)
        for (int x = 0; x < m.dims.nx; ++x)
          if (m.at(x, y, z) == kPrimaryPtv) {
            sx += x;
            ++n;
          }
    ASSERT_GT(n, 0u);
    EXPECT_LT(sx / n, (m.dims.nx - 1) / 2.0);
  }
}

TEST(PhantomTest, LargePtvHasAtLeastTwiceTheVoxelsOfSmall) {
  for (int base : {0, 2, 8, 16, 18, 26}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Case small = generate_phantom(spec_for(base, seed), "s");
      const Case large = generate_phantom(spec_for(base + 4, seed), "l");
      EXPECT_GE(count_label(large.volume, kPrimaryPtv),
                2 * count_label(small.volume, kPrimaryPtv))
          << "class " << base << " seed " << seed;
    }
  }
}

TEST(PhantomTest, GeometryEncodesItsOwnLabel) {
  for (int cls = 0; cls < kNumClasses; ++cls) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const Case c = generate_phantom(spec_for(cls, derive_seed(99, seed)), "r");
      EXPECT_EQ(classify_case(recover_criteria(c.volume)), cls) << "seed " << seed;
      EXPECT_NO_THROW(validate(c.volume));
    }
  }
}

TEST(PhantomTest, DegenerateSpecIsRejected) {
  PhantomSpec s = spec_for(4, 1);
  s.large_ptv_fraction = {0.9, 0.95};
  EXPECT_THROW(generate_phantom(s, "x"), DataError);
  PhantomSpec overlap = spec_for(0, 1);
  overlap.small_ptv_fraction = {0.1, 0.2};
  EXPECT_THROW(generate_phantom(overlap, "x"), DataError);
}

TEST(DoseTest, PrescriptionAtCentroidAndGaussianTail) {
  PhantomSpec s = spec_for(2, 3);  // prostate, single, small, center
  s.dims = {32, 32, 32};
  const Case c = generate_phantom(s, "d");
  const auto& v = c.volume;
  const float rx = static_cast<float>(s.prescription_gy);
  // centre-location lobe sits on the midline; every PTV voxel receives Rx.
  for (std::size_t i = 0; i < v.mask.data.size(); ++i) {
    if (v.mask.data[i] == kPrimaryPtv) EXPECT_FLOAT_EQ(v.dose.data[i], rx);
    EXPECT_LE(v.dose.data[i], rx);
    EXPECT_GE(v.dose.data[i], 0.0f);
  }
  const Grid<double> d2 = squared_distance_to_label(v.mask, kPrimaryPtv);
  const double sigma = s.dose_falloff_mm;
  bool saw_far = false;
  for (std::size_t i = 0; i < d2.data.size(); ++i) {
    if (std::sqrt(d2.data[i]) > 4.0 * sigma) {
      saw_far = true;
      EXPECT_LT(v.dose.data[i], 0.01f * rx);
    }
  }
  EXPECT_TRUE(saw_far);
}

TEST(DoseTest, DistanceTransformMatchesBruteForce) {
  Grid<std::uint8_t> m({7, 5, 6}, {1.0, 2.0, 0.5}, 0);
  m.at(1, 1, 1) = 1;
  m.at(5, 3, 4) = 1;
  const Grid<double> d = squared_distance_to_label(m, 1);
  for (int z = 0; z < 6; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 7; ++x) {
        double best = 1e300;
        for (auto [px, py, pz] : {std::array<int, 3>{1, 1, 1}, std::array<int, 3>{5, 3, 4}}) {
          const double dx = (x - px) * 1.0, dy = (y - py) * 2.0, dz = (z - pz) * 0.5;
          best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        EXPECT_NEAR(d.at(x, y, z), best, 1e-9);
      }
}

TEST(DoseTest, IntegralDoseGrowsWithPtvSize) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Case small = generate_phantom(spec_for(16, seed), "s");
    const Case large = generate_phantom(spec_for(20, seed), "l");
    double is = 0, il = 0;
    for (float v : small.volume.dose.data) is += v;
    for (float v : large.volume.dose.data) il += v;
    EXPECT_GT(il, is);
  }
}

TEST(DoseTest, EmptyPtvIsAnError) {
  CaseVolume v;
  v.ct = Grid<float>({8, 8, 8}, {}, 0.0f);
  v.mask = Grid<std::uint8_t>({8, 8, 8}, {}, 0);
  EXPECT_THROW(synthesize_dose(v, 70.0, 5.0), DataError);
}

TEST(ResampleTest, IdentityDims) {
  Grid<float> g({5, 4, 3}, {1, 1, 1});
  Rng rng(1);
  for (auto& v : g.data) v = static_cast<float>(rng.normal());
  const auto t = resample(g, g.dims, Interpolation::kTrilinear);
  for (std::size_t i = 0; i < g.data.size(); ++i) EXPECT_NEAR(t.data[i], g.data[i], 1e-6);
  Grid<std::uint8_t> m({5, 4, 3}, {1, 1, 1});
  for (auto& v : m.data) v = static_cast<std::uint8_t>(rng.below(5));
  EXPECT_EQ(resample(m, m.dims, Interpolation::kNearest).data, m.data);
}

TEST(ResampleTest, ConstantStaysConstant) {
  Grid<float> g({4, 5, 6}, {1, 1, 1}, 3.25f);
  for (const Dims t : {Dims{2, 2, 2}, Dims{9, 7, 13}}) {
    for (float v : resample(g, t, Interpolation::kTrilinear).data) EXPECT_FLOAT_EQ(v, 3.25f);
  }
}

TEST(ResampleTest, TrilinearReproducesAffineField) {
  const Dims src{6, 5, 4};
  Grid<double> g(src, {1, 1, 1});
  for (int z = 0; z < src.nz; ++z)
    for (int y = 0; y < src.ny; ++y)
      for (int x = 0; x < src.nx; ++x) g.at(x, y, z) = x + 2.0 * y + 3.0 * z;
  const Dims dst{11, 9, 7};  // 2x upsampling, align-corners
  const auto r = resample(g, dst, Interpolation::kTrilinear);
  for (int z = 0; z < dst.nz; ++z)
    for (int y = 0; y < dst.ny; ++y)
      for (int x = 0; x < dst.nx; ++x) {
        const double sx = x * 5.0 / 10.0, sy = y * 4.0 / 8.0, sz = z * 3.0 / 6.0;
        EXPECT_NEAR(r.at(x, y, z), sx + 2 * sy + 3 * sz, 1e-5);
      }
}

TEST(ResampleTest, NearestKeepsLabelAlphabet) {
  const Case c = generate_phantom(spec_for(27, 4), "n");
  std::set<int> before(c.volume.mask.data.begin(), c.volume.mask.data.end());
  for (const Dims t : {Dims{7, 9, 11}, Dims{32, 32, 32}, Dims{12, 12, 12}}) {
    const auto r = resample(c.volume.mask, t, Interpolation::kNearest);
    for (auto v : r.data) EXPECT_TRUE(before.count(v));
  }
  EXPECT_THROW(resample(c.volume.mask, {8, 8, 8}, Interpolation::kTrilinear), DataError);
  EXPECT_THROW(resample(c.volume.ct, {1, 8, 8}, Interpolation::kTrilinear), DataError);
}

TEST(WindowTest, SoftTissueWindow) {
  EXPECT_EQ(window_normalize(-200.0f), 0.0f);
  EXPECT_EQ(window_normalize(0.0f), 0.5f);
  EXPECT_EQ(window_normalize(200.0f), 1.0f);
  EXPECT_EQ(window_normalize(500.0f), 1.0f);
  EXPECT_EQ(window_normalize(-1000.0f), 0.0f);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const float v = window_normalize(static_cast<float>(rng.normal() * 1e4));
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(ChannelTest, AnatomyAndDoseVariants) {
  const Case c = generate_phantom(spec_for(2, 5), "c");
  const auto& v = c.volume;
  const auto a = assemble_channels(v, 70.0, ChannelVariant::kAnatomy);
  const auto d = assemble_channels(v, 70.0, ChannelVariant::kDose);
  ASSERT_EQ(a.shape(), (ad::Shape{2, 16, 16, 16}));
  const std::size_t n = v.dims().voxels();
  // corner voxel is air outside every contour
  EXPECT_EQ(a[0], 0.0f);
  EXPECT_EQ(a[n], 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(a[n + i], d[n + i]);
    if (v.mask.data[i] == kPrimaryPtv) {
      EXPECT_EQ(d[i], 1.0f);
      EXPECT_EQ(d[n + i], 0.25f);
    }
  }
  const auto hot = assemble_channels(v, 70.0, ChannelVariant::kAnatomy, MaskEncoding::kOneHot);
  EXPECT_EQ(hot.dim(0), 5);
}

TEST(DatasetTest, AllClassesPresent) {
  DatasetConfig cfg;
  cfg.per_class = 3;
  const auto cases = make_dataset(cfg);
  ASSERT_EQ(cases.size(), 96u);
  std::set<int> classes;
  for (const auto& c : cases) classes.insert(c.meta.class_id);
  EXPECT_EQ(classes.size(), 32u);
}

TEST(DatasetTest, SplitCountsFollowDefaultFractions) {
  std::vector<int> classes(405);
  for (int i = 0; i < 405; ++i) classes[i] = (i * 7) % 32;
  const auto splits = assign_splits(classes, kDefaultSplitFractions, 4);
  std::array<int, 3> counts{};
  for (auto s : splits) ++counts[static_cast<int>(s)];
  EXPECT_NEAR(counts[0], 235, 1);
  EXPECT_NEAR(counts[1], 43, 1);
  EXPECT_NEAR(counts[2], 127, 1);
}

TEST(DatasetTest, SplitsAreDeterministicAndStratified) {
  std::vector<int> classes(320);
  for (int i = 0; i < 320; ++i) classes[i] = i / 10;
  const auto a = assign_splits(classes, kDefaultSplitFractions, 8);
  EXPECT_EQ(a, assign_splits(classes, kDefaultSplitFractions, 8));
  for (int c = 0; c < 32; ++c) {
    int train = 0;
    for (int j = 0; j < 10; ++j) train += a[c * 10 + j] == Split::kTrain;
    EXPECT_GE(train, 5);
    EXPECT_LE(train, 6);
  }
}

TEST(DatasetTest, BadFractionsOrSizes) {
  DatasetConfig cfg;
  cfg.split_fractions = {0.5, 0.2, 0.2};
  EXPECT_THROW(make_dataset(cfg), ConfigError);
  cfg = DatasetConfig{};
  cfg.per_class = 2;
  EXPECT_THROW(make_dataset(cfg), ConfigError);
}

TEST(DatasetTest, ThreadCountDoesNotChangeOutput) {
  DatasetConfig cfg;
  cfg.per_class = 3;
  cfg.seed = 5;
  const auto one = make_dataset(cfg);
  cfg.threads = 4;
  const auto four = make_dataset(cfg);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].meta, four[i].meta);
    EXPECT_EQ(one[i].volume.ct, four[i].volume.ct);
  }
}

TEST(CaseIoTest, BitExactRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "planret_case_io_test";
  std::filesystem::create_directories(dir);
  Case c = generate_phantom(spec_for(29, 12), "case_0007");
  c.meta.split = Split::kValidation;
  write_case(dir, c);
  const Case back = read_case(dir, "case_0007");
  EXPECT_EQ(back.meta, c.meta);
  EXPECT_EQ(back.volume.ct, c.volume.ct);
  EXPECT_EQ(back.volume.mask, c.volume.mask);
  EXPECT_EQ(back.volume.dose, c.volume.dose);

  const std::vector<ManifestEntry> manifest{{"case_0007", 29, Split::kValidation}};
  write_manifest(dir, manifest);
  EXPECT_EQ(read_manifest(dir), manifest);

  // truncated voxel block
  std::filesystem::resize_file(dir / "case_0007.ct.vol", 100);
  EXPECT_THROW(read_case(dir, "case_0007"), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace planret::volumes
