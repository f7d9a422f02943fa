/*
 * Copyright 2026 The pcad Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pcad/synthgen.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "gtest/gtest.h"
#include "pcad/error.h"
#include "pcad/rng.h"
#include "pcad/subspace_model.h"

namespace pcad {
namespace {

namespace fs = std::filesystem;

// Residual of x against the generator's own mean and basis.
double TrueResidual(const SynthCategory& cat, std::span<const float> x) {
  const std::uint32_t d = cat.spec.dim;
  std::vector<double> v(d);
  for (std::uint32_t i = 0; i < d; ++i) v[i] = x[i] - cat.mean[i];
  for (std::uint32_t k = 0; k < cat.spec.normal_rank; ++k) {
    double dot = 0.0;
    for (std::uint32_t i = 0; i < d; ++i) dot += cat.basis(i, k) * v[i];
    for (std::uint32_t i = 0; i < d; ++i) v[i] -= dot * cat.basis(i, k);
  }
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

double ModelResidual(const SubspaceModel& m, std::span<const float> x) {
  std::vector<double> v(m.dim);
  for (std::uint32_t i = 0; i < m.dim; ++i) v[i] = x[i] - m.mean[i];
  for (std::uint32_t k = 0; k < m.rank; ++k) {
    double dot = 0.0;
    for (std::uint32_t i = 0; i < m.dim; ++i) dot += m.basis(i, k) * v[i];
    for (std::uint32_t i = 0; i < m.dim; ++i) v[i] -= dot * m.basis(i, k);
  }
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

TEST(CounterRngTest, GoldenStreams) {
  CounterRng a(0, 0);
  EXPECT_EQ(a.NextU64(), 0x568a9b0b1a2c05ecULL);
  EXPECT_EQ(a.NextU64(), 0x44e5b8b147ef718bULL);
  EXPECT_EQ(a.NextU64(), 0x458563ab55521133ULL);
  CounterRng b(42, (std::uint64_t{1} << 32) | 5);
  EXPECT_EQ(b.NextU64(), 0xc7b5e2a0b15dc1beULL);
  CounterRng c(7, 1);
  EXPECT_DOUBLE_EQ(c.NextNormal(), -1.7849947684238414);
  EXPECT_DOUBLE_EQ(c.NextNormal(), -0.11226188833817174);
}

TEST(CounterRngTest, NextBelowInRange) {
  CounterRng r(3, 9);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.NextBelow(7), 7u);
}

TEST(SynthgenTest, ShapesIdsAndLabels) {
  SynthSpec spec;
  spec.n_train = 2;
  spec.augmentations = 3;
  spec.n_test_normal = 2;
  spec.n_test_anomalous = 3;
  spec.anomaly_block = PatchBlock{1, 2, 3, 4};
  const SynthCategory cat = GenerateSynthetic(spec);
  ASSERT_EQ(cat.train.size(), 8u);
  ASSERT_EQ(cat.test.size(), 5u);
  EXPECT_EQ(cat.train[0].image_id, "train_000");
  EXPECT_EQ(cat.train[3].image_id, "train_000");
  EXPECT_EQ(cat.train[4].image_id, "train_001");
  EXPECT_EQ(cat.train[5].features.source_tag, "train_001/view1");
  EXPECT_EQ(cat.test[1].label, 0);
  EXPECT_EQ(cat.test[2].label, 1);
  EXPECT_EQ(cat.test[4].image_id, "test_004");
  const FeatureMap& f = cat.test[0].features;
  EXPECT_EQ(f.grid_h, 16u);
  EXPECT_EQ(f.dim, 64u);
  EXPECT_EQ(f.data.size(), 16u * 16 * 64);
  const GroundTruthMask& m = cat.test[2].mask;
  EXPECT_EQ(m.height, 16u * 14);
  EXPECT_EQ(std::count(m.pixels.begin(), m.pixels.end(), 1), 3 * 4 * 14 * 14);
  EXPECT_EQ(m.at(14, 28), 1);
  EXPECT_EQ(m.at(13, 28), 0);
  EXPECT_EQ(m.at(14 * 4 - 1, 14 * 6 - 1), 1);
  EXPECT_EQ(m.at(14 * 4, 14 * 6 - 1), 0);
  const GroundTruthMask& normal = cat.test[0].mask;
  EXPECT_EQ(std::count(normal.pixels.begin(), normal.pixels.end(), 1), 0);
}

TEST(SynthgenTest, BasisAndDirectionAreOrthonormal) {
  SynthSpec spec;
  spec.dim = 40;
  spec.normal_rank = 12;
  const SynthCategory cat = GenerateSynthetic(spec);
  for (std::uint32_t a = 0; a < 12; ++a) {
    double along = 0.0;
    for (std::uint32_t i = 0; i < 40; ++i) {
      along += cat.basis(i, a) * cat.anomaly_direction[i];
    }
    EXPECT_LE(std::fabs(along), 1e-10);
    for (std::uint32_t b = 0; b < 12; ++b) {
      double dot = 0.0;
      for (std::uint32_t i = 0; i < 40; ++i) {
        dot += cat.basis(i, a) * cat.basis(i, b);
      }
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-12);
    }
  }
  double len = 0.0;
  for (double v : cat.anomaly_direction) len += v * v;
  EXPECT_NEAR(len, 1.0, 1e-12);
}

TEST(SynthgenTest, PatchStreamIsPortable) {
  SynthSpec spec;
  spec.dim = 6;
  spec.normal_rank = 2;
  spec.grid_h = 3;
  spec.grid_w = 4;
  spec.noise_std = 0.1;
  spec.seed = 99;
  const SynthCategory cat = GenerateSynthetic(spec);
  // Test image 1 is global image 2 (one train view precedes it); patch 7.
  const std::uint64_t g = 2;
  const std::uint64_t p = 7;
  CounterRng rng(99, ((g + 1) << 32) | p);
  const double z0 = rng.NextNormal();
  const double z1 = rng.NextNormal();
  const auto patch = cat.test[1].features.patch(p);
  for (std::uint32_t i = 0; i < 6; ++i) {
    const double x = cat.mean[i] + cat.basis(i, 0) * z0 +
                     cat.basis(i, 1) * z1 + 0.1 * rng.NextNormal();
    EXPECT_EQ(patch[i], static_cast<float>(x));
  }
}

TEST(SynthgenTest, Deterministic) {
  SynthSpec spec;
  spec.seed = 17;
  const SynthCategory a = GenerateSynthetic(spec);
  const SynthCategory b = GenerateSynthetic(spec);
  EXPECT_EQ(a.TrainFeatures(), b.TrainFeatures());
  EXPECT_EQ(a.TestFeatures(), b.TestFeatures());
  spec.seed = 18;
  EXPECT_NE(GenerateSynthetic(spec).TestFeatures(), a.TestFeatures());
}

TEST(SynthgenTest, NoiselessDataStaysInFittedSubspace) {
  SynthSpec spec;
  spec.noise_std = 0.0;
  spec.anomaly_magnitude = 0.0;
  spec.anomaly_block = PatchBlock{0, 0, 4, 4};
  const SynthCategory cat = GenerateSynthetic(spec);
  const SubspaceModel m = Fit(cat.TrainFeatures(), 0.99);
  EXPECT_EQ(m.rank, spec.normal_rank);
  for (const auto& img : cat.test) {
    for (std::size_t p = 0; p < img.features.patch_count(); ++p) {
      EXPECT_LE(ModelResidual(m, img.features.patch(p)), 1e-8);
    }
  }
}

TEST(SynthgenTest, PlantedResidualDominatesNoise) {
  SynthSpec spec;
  spec.noise_std = 0.01;
  spec.anomaly_magnitude = 1.0;
  spec.anomaly_block = PatchBlock{4, 4, 3, 3};
  spec.augmentations = 4;
  const SynthCategory cat = GenerateSynthetic(spec);
  const SubspaceModel m = Fit(cat.TrainFeatures(), 0.99);
  std::vector<double> normal;
  double min_planted = 1e300;
  for (const auto& img : cat.test) {
    for (std::size_t p = 0; p < img.features.patch_count(); ++p) {
      const double r = ModelResidual(m, img.features.patch(p));
      const std::size_t row = p / spec.grid_w;
      const std::size_t col = p % spec.grid_w;
      const bool planted = img.label && row >= 4 && row < 7 && col >= 4 &&
                           col < 7;
      if (planted) {
        min_planted = std::min(min_planted, r);
      } else {
        normal.push_back(r);
      }
    }
  }
  std::nth_element(normal.begin(), normal.begin() + normal.size() / 2,
                   normal.end());
  EXPECT_GE(min_planted, 100.0 * normal[normal.size() / 2]);
}

TEST(SynthgenTest, NormalResidualMatchesChiSquaredMean) {
  SynthSpec spec;
  spec.dim = 48;
  spec.normal_rank = 6;
  spec.grid_h = spec.grid_w = 32;
  spec.noise_std = 0.05;
  const SynthCategory cat = GenerateSynthetic(spec);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& img : cat.test) {
    if (img.label) continue;
    for (std::size_t p = 0; p < img.features.patch_count(); ++p, ++n) {
      sum += TrueResidual(cat, img.features.patch(p));
    }
  }
  const double expected = 0.05 * 0.05 * (48 - 6);
  EXPECT_NEAR(sum / n, expected, 0.1 * expected);
}

TEST(SynthgenTest, InvalidSpecs) {
  auto code = [](SynthSpec s) {
    try {
      GenerateSynthetic(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  SynthSpec s;
  s.normal_rank = s.dim;
  EXPECT_EQ(code(s), ErrorCode::kInvalidSpec);
  s = SynthSpec{};
  s.anomaly_block = PatchBlock{15, 0, 2, 1};
  EXPECT_EQ(code(s), ErrorCode::kInvalidSpec);
  s = SynthSpec{};
  s.noise_std = -0.1;
  EXPECT_EQ(code(s), ErrorCode::kInvalidSpec);
  s = SynthSpec{};
  s.grid_w = 0;
  EXPECT_EQ(code(s), ErrorCode::kInvalidSpec);
}

TEST(SynthgenTest, SpecJsonRoundTrip) {
  SynthSpec s;
  s.category = "widget";
  s.dim = 20;
  s.normal_rank = 3;
  s.anomaly_block = PatchBlock{1, 2, 3, 4};
  s.seed = 123456789012ULL;
  s.noise_std = 0.125;
  const SynthSpec back = SynthSpecFromJson(SynthSpecToJson(s));
  EXPECT_EQ(SynthSpecToJson(back), SynthSpecToJson(s));
  EXPECT_THROW(SynthSpecFromJson({{"dim", "wide"}}), Error);
}

TEST(SynthgenTest, WritesCategoryToDisk) {
  SynthSpec spec;
  spec.dim = 8;
  spec.normal_rank = 2;
  spec.grid_h = spec.grid_w = 4;
  spec.n_train = 2;
  spec.augmentations = 1;
  spec.n_test_normal = 2;
  spec.n_test_anomalous = 2;
  const SynthCategory cat = GenerateSynthetic(spec);
  const fs::path dir = fs::temp_directory_path() / "pcad_synth_write_test";
  fs::remove_all(dir);
  const Manifest written = WriteSynthCategory(cat, dir);
  const Manifest loaded = LoadManifest(dir / "manifest.json");
  EXPECT_EQ(loaded.items.size(), 8u);
  EXPECT_EQ(ManifestToJson(loaded), ManifestToJson(written));
  EXPECT_EQ(loaded.SupportImages().size(), 2u);
  EXPECT_EQ(loaded.SupportImages()[1].views.size(), 2u);
  std::size_t masks = 0;
  for (const auto& e : fs::directory_iterator(dir / "masks")) {
    (void)e;
    ++masks;
  }
  EXPECT_EQ(masks, 2u);
  const auto tests = loaded.Items(Role::kTest);
  ASSERT_EQ(tests.size(), 4u);
  EXPECT_FALSE(tests[0]->mask_file.has_value());
  ASSERT_TRUE(tests[3]->mask_file.has_value());
  EXPECT_EQ(ReadMaskPgmFile(loaded.Resolve(*tests[3]->mask_file)),
            cat.test[3].mask);
  EXPECT_EQ(ReadFeatureMapFile(loaded.Resolve(tests[2]->feature_file)),
            cat.test[2].features);
  EXPECT_EQ(tests[0]->original_height, 56u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace pcad
