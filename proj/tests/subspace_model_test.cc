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

#include "pcad/subspace_model.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"
#include "pcad/error.h"
#include "pcad/synthgen.h"

namespace pcad {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no pcad::Error thrown";
  return ErrorCode::kInvalidArgument;
}

// Maps whose patches are mu + B z with B a random D x k matrix.
std::vector<FeatureMap> AffineMaps(std::size_t maps, std::uint32_t h,
                                   std::uint32_t w, std::uint32_t dim,
                                   std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const DenseMatrix b = oracle::RandomMatrix(dim, k, rng);
  std::vector<double> mu(dim);
  for (double& v : mu) v = 3.0 * normal(rng);
  std::vector<FeatureMap> out;
  for (std::size_t m = 0; m < maps; ++m) {
    FeatureMap f{h, w, dim, {}, "affine" + std::to_string(m)};
    for (std::size_t p = 0; p < f.patch_count(); ++p) {
      std::vector<double> z(k);
      for (double& v : z) v = normal(rng);
      for (std::uint32_t d = 0; d < dim; ++d) {
        double v = mu[d];
        for (std::size_t j = 0; j < k; ++j) v += b(d, j) * z[j];
        f.data.push_back(static_cast<float>(v));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FeatureMap> NoiseMaps(std::size_t maps, std::uint32_t h,
                                  std::uint32_t w, std::uint32_t dim,
                                  std::mt19937_64& rng) {
  std::normal_distribution<float> normal;
  std::vector<FeatureMap> out;
  for (std::size_t m = 0; m < maps; ++m) {
    FeatureMap f{h, w, dim, {}, "noise"};
    f.data.resize(f.patch_count() * dim);
    for (float& v : f.data) v = normal(rng);
    out.push_back(std::move(f));
  }
  return out;
}

// ||(x - mu) - C C^T (x - mu)||^2 with plain loops.
double Residual(const SubspaceModel& m, std::span<const float> x) {
  std::vector<double> d(m.dim);
  for (std::uint32_t i = 0; i < m.dim; ++i) d[i] = x[i] - m.mean[i];
  std::vector<double> r = d;
  for (std::uint32_t c = 0; c < m.rank; ++c) {
    double dot = 0.0;
    for (std::uint32_t i = 0; i < m.dim; ++i) dot += m.basis(i, c) * d[i];
    for (std::uint32_t i = 0; i < m.dim; ++i) r[i] -= dot * m.basis(i, c);
  }
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

double MaxResidual(const SubspaceModel& m, std::span<const FeatureMap> maps) {
  double worst = 0.0;
  for (const auto& f : maps) {
    for (std::size_t p = 0; p < f.patch_count(); ++p) {
      worst = std::max(worst, Residual(m, f.patch(p)));
    }
  }
  return worst;
}

TEST(SelectRankTest, Examples) {
  EXPECT_EQ(SelectRank(std::vector<double>{9, 0.9, 0.1}, 0.99), 2u);
  EXPECT_EQ(SelectRank(std::vector<double>{5}, 0.01), 1u);
  EXPECT_EQ(SelectRank(std::vector<double>{5}, 1.0), 1u);
  EXPECT_EQ(SelectRank(std::vector<double>{1, 1, 1, 1}, 0.99), 4u);
  EXPECT_EQ(SelectRank(std::vector<double>{1, 1, 1, 1}, 0.5), 2u);
}

TEST(SelectRankTest, FloorIsOne) {
  EXPECT_EQ(SelectRank(std::vector<double>{100, 1e-6}, 1e-9), 1u);
}

TEST(SelectRankTest, NegativesCountAsZero) {
  EXPECT_EQ(SelectRank(std::vector<double>{2, 2, -1e-12}, 1.0), 2u);
}

TEST(SelectRankTest, Errors) {
  EXPECT_EQ(CodeOf([] { SelectRank(std::vector<double>{0, 0}, 0.9); }),
            ErrorCode::kAllZeroSpectrum);
  EXPECT_EQ(CodeOf([] { SelectRank(std::vector<double>{1}, 0.0); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { SelectRank(std::vector<double>{1}, 1.5); }),
            ErrorCode::kInvalidArgument);
}

TEST(SelectRankTest, MonotoneInTau) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> l(1 + rng() % 40);
    for (double& v : l) v = std::pow(unit(rng), 3);
    std::sort(l.rbegin(), l.rend());
    double t1 = unit(rng);
    double t2 = unit(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (t1 == 0.0) continue;
    EXPECT_LE(SelectRank(l, t1), SelectRank(l, t2));
  }
}

TEST(SelectRankTest, MinimalWithCoverage) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> l(1 + rng() % 30);
    for (double& v : l) v = unit(rng);
    std::sort(l.rbegin(), l.rend());
    const double tau = 0.05 + 0.9 * unit(rng);
    const std::uint32_t r = SelectRank(l, tau);
    double total = 0.0;
    for (double v : l) total += v;
    double head = 0.0;
    for (std::uint32_t i = 0; i < r; ++i) head += l[i];
    EXPECT_GE(head, tau * total);
    EXPECT_LT(head - l[r - 1], tau * total);
  }
}

TEST(FitTest, RecoversAffineSubspace) {
  std::mt19937_64 rng(100);
  const auto maps = AffineMaps(2, 4, 4, 8, 3, rng);
  const SubspaceModel m = Fit(maps, 0.99);
  EXPECT_EQ(m.rank, 3u);
  EXPECT_EQ(m.fit_row_count, 32u);
  EXPECT_LE(MaxResidual(m, maps), 1e-8);
}

TEST(FitTest, GramRouteRecoversAffineSubspace) {
  std::mt19937_64 rng(101);
  // 6 patches in D=40: fewer rows than dims.
  const auto maps = AffineMaps(2, 1, 3, 40, 2, rng);
  const SubspaceModel m = Fit(maps, 0.99);
  EXPECT_EQ(m.rank, 2u);
  EXPECT_EQ(m.eigenvalues.size(), 40u);
  EXPECT_LE(MaxResidual(m, maps), 1e-8);
}

TEST(FitTest, ModelInvariants) {
  std::mt19937_64 rng(102);
  const auto maps = NoiseMaps(3, 5, 5, 12, rng);
  const SubspaceModel m = Fit(maps, 0.8);
  ASSERT_GE(m.rank, 1u);
  ASSERT_LE(m.rank, 12u);
  for (std::uint32_t a = 0; a < m.rank; ++a) {
    for (std::uint32_t b = 0; b < m.rank; ++b) {
      double dot = 0.0;
      for (std::uint32_t i = 0; i < m.dim; ++i) {
        dot += m.basis(i, a) * m.basis(i, b);
      }
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-6);
    }
  }
  const auto curve = m.ExplainedVarianceCurve();
  EXPECT_GE(curve[m.rank - 1], 0.8);
  if (m.rank > 1) EXPECT_LT(curve[m.rank - 2], 0.8);
  EXPECT_NEAR(curve.back(), 1.0, 1e-12);
}

TEST(FitTest, MeanIsArithmeticMean) {
  std::mt19937_64 rng(103);
  const auto maps = NoiseMaps(2, 3, 2, 5, rng);
  const SubspaceModel m = Fit(maps, 0.9);
  for (std::uint32_t d = 0; d < 5; ++d) {
    long double s = 0.0L;
    for (const auto& f : maps) {
      for (std::size_t p = 0; p < f.patch_count(); ++p) s += f.patch(p)[d];
    }
    EXPECT_NEAR(m.mean[d], static_cast<double>(s / 12.0L), 1e-12);
  }
}

TEST(FitTest, IdenticalPatchesAreDegenerate) {
  FeatureMap f{3, 3, 4, std::vector<float>(36, 0.0f), ""};
  for (std::size_t i = 0; i < 36; i += 4) f.data[i] = 1.5f;
  const std::vector<FeatureMap> maps = {f, f};
  EXPECT_EQ(CodeOf([&] { Fit(maps, 0.99); }), ErrorCode::kDegenerateData);
}

TEST(FitTest, InputErrors) {
  EXPECT_EQ(CodeOf([] { Fit(std::vector<FeatureMap>{}, 0.99); }),
            ErrorCode::kEmptyInput);
  const std::vector<FeatureMap> mixed = {
      FeatureMap{1, 1, 2, {1, 2}, "a"}, FeatureMap{1, 1, 3, {1, 2, 3}, "b"}};
  EXPECT_EQ(CodeOf([&] { Fit(mixed, 0.99); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(CodeOf([] { FitBatched(std::vector<FeatureMap>{}, 0.99); }),
            ErrorCode::kEmptyInput);
}

TEST(FitTest, TauOneOnFullRankNoiseKeepsEveryAxis) {
  std::mt19937_64 rng(104);
  const auto maps = NoiseMaps(1, 10, 10, 16, rng);
  const SubspaceModel m = Fit(maps, 1.0);
  EXPECT_EQ(m.rank, 16u);
}

TEST(FitTest, IdempotentRefit) {
  std::mt19937_64 rng(105);
  const auto maps = NoiseMaps(3, 6, 6, 20, rng);
  EXPECT_EQ(Fit(maps, 0.9), Fit(maps, 0.9));
}

TEST(FitTest, MeanTrainingResidualBound) {
  std::mt19937_64 rng(106);
  for (double tau : {0.5, 0.8, 0.95, 0.99}) {
    const auto maps = NoiseMaps(2, 8, 8, 24, rng);
    const SubspaceModel m = Fit(maps, tau);
    double total = 0.0;
    for (double l : m.eigenvalues) total += l;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : maps) {
      for (std::size_t p = 0; p < f.patch_count(); ++p, ++n) {
        sum += Residual(m, f.patch(p));
      }
    }
    EXPECT_LE(sum / n, (1.0 - tau) * total + 1e-8) << "tau " << tau;
  }
}

TEST(FitBatchedTest, ContaminatedSetKeepsAnomaliesOutside) {
  SynthSpec spec;
  spec.dim = 32;
  spec.normal_rank = 4;
  spec.grid_h = 8;
  spec.grid_w = 8;
  spec.noise_std = 0.01;
  spec.anomaly_magnitude = 1.0;
  // 8 of 1280 rows are displaced, well under the 1% variance tail.
  spec.anomaly_block = PatchBlock{3, 3, 2, 2};
  spec.n_test_normal = 18;
  spec.n_test_anomalous = 2;
  spec.seed = 5;
  const SynthCategory cat = GenerateSynthetic(spec);
  const auto test = cat.TestFeatures();
  const SubspaceModel m = FitBatched(test, 0.99);
  double normal = 0.0;
  double displaced = 0.0;
  std::size_t n_normal = 0;
  std::size_t n_displaced = 0;
  for (const auto& img : cat.test) {
    for (std::size_t p = 0; p < img.features.patch_count(); ++p) {
      const double r = Residual(m, img.features.patch(p));
      const std::size_t row = p / 8;
      const std::size_t col = p % 8;
      const bool in_block = row >= 3 && row < 5 && col >= 3 && col < 5;
      if (img.label && in_block) {
        displaced += r;
        ++n_displaced;
      } else {
        normal += r;
        ++n_normal;
      }
    }
  }
  EXPECT_GT(displaced / n_displaced, 10.0 * normal / n_normal);
}

TEST(FitBatchedTest, SameAsFitOnCleanSet) {
  std::mt19937_64 rng(107);
  const auto maps = AffineMaps(4, 4, 4, 10, 3, rng);
  EXPECT_EQ(FitBatched(maps, 0.99), Fit(maps, 0.99));
}

TEST(SerializeTest, RoundTripIsBitwise) {
  std::mt19937_64 rng(200);
  const SubspaceModel m = Fit(NoiseMaps(2, 4, 4, 9, rng), 0.7);
  const auto bytes = SerializeModel(m);
  EXPECT_EQ(bytes.size(), SerializedModelSize(9, m.rank,
                                              ModelPrecision::kFloat64));
  EXPECT_EQ(DeserializeModel(bytes), m);
}

TEST(SerializeTest, Float32IsCloseAndSmaller) {
  std::mt19937_64 rng(201);
  const SubspaceModel m = Fit(NoiseMaps(2, 4, 4, 9, rng), 0.7);
  const auto bytes = SerializeModel(m, ModelPrecision::kFloat32);
  EXPECT_EQ(bytes.size(),
            SerializedModelSize(9, m.rank, ModelPrecision::kFloat32));
  const SubspaceModel back = DeserializeModel(bytes);
  EXPECT_EQ(back.rank, m.rank);
  EXPECT_EQ(back.tau, m.tau);
  for (std::size_t i = 0; i < m.mean.size(); ++i) {
    EXPECT_EQ(back.mean[i], static_cast<double>(static_cast<float>(m.mean[i])));
  }
}

TEST(SerializeTest, SizeAtBackboneScale) {
  // Header + mean + basis + full spectrum.
  EXPECT_EQ(SerializedModelSize(1536, 200, ModelPrecision::kFloat64),
            32u + 8u * 1536u * 202u);
  EXPECT_EQ(SerializedModelSize(1536, 200, ModelPrecision::kFloat32),
            32u + 4u * 1536u * 202u);
}

TEST(SerializeTest, CorruptInputs) {
  std::mt19937_64 rng(202);
  const auto bytes = SerializeModel(Fit(NoiseMaps(1, 4, 4, 5, rng), 0.9));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(CodeOf([&] { DeserializeModel(bad); }), ErrorCode::kBadMagic);
  for (std::size_t len = 4; len < bytes.size(); len += 3) {
    EXPECT_EQ(CodeOf([&] {
                DeserializeModel(
                    std::span<const std::uint8_t>(bytes.data(), len));
              }),
              ErrorCode::kTruncated)
        << len;
  }
}

TEST(SerializeTest, SaveLoadAndMissingFile) {
  std::mt19937_64 rng(203);
  const SubspaceModel m = Fit(NoiseMaps(1, 4, 4, 5, rng), 0.9);
  const auto path =
      std::filesystem::temp_directory_path() / "pcad_model_test.ssm";
  SaveModel(m, path);
  EXPECT_EQ(LoadModel(path), m);
  std::filesystem::remove(path);
  EXPECT_EQ(CodeOf([&] { LoadModel(path); }), ErrorCode::kModelNotFound);
}

}  // namespace
}  // namespace pcad
