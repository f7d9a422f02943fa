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

#include "pcad/evaluation.h"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "pcad/error.h"
#include "pcad/manifest.h"
#include "pcad/metrics.h"
#include "pcad/pipeline.h"
#include "pcad/synthgen.h"

namespace pcad {
namespace {

namespace fs = std::filesystem;

TestImageResult Result(const std::string& id, int label, double score,
                       const std::vector<double>& pixels,
                       const std::vector<std::uint8_t>& mask, bool has_mask) {
  TestImageResult r;
  r.image_id = id;
  r.label = label;
  r.image_score = score;
  r.raw_pixels = Grid(2, 2, pixels);
  if (has_mask) {
    GroundTruthMask m(2, 2);
    m.pixels = mask;
    r.mask = m;
  }
  return r;
}

std::vector<TestImageResult> SmallSet() {
  return {Result("n0", 0, 0.1, {0.1, 0.2, 0.1, 0.0}, {}, false),
          Result("n1", 0, 0.4, {0.3, 0.1, 0.2, 0.2}, {0, 0, 0, 0}, true),
          Result("a0", 1, 0.3, {0.9, 0.2, 0.1, 0.1}, {1, 0, 0, 0}, true),
          Result("a1", 1, 0.8, {0.2, 0.3, 0.8, 0.7}, {0, 0, 1, 1}, true)};
}

TEST(ComputeMetricsTest, AgreesWithMetricFunctions) {
  const auto results = SmallSet();
  std::vector<std::string> warnings;
  const MetricBlock m = ComputeMetrics(results, RunConfig{}, warnings);
  EXPECT_TRUE(warnings.empty());
  std::vector<LabeledScore> image;
  std::vector<Grid> maps;
  std::vector<GroundTruthMask> masks;
  for (const auto& r : results) {
    image.push_back({r.image_score, r.label});
    maps.push_back(*r.raw_pixels);
    masks.push_back(r.mask ? *r.mask : GroundTruthMask(2, 2));
  }
  EXPECT_EQ(*m.i_auroc, 0.75);
  EXPECT_EQ(*m.i_auroc, Auroc(image));
  EXPECT_EQ(*m.i_aupr, AveragePrecision(image));
  EXPECT_EQ(*m.p_auroc, PixelAuroc(maps, masks));
  EXPECT_EQ(*m.pro, ProScore(maps, masks, 0.3));
  EXPECT_FALSE(m.AnyMissing());
}

TEST(ComputeMetricsTest, PerImageNormalizationChangesPooling) {
  const auto results = SmallSet();
  std::vector<std::string> warnings;
  RunConfig config;
  config.normalization = Normalization::kPerImage;
  const MetricBlock per = ComputeMetrics(results, config, warnings);
  const MetricBlock raw = ComputeMetrics(results, RunConfig{}, warnings);
  EXPECT_EQ(per.i_auroc, raw.i_auroc);
  EXPECT_NE(per.p_auroc, raw.p_auroc);
}

TEST(ComputeMetricsTest, AllNormalGivesNullsWithWarnings) {
  std::vector<TestImageResult> results = {
      Result("n0", 0, 0.1, {0, 1, 2, 3}, {}, false),
      Result("n1", 0, 0.2, {3, 2, 1, 0}, {}, false)};
  std::vector<std::string> warnings;
  const MetricBlock m = ComputeMetrics(results, RunConfig{}, warnings);
  EXPECT_FALSE(m.i_auroc);
  EXPECT_FALSE(m.i_aupr);
  EXPECT_FALSE(m.p_auroc);
  EXPECT_FALSE(m.pro);
  EXPECT_EQ(warnings.size(), 4u);
}

TEST(ComputeMetricsTest, AnomalousWithoutMaskDropsPixelMetrics) {
  auto results = SmallSet();
  results[2].mask.reset();
  std::vector<std::string> warnings;
  const MetricBlock m = ComputeMetrics(results, RunConfig{}, warnings);
  EXPECT_TRUE(m.i_auroc);
  EXPECT_FALSE(m.p_auroc);
  EXPECT_FALSE(m.pro);
  EXPECT_FALSE(warnings.empty());
}

TEST(MeanMetricsTest, ArithmeticMeanOverDefinedValues) {
  std::vector<SampleReport> samples(3);
  samples[0].metrics = MetricBlock{0.9, 0.8, 0.7, std::nullopt};
  samples[1].metrics = MetricBlock{0.7, 0.6, 0.5, std::nullopt};
  samples[2].metrics = MetricBlock{0.8, std::nullopt, 0.6, std::nullopt};
  const MetricBlock m = MeanMetrics(samples);
  EXPECT_DOUBLE_EQ(*m.i_auroc, (0.9 + 0.7 + 0.8) / 3);
  EXPECT_DOUBLE_EQ(*m.i_aupr, (0.8 + 0.6) / 2);
  EXPECT_DOUBLE_EQ(*m.p_auroc, (0.7 + 0.5 + 0.6) / 3);
  EXPECT_FALSE(m.pro);
}

TEST(EvalReportTest, JsonRoundTripAndTable) {
  EvalReport r;
  r.category = "bottle";
  r.k = 2;
  r.config = RunConfigToJson(RunConfig{});
  SampleReport s;
  s.seed = 3;
  s.support = {"007", "011"};
  s.metrics = MetricBlock{1.0, 0.5, std::nullopt, 0.25};
  s.warnings = {"p_auroc undefined"};
  r.samples = {s};
  r.mean = MeanMetrics(r.samples);
  const nlohmann::json j = EvalReportToJson(r);
  EXPECT_TRUE(j["samples"][0]["metrics"]["p_auroc"].is_null());
  EXPECT_EQ(EvalReportFromJson(nlohmann::json::parse(j.dump())), r);
  const std::string table = FormatSummaryTable(r);
  EXPECT_NE(table.find("100.00"), std::string::npos);
  EXPECT_NE(table.find("25.00"), std::string::npos);
  EXPECT_NE(table.find("null"), std::string::npos);
  EXPECT_NE(table.find("bottle"), std::string::npos);
}

TEST(EvalReportTest, MalformedJson) {
  EXPECT_THROW(EvalReportFromJson({{"category", "x"}}), Error);
}

TEST(RunConfigTest, DefaultsAndOverrides) {
  const RunConfig d;
  EXPECT_EQ(d.tau, 0.99);
  EXPECT_EQ(d.rho, 1.0);
  EXPECT_EQ(d.sigma, 4.0);
  EXPECT_EQ(d.resolution, 672u);
  EXPECT_EQ(d.pro_fpr_limit, 0.3);
  EXPECT_EQ(d.normalization, Normalization::kRaw);
  const RunConfig c = RunConfigFromJson(
      {{"tau", 0.9}, {"seeds", {1, 2}}, {"normalization", "per_image"}});
  EXPECT_EQ(c.tau, 0.9);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(c.normalization, Normalization::kPerImage);
  EXPECT_EQ(c.rho, 1.0);
  EXPECT_EQ(RunConfigToJson(RunConfigFromJson(RunConfigToJson(c))),
            RunConfigToJson(c));
}

TEST(RunConfigTest, Validation) {
  auto code = [](const nlohmann::json& j) {
    try {
      RunConfigFromJson(j);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code({{"tau", 0.0}}), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code({{"rho", 150}}), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code({{"sigma", -1}}), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code({{"normalization", "global"}}), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code({{"tau", "high"}}), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code({{"seeds", nlohmann::json::array()}}),
            ErrorCode::kInvalidConfig);
}

TEST(ManifestTest, ParseGroupAndErrors) {
  const nlohmann::json j = {
      {"category", "c"},
      {"items",
       {{{"role", "train"}, {"image_id", "a"}, {"feature_file", "a0.sfm"},
         {"image_label", 0}, {"original_height", 10}, {"original_width", 12}},
        {{"role", "train"}, {"image_id", "b"}, {"feature_file", "b0.sfm"},
         {"image_label", 0}, {"original_height", 10}, {"original_width", 12}},
        {{"role", "train"}, {"image_id", "a"}, {"feature_file", "a1.sfm"},
         {"image_label", 0}, {"original_height", 10}, {"original_width", 12}},
        {{"role", "test"}, {"image_id", "t"}, {"feature_file", "t.sfm"},
         {"mask_file", "t.pgm"}, {"image_label", 1},
         {"original_height", 10}, {"original_width", 12}}}}};
  const Manifest m = ParseManifest(j, "/data/c");
  EXPECT_EQ(m.Resolve("a0.sfm"), fs::path("/data/c/a0.sfm"));
  const auto support = m.SupportImages();
  ASSERT_EQ(support.size(), 2u);
  EXPECT_EQ(support[0].image_id, "a");
  EXPECT_EQ(support[0].views.size(), 2u);
  EXPECT_EQ(m.Items(Role::kTest).size(), 1u);
  EXPECT_EQ(*m.Items(Role::kTest)[0]->mask_file, "t.pgm");
  EXPECT_EQ(ParseManifest(ManifestToJson(m), "/data/c").items.size(), 4u);

  nlohmann::json bad = j;
  bad["items"][0]["role"] = "validation";
  EXPECT_THROW(ParseManifest(bad, "."), Error);
  EXPECT_THROW(ParseManifest({{"category", "c"}}, "."), Error);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pcad_pipeline_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()
                                               ->name()));
    fs::remove_all(dir_);
    SynthSpec spec;
    spec.dim = 24;
    spec.normal_rank = 3;
    spec.grid_h = spec.grid_w = 8;
    spec.patch_size = 4;
    spec.noise_std = 0.01;
    spec.anomaly_magnitude = 1.0;
    spec.anomaly_block = PatchBlock{2, 2, 3, 3};
    spec.n_train = 5;
    spec.augmentations = 1;
    spec.n_test_normal = 4;
    spec.n_test_anomalous = 4;
    manifest_ = WriteSynthCategory(GenerateSynthetic(spec), dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  Manifest manifest_;
};

TEST_F(PipelineTest, SupportSelectionIsSeededAndDistinct) {
  const auto a = SelectSupport(manifest_, 3, 7);
  const auto b = SelectSupport(manifest_, 3, 7);
  ASSERT_EQ(a.size(), 3u);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].image_id, b[i].image_id);
    EXPECT_EQ(a[i].views.size(), 2u);
    ids.insert(a[i].image_id);
  }
  EXPECT_EQ(ids.size(), 3u);
  std::set<std::string> firsts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    firsts.insert(SelectSupport(manifest_, 1, seed)[0].image_id);
  }
  EXPECT_GT(firsts.size(), 1u);
  EXPECT_THROW(SelectSupport(manifest_, 0, 0), Error);
  EXPECT_THROW(SelectSupport(manifest_, 6, 0), Error);
}

TEST_F(PipelineTest, EvaluateSeparableCategory) {
  RunConfig config;
  config.seeds = {0, 1};
  std::vector<FittedSample> samples;
  for (std::uint64_t seed : config.seeds) {
    samples.push_back(FitSample(manifest_, config, seed));
    EXPECT_EQ(samples.back().model.fit_row_count, 2u * 64);
  }
  const EvalReport r = EvaluateCategory(manifest_, samples, config);
  ASSERT_EQ(r.samples.size(), 2u);
  EXPECT_EQ(r.samples[0].support.size(), 1u);
  for (const auto& s : r.samples) {
    EXPECT_EQ(*s.metrics.i_auroc, 1.0);
    EXPECT_EQ(*s.metrics.i_aupr, 1.0);
    EXPECT_GT(*s.metrics.p_auroc, 0.95);
  }
  EXPECT_DOUBLE_EQ(*r.mean.p_auroc, (*r.samples[0].metrics.p_auroc +
                                     *r.samples[1].metrics.p_auroc) /
                                        2);
  EXPECT_EQ(r.config["seeds"], nlohmann::json({0, 1}));
}

TEST_F(PipelineTest, PixelTargetFallsBackToResolution) {
  ManifestItem item;
  RunConfig config;
  config.resolution = 100;
  EXPECT_EQ(PixelTarget(item, config), (std::pair<std::size_t, std::size_t>{
                                           100, 100}));
  EXPECT_EQ(PixelTarget(*manifest_.Items(Role::kTest)[0], config),
            (std::pair<std::size_t, std::size_t>{32, 32}));
}

}  // namespace
}  // namespace pcad
