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

#include "pcad/pipeline.h"

#include "pcad/error.h"
#include "pcad/feature_io.h"
#include "pcad/rng.h"

namespace pcad {
namespace {

constexpr std::uint64_t kSupportStream = 0x5355505054;  // "SUPPT"

}  // namespace

std::vector<SupportImage> SelectSupport(const Manifest& manifest,
                                        std::uint32_t k, std::uint64_t seed) {
  std::vector<SupportImage> images = manifest.SupportImages();
  if (k == 0 || k > images.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "k=" + std::to_string(k) + " but manifest has " +
                    std::to_string(images.size()) + " train images");
  }
  CounterRng rng(seed, kSupportStream);
  for (std::size_t i = images.size(); i > 1; --i) {
    const std::size_t j = rng.NextBelow(i);
    std::swap(images[i - 1], images[j]);
  }
  images.resize(k);
  return images;
}

std::vector<FeatureMap> LoadFeatures(
    const Manifest& manifest, std::span<const ManifestItem* const> items) {
  std::vector<FeatureMap> maps;
  maps.reserve(items.size());
  for (const ManifestItem* item : items) {
    maps.push_back(ReadFeatureMapFile(manifest.Resolve(item->feature_file)));
  }
  return maps;
}

FittedSample FitSample(const Manifest& manifest, const RunConfig& config,
                       std::uint64_t seed) {
  const auto support = SelectSupport(manifest, config.k, seed);
  std::vector<const ManifestItem*> views;
  std::vector<std::string> ids;
  for (const auto& s : support) {
    ids.push_back(s.image_id);
    views.insert(views.end(), s.views.begin(), s.views.end());
  }
  const auto maps = LoadFeatures(manifest, views);
  return FittedSample{seed, std::move(ids), Fit(maps, config.tau)};
}

std::pair<std::size_t, std::size_t> PixelTarget(const ManifestItem& item,
                                                const RunConfig& config) {
  if (item.original_height > 0 && item.original_width > 0) {
    return {item.original_height, item.original_width};
  }
  return {config.resolution, config.resolution};
}

ScoredItem ScoreItem(const SubspaceModel& model, const Manifest& manifest,
                     const ManifestItem& item, const RunConfig& config) {
  const FeatureMap features =
      ReadFeatureMapFile(manifest.Resolve(item.feature_file));
  const auto [h, w] = PixelTarget(item, config);
  return ScoredItem{&item, ScoreImage(model, features, h, w,
                                      ScoringParams{config.rho, config.sigma})};
}

TestImageResult ToTestResult(const Manifest& manifest, const ScoredItem& s) {
  TestImageResult r;
  r.image_id = s.item->image_id;
  r.label = s.item->image_label;
  r.image_score = s.scored.image_score.value;
  r.raw_pixels = s.scored.raw_pixels;
  if (s.item->mask_file) {
    r.mask = ReadMaskPgmFile(manifest.Resolve(*s.item->mask_file));
  }
  return r;
}

EvalReport EvaluateCategory(const Manifest& manifest,
                            std::span<const FittedSample> samples,
                            const RunConfig& config) {
  EvalReport report;
  report.category = manifest.category;
  report.k = config.k;
  report.config = RunConfigToJson(config);
  const auto tests = manifest.Items(Role::kTest);
  for (const auto& sample : samples) {
    std::vector<TestImageResult> results;
    results.reserve(tests.size());
    for (const ManifestItem* item : tests) {
      results.push_back(
          ToTestResult(manifest, ScoreItem(sample.model, manifest, *item, config)));
    }
    SampleReport s;
    s.seed = sample.seed;
    s.support = sample.support;
    s.metrics = ComputeMetrics(results, config, s.warnings);
    report.samples.push_back(std::move(s));
  }
  report.mean = MeanMetrics(report.samples);
  return report;
}

}  // namespace pcad
