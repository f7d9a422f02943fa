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

// Manifest-level orchestration shared by the CLI and the integration tests.

#ifndef PCAD_PIPELINE_H_
#define PCAD_PIPELINE_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcad/config.h"
#include "pcad/evaluation.h"
#include "pcad/manifest.h"
#include "pcad/scoring.h"
#include "pcad/subspace_model.h"

namespace pcad {

// The k support images for `seed`: a Fisher-Yates shuffle of the manifest's
// train images (grouped by image_id) driven by CounterRng(seed, stream
// 0x5355505054), truncated to k. Throws kInvalidConfig if k is 0 or larger
// than the number of train images.
std::vector<SupportImage> SelectSupport(const Manifest& manifest,
                                        std::uint32_t k, std::uint64_t seed);

std::vector<FeatureMap> LoadFeatures(
    const Manifest& manifest, std::span<const ManifestItem* const> items);

struct FittedSample {
  std::uint64_t seed = 0;
  std::vector<std::string> support;
  SubspaceModel model;
};

// Fits on every view of the support images chosen for `seed`.
FittedSample FitSample(const Manifest& manifest, const RunConfig& config,
                       std::uint64_t seed);

// Pixel target for an item: its original size, or resolution x resolution
// when the manifest does not record one.
std::pair<std::size_t, std::size_t> PixelTarget(const ManifestItem& item,
                                                const RunConfig& config);

struct ScoredItem {
  const ManifestItem* item;
  ScoredImage scored;
};

ScoredItem ScoreItem(const SubspaceModel& model, const Manifest& manifest,
                     const ManifestItem& item, const RunConfig& config);

// Loads the mask (if any) and packages a scored item for ComputeMetrics.
TestImageResult ToTestResult(const Manifest& manifest, const ScoredItem& s);

// Scores every test item against every fitted sample and reports
// per-sample and mean metrics.
EvalReport EvaluateCategory(const Manifest& manifest,
                            std::span<const FittedSample> samples,
                            const RunConfig& config);

}  // namespace pcad

#endif  // PCAD_PIPELINE_H_
