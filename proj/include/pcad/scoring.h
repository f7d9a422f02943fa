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

// Residual scoring against a fitted subspace and the localization pipeline
// patch map -> bilinear upsample -> Gaussian smooth -> min-max normalize.

#ifndef PCAD_SCORING_H_
#define PCAD_SCORING_H_

#include <cstddef>

#include "pcad/feature_io.h"
#include "pcad/grid.h"
#include "pcad/subspace_model.h"

namespace pcad {

struct ImageScore {
  double value = 0.0;
  // Tail fraction in percent.
  double rho = 0.0;
};

// Squared residual ||(x - mu) - C C^T (x - mu)||^2 per patch, computed by
// projecting to rank r and reconstructing. A full-rank model spans the
// whole feature space and yields exact zeros.
AnomalyMap PatchScores(const SubspaceModel& model, const FeatureMap& features);

// Number of cells averaged by ImageScore: max(1, ceil(rho / 100 * cells)).
std::size_t TailCount(double rho, std::size_t cells);

// Tail value-at-risk: mean of the TailCount(rho, cells) largest scores.
ImageScore TailValueAtRisk(const AnomalyMap& map, double rho);

// Half-pixel-center bilinear resize with edge clamping. Targets smaller than
// the source throw kInvalidTarget.
Grid UpsampleBilinear(const Grid& grid, std::size_t target_h,
                      std::size_t target_w);

// Separable Gaussian blur; kernel radius ceil(4 sigma), normalized to sum 1,
// half-sample symmetric reflection at the borders.
Grid GaussianSmooth(const Grid& grid, double sigma);

// (v - min) / (max - min); an all-constant grid maps to zeros.
PixelMap NormalizeMinMax(const Grid& grid);

struct ScoredImage {
  ImageScore image_score;
  AnomalyMap patch_map;
  // Upsampled and smoothed residuals before normalization.
  Grid raw_pixels;
  PixelMap pixel_map;
};

struct ScoringParams {
  double rho = 1.0;
  double sigma = 4.0;
};

// The image score is taken on the patch map before any resampling.
ScoredImage ScoreImage(const SubspaceModel& model, const FeatureMap& features,
                       std::size_t target_h, std::size_t target_w,
                       const ScoringParams& params);

}  // namespace pcad

#endif  // PCAD_SCORING_H_
