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

// Synthetic feature categories with known ground truth.
//
// Normal patches are mu + B z + eta: B is a random dim x normal_rank
// orthonormal basis, z ~ N(0, I), eta ~ N(0, noise_std^2 I). Anomalous test
// images add anomaly_magnitude * u to every patch in anomaly_block, where u
// is a unit vector orthogonal to span(B). Masks mark the block at pixel
// resolution (patch_size pixels per patch).
//
// Random streams (see rng.h), all keyed by `seed`: stream 1 draws mu,
// stream 2 the basis, stream 3 the anomaly direction, and patch p of image
// g (train views first, then test images in order) draws from stream
// (g + 1) << 32 | p.

#ifndef PCAD_SYNTHGEN_H_
#define PCAD_SYNTHGEN_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcad/feature_io.h"
#include "pcad/grid.h"
#include "pcad/linalg.h"
#include "pcad/manifest.h"

namespace pcad {

struct PatchBlock {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::uint32_t height = 1;
  std::uint32_t width = 1;
};

struct SynthSpec {
  std::string category = "synthetic";
  std::uint32_t dim = 64;
  std::uint32_t normal_rank = 8;
  std::uint32_t grid_h = 16;
  std::uint32_t grid_w = 16;
  std::uint32_t patch_size = 14;
  double noise_std = 0.01;
  double anomaly_magnitude = 1.0;
  PatchBlock anomaly_block;
  std::uint32_t n_train = 1;
  // Extra normal views generated per train image, sharing its image_id.
  std::uint32_t augmentations = 0;
  std::uint32_t n_test_normal = 4;
  std::uint32_t n_test_anomalous = 4;
  std::uint64_t seed = 0;
};

// Throws kInvalidSpec.
void ValidateSynthSpec(const SynthSpec& spec);

SynthSpec SynthSpecFromJson(const nlohmann::json& j);
nlohmann::json SynthSpecToJson(const SynthSpec& spec);

struct SynthImage {
  std::string image_id;
  FeatureMap features;
  int label = 0;
  GroundTruthMask mask;
};

struct SynthCategory {
  SynthSpec spec;
  std::vector<double> mean;
  DenseMatrix basis;  // dim x normal_rank
  std::vector<double> anomaly_direction;
  // n_train * (1 + augmentations) views.
  std::vector<SynthImage> train;
  std::vector<SynthImage> test;

  std::vector<FeatureMap> TrainFeatures() const;
  std::vector<FeatureMap> TestFeatures() const;
};

SynthCategory GenerateSynthetic(const SynthSpec& spec);

// Writes features/*.sfm, masks/*.pgm and manifest.json under `dir` and
// returns the manifest. Normal test images get no mask file.
Manifest WriteSynthCategory(const SynthCategory& category,
                            const std::filesystem::path& dir);

}  // namespace pcad

#endif  // PCAD_SYNTHGEN_H_
