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

#ifndef PCAD_CONFIG_H_
#define PCAD_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcad/metrics.h"
#include "pcad/subspace_model.h"

namespace pcad {

// How pixel-level metrics see the score maps: raw residuals pooled across
// images, or each map min-max normalized on its own first.
enum class Normalization { kRaw, kPerImage };

struct RunConfig {
  double tau = 0.99;
  // Tail fraction for the image score, percent.
  double rho = 1.0;
  // Gaussian smoothing, pixels.
  double sigma = 4.0;
  // Extractor input resolution; recorded in reports and used as the pixel
  // target when a manifest item lacks original dimensions.
  std::uint32_t resolution = 672;
  std::uint32_t k = 1;
  std::vector<std::uint64_t> seeds = {0};
  double pro_fpr_limit = 0.3;
  Normalization normalization = Normalization::kRaw;
  // Backbone layers averaged by the extractor; fingerprint only.
  std::vector<int> layers = {22, 23, 24, 25, 26, 27, 28};
  ModelPrecision model_precision = ModelPrecision::kFloat64;
  PixelAurocMethod pixel_auroc_method = PixelAurocMethod::kExact;
};

// Throws kInvalidConfig.
void ValidateRunConfig(const RunConfig& config);

// Keys absent from `j` keep their current value in `base`.
RunConfig RunConfigFromJson(const nlohmann::json& j, RunConfig base = {});
nlohmann::json RunConfigToJson(const RunConfig& config);

std::string NormalizationName(Normalization n);
Normalization ParseNormalization(const std::string& s);

}  // namespace pcad

#endif  // PCAD_CONFIG_H_
