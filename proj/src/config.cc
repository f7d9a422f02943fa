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

#include "pcad/config.h"

#include "pcad/error.h"

namespace pcad {

std::string NormalizationName(Normalization n) {
  return n == Normalization::kRaw ? "raw" : "per_image";
}

Normalization ParseNormalization(const std::string& s) {
  if (s == "raw") return Normalization::kRaw;
  if (s == "per_image" || s == "per-image") return Normalization::kPerImage;
  throw Error(ErrorCode::kInvalidConfig, "unknown normalization '" + s + "'");
}

void ValidateRunConfig(const RunConfig& c) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidConfig, msg);
  };
  if (!(c.tau > 0.0 && c.tau <= 1.0)) fail("tau must be in (0, 1]");
  if (!(c.rho > 0.0 && c.rho <= 100.0)) fail("rho must be in (0, 100]");
  if (!(c.sigma > 0.0)) fail("sigma must be > 0");
  if (c.resolution == 0) fail("resolution must be >= 1");
  if (c.seeds.empty()) fail("seeds must not be empty");
  if (!(c.pro_fpr_limit > 0.0 && c.pro_fpr_limit <= 1.0)) {
    fail("pro_fpr_limit must be in (0, 1]");
  }
}

RunConfig RunConfigFromJson(const nlohmann::json& j, RunConfig c) {
  try {
    c.tau = j.value("tau", c.tau);
    c.rho = j.value("rho", c.rho);
    c.sigma = j.value("sigma", c.sigma);
    c.resolution = j.value("resolution", c.resolution);
    c.k = j.value("k", c.k);
    c.seeds = j.value("seeds", c.seeds);
    c.pro_fpr_limit = j.value("pro_fpr_limit", c.pro_fpr_limit);
    if (j.contains("normalization")) {
      c.normalization = ParseNormalization(j.at("normalization"));
    }
    c.layers = j.value("layers", c.layers);
    if (j.contains("model_precision")) {
      const auto p = j.at("model_precision").get<std::string>();
      if (p == "f64") {
        c.model_precision = ModelPrecision::kFloat64;
      } else if (p == "f32") {
        c.model_precision = ModelPrecision::kFloat32;
      } else {
        throw Error(ErrorCode::kInvalidConfig,
                    "model_precision must be f64 or f32");
      }
    }
    if (j.contains("pixel_auroc_method")) {
      const auto m = j.at("pixel_auroc_method").get<std::string>();
      if (m == "exact") {
        c.pixel_auroc_method = PixelAurocMethod::kExact;
      } else if (m == "histogram") {
        c.pixel_auroc_method = PixelAurocMethod::kHistogram;
      } else {
        throw Error(ErrorCode::kInvalidConfig,
                    "pixel_auroc_method must be exact or histogram");
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidConfig, ex.what());
  }
  ValidateRunConfig(c);
  return c;
}

nlohmann::json RunConfigToJson(const RunConfig& c) {
  return {{"tau", c.tau},
          {"rho", c.rho},
          {"sigma", c.sigma},
          {"resolution", c.resolution},
          {"k", c.k},
          {"seeds", c.seeds},
          {"pro_fpr_limit", c.pro_fpr_limit},
          {"normalization", NormalizationName(c.normalization)},
          {"layers", c.layers},
          {"model_precision",
           c.model_precision == ModelPrecision::kFloat64 ? "f64" : "f32"},
          {"pixel_auroc_method",
           c.pixel_auroc_method == PixelAurocMethod::kExact ? "exact"
                                                            : "histogram"}};
}

}  // namespace pcad
