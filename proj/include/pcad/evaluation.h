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

// Per-category evaluation report.
//
// JSON schema:
//
//   {
//     "category": str, "k": int,
//     "samples": [{"seed": int, "support": [image_id...],
//                  "metrics": {"i_auroc", "i_aupr", "p_auroc", "pro"},
//                  "warnings": [str...]}],
//     "mean": {"i_auroc", "i_aupr", "p_auroc", "pro"},
//     "config": {RunConfig keys}
//   }
//
// A metric that is undefined for the inputs (for example image AUROC on an
// all-normal test set) is null.

#ifndef PCAD_EVALUATION_H_
#define PCAD_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcad/config.h"
#include "pcad/grid.h"

namespace pcad {

struct TestImageResult {
  std::string image_id;
  int label = 0;
  double image_score = 0.0;
  // Upsampled, smoothed residuals before normalization.
  std::optional<Grid> raw_pixels;
  // Missing masks on normal images are read as all-normal.
  std::optional<GroundTruthMask> mask;
};

struct MetricBlock {
  std::optional<double> i_auroc;
  std::optional<double> i_aupr;
  std::optional<double> p_auroc;
  std::optional<double> pro;

  bool AnyMissing() const { return !i_auroc || !i_aupr || !p_auroc || !pro; }
  bool operator==(const MetricBlock&) const = default;
};

struct SampleReport {
  std::uint64_t seed = 0;
  std::vector<std::string> support;
  MetricBlock metrics;
  std::vector<std::string> warnings;

  bool operator==(const SampleReport&) const = default;
};

struct EvalReport {
  std::string category;
  std::uint32_t k = 0;
  std::vector<SampleReport> samples;
  MetricBlock mean;
  nlohmann::json config;

  bool operator==(const EvalReport&) const = default;
};

// Undefined metrics come back empty with a reason appended to `warnings`.
MetricBlock ComputeMetrics(std::span<const TestImageResult> results,
                           const RunConfig& config,
                           std::vector<std::string>& warnings);

// Arithmetic mean per metric over the samples where it is defined.
MetricBlock MeanMetrics(std::span<const SampleReport> samples);

nlohmann::json MetricBlockToJson(const MetricBlock& m);
MetricBlock MetricBlockFromJson(const nlohmann::json& j);
nlohmann::json EvalReportToJson(const EvalReport& report);
EvalReport EvalReportFromJson(const nlohmann::json& j);

// Fixed-width table: one row per sample plus the mean, values in percent.
std::string FormatSummaryTable(const EvalReport& report);

}  // namespace pcad

#endif  // PCAD_EVALUATION_H_
