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

#include <cstdio>

#include "pcad/error.h"
#include "pcad/metrics.h"
#include "pcad/scoring.h"

namespace pcad {
namespace {

nlohmann::json OptionalToJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> OptionalFromJson(const nlohmann::json& j,
                                       const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string Cell(const std::optional<double>& v) {
  if (!v) return "null";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v * 100.0);
  return buf;
}

template <typename Fn>
std::optional<double> Guarded(Fn&& fn, const char* name,
                              std::vector<std::string>& warnings) {
  try {
    return fn();
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kOneClassOnly:
      case ErrorCode::kNoPositives:
      case ErrorCode::kNoRegions:
        warnings.push_back(std::string(name) + " undefined: " + e.what());
        return std::nullopt;
      default:
        throw;
    }
  }
}

}  // namespace

MetricBlock ComputeMetrics(std::span<const TestImageResult> results,
                           const RunConfig& config,
                           std::vector<std::string>& warnings) {
  MetricBlock m;
  std::vector<LabeledScore> image_scores;
  for (const auto& r : results) image_scores.push_back({r.image_score, r.label});
  m.i_auroc = Guarded([&] { return Auroc(image_scores); }, "i_auroc", warnings);
  m.i_aupr = Guarded([&] { return AveragePrecision(image_scores); }, "i_aupr",
                     warnings);

  std::vector<Grid> maps;
  std::vector<GroundTruthMask> masks;
  bool pixel_ok = true;
  for (const auto& r : results) {
    if (!r.raw_pixels) {
      warnings.push_back("no pixel map for " + r.image_id);
      pixel_ok = false;
      break;
    }
    if (r.mask) {
      masks.push_back(*r.mask);
    } else if (r.label == 0) {
      masks.emplace_back(r.raw_pixels->height, r.raw_pixels->width);
    } else {
      warnings.push_back("anomalous image " + r.image_id + " has no mask");
      pixel_ok = false;
      break;
    }
    if (config.normalization == Normalization::kPerImage) {
      const PixelMap norm = NormalizeMinMax(*r.raw_pixels);
      maps.emplace_back(norm.height, norm.width, norm.values);
    } else {
      maps.push_back(*r.raw_pixels);
    }
  }
  if (pixel_ok && !results.empty()) {
    m.p_auroc = Guarded(
        [&] { return PixelAuroc(maps, masks, config.pixel_auroc_method); },
        "p_auroc", warnings);
    m.pro = Guarded([&] { return ProScore(maps, masks, config.pro_fpr_limit); },
                    "pro", warnings);
  }
  return m;
}

MetricBlock MeanMetrics(std::span<const SampleReport> samples) {
  auto mean = [&](std::optional<double> MetricBlock::*field) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : samples) {
      if (s.metrics.*field) {
        sum += *(s.metrics.*field);
        ++count;
      }
    }
    return count ? std::optional<double>(sum / static_cast<double>(count))
                 : std::nullopt;
  };
  return MetricBlock{mean(&MetricBlock::i_auroc), mean(&MetricBlock::i_aupr),
                     mean(&MetricBlock::p_auroc), mean(&MetricBlock::pro)};
}

nlohmann::json MetricBlockToJson(const MetricBlock& m) {
  return {{"i_auroc", OptionalToJson(m.i_auroc)},
          {"i_aupr", OptionalToJson(m.i_aupr)},
          {"p_auroc", OptionalToJson(m.p_auroc)},
          {"pro", OptionalToJson(m.pro)}};
}

MetricBlock MetricBlockFromJson(const nlohmann::json& j) {
  return MetricBlock{OptionalFromJson(j, "i_auroc"),
                     OptionalFromJson(j, "i_aupr"),
                     OptionalFromJson(j, "p_auroc"), OptionalFromJson(j, "pro")};
}

nlohmann::json EvalReportToJson(const EvalReport& report) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : report.samples) {
    samples.push_back({{"seed", s.seed},
                       {"support", s.support},
                       {"metrics", MetricBlockToJson(s.metrics)},
                       {"warnings", s.warnings}});
  }
  return {{"category", report.category},
          {"k", report.k},
          {"samples", std::move(samples)},
          {"mean", MetricBlockToJson(report.mean)},
          {"config", report.config}};
}

EvalReport EvalReportFromJson(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.category = j.at("category").get<std::string>();
    r.k = j.at("k").get<std::uint32_t>();
    for (const auto& s : j.at("samples")) {
      SampleReport sample;
      sample.seed = s.at("seed").get<std::uint64_t>();
      sample.support = s.value("support", std::vector<std::string>{});
      sample.metrics = MetricBlockFromJson(s.at("metrics"));
      sample.warnings = s.value("warnings", std::vector<std::string>{});
      r.samples.push_back(std::move(sample));
    }
    r.mean = MetricBlockFromJson(j.at("mean"));
    r.config = j.at("config");
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed eval report: ") + ex.what());
  }
  return r;
}

std::string FormatSummaryTable(const EvalReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %3s %10s %9s %9s %9s %9s\n",
                "category", "k", "seed", "I-AUROC", "I-AUPR", "P-AUROC",
                "PRO");
  out += line;
  auto row = [&](const std::string& seed, const MetricBlock& m) {
    std::snprintf(line, sizeof(line), "%-16.16s %3u %10s %9s %9s %9s %9s\n",
                  report.category.c_str(), report.k, seed.c_str(),
                  Cell(m.i_auroc).c_str(), Cell(m.i_aupr).c_str(),
                  Cell(m.p_auroc).c_str(), Cell(m.pro).c_str());
    out += line;
  };
  for (const auto& s : report.samples) row(std::to_string(s.seed), s.metrics);
  row("mean", report.mean);
  return out;
}

}  // namespace pcad
