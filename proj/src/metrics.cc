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

#include "pcad/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>

#include "pcad/error.h"

namespace pcad {
namespace {

void CheckFinite(std::span<const LabeledScore> samples) {
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite score");
    }
  }
}

// Mann-Whitney over per-group (positive, negative) counts listed in
// ascending score order.
struct GroupCounts {
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

double MannWhitney(std::span<const GroupCounts> ascending) {
  std::uint64_t total_pos = 0;
  std::uint64_t total_neg = 0;
  for (const auto& g : ascending) {
    total_pos += g.positives;
    total_neg += g.negatives;
  }
  if (total_pos == 0 || total_neg == 0) {
    throw Error(ErrorCode::kOneClassOnly,
                "AUROC needs at least one positive and one negative");
  }
  // Twice the statistic stays integral: 2 * concordant + tied.
  std::uint64_t doubled = 0;
  std::uint64_t negatives_below = 0;
  for (const auto& g : ascending) {
    doubled += 2 * g.positives * negatives_below + g.positives * g.negatives;
    negatives_below += g.negatives;
  }
  return static_cast<double>(doubled) /
         (2.0 * static_cast<double>(total_pos) *
          static_cast<double>(total_neg));
}

std::vector<LabeledScore> SortedAscending(std::span<const LabeledScore> s) {
  std::vector<LabeledScore> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledScore& a, const LabeledScore& b) {
              return a.score < b.score;
            });
  return sorted;
}

std::vector<LabeledScore> PoolPixels(std::span<const Grid> score_maps,
                                     std::span<const GroundTruthMask> masks) {
  if (score_maps.size() != masks.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(score_maps.size()) + " maps vs " +
                    std::to_string(masks.size()) + " masks");
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (score_maps[i].height != masks[i].height ||
        score_maps[i].width != masks[i].width) {
      throw Error(ErrorCode::kShapeMismatch,
                  "score map " + std::to_string(i) + " does not match its mask");
    }
    total += masks[i].pixels.size();
  }
  std::vector<LabeledScore> pooled;
  pooled.reserve(total);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (std::size_t p = 0; p < masks[i].pixels.size(); ++p) {
      pooled.push_back({score_maps[i].values[p], masks[i].pixels[p] ? 1 : 0});
    }
  }
  return pooled;
}

}  // namespace

double Auroc(std::span<const LabeledScore> samples) {
  CheckFinite(samples);
  const auto sorted = SortedAscending(samples);
  std::vector<GroupCounts> groups;
  for (std::size_t i = 0; i < sorted.size();) {
    GroupCounts g;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].score == sorted[i].score; ++j) {
      (sorted[j].label ? g.positives : g.negatives)++;
    }
    groups.push_back(g);
    i = j;
  }
  return MannWhitney(groups);
}

double AurocHistogram(std::span<const LabeledScore> samples, std::size_t bins) {
  CheckFinite(samples);
  if (bins == 0) throw Error(ErrorCode::kInvalidArgument, "bins must be >= 1");
  if (samples.empty()) {
    throw Error(ErrorCode::kOneClassOnly, "no samples");
  }
  double lo = samples.front().score;
  double hi = lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.score);
    hi = std::max(hi, s.score);
  }
  std::vector<GroupCounts> groups(bins);
  const double range = hi - lo;
  for (const auto& s : samples) {
    std::size_t b = 0;
    if (range > 0.0) {
      b = std::min(bins - 1, static_cast<std::size_t>(
                                 (s.score - lo) / range *
                                 static_cast<double>(bins)));
    }
    (s.label ? groups[b].positives : groups[b].negatives)++;
  }
  return MannWhitney(groups);
}

double AveragePrecision(std::span<const LabeledScore> samples) {
  CheckFinite(samples);
  std::uint64_t total_pos = 0;
  for (const auto& s : samples) total_pos += s.label ? 1 : 0;
  if (total_pos == 0) {
    throw Error(ErrorCode::kNoPositives, "average precision needs a positive");
  }
  const auto sorted = SortedAscending(samples);
  double ap = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t end = sorted.size(); end > 0;) {
    std::size_t begin = end;
    std::uint64_t group_pos = 0;
    while (begin > 0 && sorted[begin - 1].score == sorted[end - 1].score) {
      --begin;
      if (sorted[begin].label) {
        ++group_pos;
      } else {
        ++fp;
      }
    }
    tp += group_pos;
    if (group_pos > 0) {
      ap += static_cast<double>(group_pos) / static_cast<double>(total_pos) *
            (static_cast<double>(tp) / static_cast<double>(tp + fp));
    }
    end = begin;
  }
  return ap;
}

double PixelAuroc(std::span<const Grid> score_maps,
                  std::span<const GroundTruthMask> masks,
                  PixelAurocMethod method) {
  const auto pooled = PoolPixels(score_maps, masks);
  return method == PixelAurocMethod::kExact ? Auroc(pooled)
                                            : AurocHistogram(pooled);
}

RegionSet ConnectedComponents(const GroundTruthMask& mask) {
  RegionSet out;
  const std::size_t h = mask.height;
  const std::size_t w = mask.width;
  std::vector<std::uint8_t> seen(mask.pixels.size(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t start = 0; start < mask.pixels.size(); ++start) {
    if (!mask.pixels[start] || seen[start]) continue;
    std::vector<std::size_t> region;
    seen[start] = 1;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t idx = queue.front();
      queue.pop_front();
      region.push_back(idx);
      const std::size_t r = idx / w;
      const std::size_t c = idx % w;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const auto nr = static_cast<std::ptrdiff_t>(r) + dr;
          const auto nc = static_cast<std::ptrdiff_t>(c) + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(h) ||
              nc >= static_cast<std::ptrdiff_t>(w)) {
            continue;
          }
          const std::size_t n = static_cast<std::size_t>(nr) * w +
                                static_cast<std::size_t>(nc);
          if (mask.pixels[n] && !seen[n]) {
            seen[n] = 1;
            queue.push_back(n);
          }
        }
      }
    }
    std::sort(region.begin(), region.end());
    out.regions.push_back(std::move(region));
  }
  return out;
}

std::vector<ProPoint> ProCurve(std::span<const Grid> score_maps,
                               std::span<const GroundTruthMask> masks) {
  if (score_maps.size() != masks.size()) {
    throw Error(ErrorCode::kShapeMismatch, "map and mask counts differ");
  }
  struct Pixel {
    double score;
    std::int64_t region;  // -1 for normal pixels
  };
  std::vector<Pixel> pixels;
  std::vector<double> region_size;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const Grid& map = score_maps[i];
    const GroundTruthMask& mask = masks[i];
    if (map.height != mask.height || map.width != mask.width) {
      throw Error(ErrorCode::kShapeMismatch,
                  "score map " + std::to_string(i) + " does not match its mask");
    }
    std::vector<std::int64_t> label(mask.pixels.size(), -1);
    for (const auto& region : ConnectedComponents(mask).regions) {
      const auto id = static_cast<std::int64_t>(region_size.size());
      region_size.push_back(static_cast<double>(region.size()));
      for (std::size_t p : region) label[p] = id;
    }
    for (std::size_t p = 0; p < mask.pixels.size(); ++p) {
      if (!std::isfinite(map.values[p])) {
        throw Error(ErrorCode::kNonFiniteValue, "non-finite pixel score");
      }
      pixels.push_back({map.values[p], label[p]});
    }
  }
  if (region_size.empty()) {
    throw Error(ErrorCode::kNoRegions, "no anomalous region in any mask");
  }
  std::size_t normal_total = 0;
  for (const auto& p : pixels) normal_total += p.region < 0 ? 1 : 0;
  if (normal_total == 0) {
    throw Error(ErrorCode::kOneClassOnly, "PRO needs normal pixels");
  }

  std::sort(pixels.begin(), pixels.end(),
            [](const Pixel& a, const Pixel& b) { return a.score > b.score; });
  const double inv_regions = 1.0 / static_cast<double>(region_size.size());
  std::vector<ProPoint> curve{{0.0, 0.0}};
  std::size_t false_pos = 0;
  double overlap_sum = 0.0;
  for (std::size_t i = 0; i < pixels.size();) {
    std::size_t j = i;
    for (; j < pixels.size() && pixels[j].score == pixels[i].score; ++j) {
      if (pixels[j].region < 0) {
        ++false_pos;
      } else {
        overlap_sum += 1.0 / region_size[pixels[j].region];
      }
    }
    curve.push_back({static_cast<double>(false_pos) /
                         static_cast<double>(normal_total),
                     overlap_sum * inv_regions});
    i = j;
  }
  return curve;
}

double IntegrateProCurve(std::span<const ProPoint> curve, double fpr_limit) {
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fpr_limit must be in (0, 1]");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const ProPoint& a = curve[i - 1];
    const ProPoint& b = curve[i];
    if (a.fpr >= fpr_limit) break;
    if (b.fpr <= fpr_limit) {
      area += 0.5 * (b.fpr - a.fpr) * (a.overlap + b.overlap);
    } else {
      const double t = (fpr_limit - a.fpr) / (b.fpr - a.fpr);
      const double at_limit = a.overlap + t * (b.overlap - a.overlap);
      area += 0.5 * (fpr_limit - a.fpr) * (a.overlap + at_limit);
      break;
    }
  }
  // Overlap means can round past 1; the exact integral never does.
  return std::min(1.0, area / fpr_limit);
}

double ProScore(std::span<const Grid> score_maps,
                std::span<const GroundTruthMask> masks, double fpr_limit) {
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fpr_limit must be in (0, 1]");
  }
  return IntegrateProCurve(ProCurve(score_maps, masks), fpr_limit);
}

}  // namespace pcad
