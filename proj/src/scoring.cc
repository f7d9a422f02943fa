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

#include "pcad/scoring.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "pcad/error.h"

namespace pcad {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Half-sample symmetric reflection: ... c b a | a b c ... | c b a ...
std::ptrdiff_t Reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  const std::ptrdiff_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::vector<double> GaussianKernel(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * (t * t) / (sigma * sigma));
    k[t + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// 1-D bilinear sample positions for a half-pixel-center resize.
struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<Tap> BilinearTaps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[o] = Tap{lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

AnomalyMap PatchScores(const SubspaceModel& model, const FeatureMap& features) {
  if (features.dim != model.dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature dim " + std::to_string(features.dim) +
                    " != model dim " + std::to_string(model.dim));
  }
  const std::size_t patches = features.patch_count();
  AnomalyMap out{features.grid_h, features.grid_w,
                 std::vector<double>(patches, 0.0)};
  if (model.rank >= model.dim) return out;

  const auto d = static_cast<Eigen::Index>(model.dim);
  const auto r = static_cast<Eigen::Index>(model.rank);
  Eigen::Map<const RowMajorMatrix> basis(model.basis.data().data(), d, r);
  Eigen::Map<const Eigen::RowVectorXd> mu(model.mean.data(), d);
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      x(features.data.data(), static_cast<Eigen::Index>(patches), d);

  RowMajorMatrix centered = x.cast<double>().rowwise() - mu;
  const RowMajorMatrix coords = centered * basis;
  centered.noalias() -= coords * basis.transpose();
  for (std::size_t p = 0; p < patches; ++p) {
    out.scores[p] = centered.row(static_cast<Eigen::Index>(p)).squaredNorm();
  }
  return out;
}

std::size_t TailCount(double rho, std::size_t cells) {
  const double x = rho * static_cast<double>(cells) / 100.0;
  const double nearest = std::round(x);
  // Products like 7 * 100 / 100 must not round up to 8.
  double count = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)
                     ? nearest
                     : std::ceil(x);
  count = std::clamp(count, 1.0, static_cast<double>(cells));
  return static_cast<std::size_t>(count);
}

ImageScore TailValueAtRisk(const AnomalyMap& map, double rho) {
  if (map.scores.empty()) {
    throw Error(ErrorCode::kEmptyMap, "anomaly map has no cells");
  }
  if (!(rho > 0.0 && rho <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "rho must be in (0, 100], got " + std::to_string(rho));
  }
  const std::size_t k = TailCount(rho, map.scores.size());
  std::vector<double> sorted = map.scores;
  std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end(),
                    std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
  return ImageScore{sum / static_cast<double>(k), rho};
}

Grid UpsampleBilinear(const Grid& grid, std::size_t target_h,
                      std::size_t target_w) {
  if (grid.height == 0 || grid.width == 0) {
    throw Error(ErrorCode::kEmptyMap, "cannot upsample an empty grid");
  }
  if (target_h < grid.height || target_w < grid.width) {
    throw Error(ErrorCode::kInvalidTarget,
                "target " + std::to_string(target_h) + "x" +
                    std::to_string(target_w) + " is smaller than the grid");
  }
  const auto rows = BilinearTaps(grid.height, target_h);
  const auto cols = BilinearTaps(grid.width, target_w);

  // Horizontal pass into grid.height x target_w, then vertical.
  Grid wide(grid.height, target_w);
  for (std::size_t r = 0; r < grid.height; ++r) {
    for (std::size_t c = 0; c < target_w; ++c) {
      const Tap& t = cols[c];
      wide.at(r, c) =
          grid.at(r, t.lo) + t.frac * (grid.at(r, t.hi) - grid.at(r, t.lo));
    }
  }
  Grid out(target_h, target_w);
  for (std::size_t r = 0; r < target_h; ++r) {
    const Tap& t = rows[r];
    for (std::size_t c = 0; c < target_w; ++c) {
      out.at(r, c) =
          wide.at(t.lo, c) + t.frac * (wide.at(t.hi, c) - wide.at(t.lo, c));
    }
  }
  return out;
}

Grid GaussianSmooth(const Grid& grid, double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  }
  const std::vector<double> kernel = GaussianKernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto h = static_cast<std::ptrdiff_t>(grid.height);
  const auto w = static_cast<std::ptrdiff_t>(grid.width);

  Grid tmp(grid.height, grid.width);
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
        acc += kernel[t + radius] * grid.at(r, Reflect(c + t, w));
      }
      tmp.at(r, c) = acc;
    }
  }
  Grid out(grid.height, grid.width);
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
      const double k = kernel[t + radius];
      const std::ptrdiff_t src = Reflect(r + t, h);
      for (std::ptrdiff_t c = 0; c < w; ++c) out.at(r, c) += k * tmp.at(src, c);
    }
  }
  return out;
}

PixelMap NormalizeMinMax(const Grid& grid) {
  PixelMap out{grid.height, grid.width,
               std::vector<double>(grid.values.size(), 0.0)};
  if (grid.values.empty()) return out;
  const auto [lo_it, hi_it] =
      std::minmax_element(grid.values.begin(), grid.values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    out.values[i] = std::clamp((grid.values[i] - lo) / range, 0.0, 1.0);
  }
  return out;
}

ScoredImage ScoreImage(const SubspaceModel& model, const FeatureMap& features,
                       std::size_t target_h, std::size_t target_w,
                       const ScoringParams& params) {
  ScoredImage out;
  out.patch_map = PatchScores(model, features);
  out.image_score = TailValueAtRisk(out.patch_map, params.rho);
  out.raw_pixels = GaussianSmooth(
      UpsampleBilinear(out.patch_map.AsGrid(), target_h, target_w),
      params.sigma);
  out.pixel_map = NormalizeMinMax(out.raw_pixels);
  return out;
}

}  // namespace pcad
