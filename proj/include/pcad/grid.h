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

#ifndef PCAD_GRID_H_
#define PCAD_GRID_H_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pcad {

// Row-major 2-D field of doubles. Used for raw (unnormalized) pixel scores.
struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), values(h * w, fill) {}
  Grid(std::size_t h, std::size_t w, std::vector<double> v)
      : height(h), width(w), values(std::move(v)) {}

  double& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
  double at(std::size_t r, std::size_t c) const {
    return values[r * width + c];
  }
  std::size_t size() const { return values.size(); }

  bool operator==(const Grid&) const = default;
};

// Patch-level squared residuals, one per grid cell.
struct AnomalyMap {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::vector<double> scores;

  double at(std::size_t r, std::size_t c) const {
    return scores[r * grid_w + c];
  }
  Grid AsGrid() const { return Grid(grid_h, grid_w, scores); }
};

// Min-max normalized pixel scores, every value in [0, 1].
struct PixelMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const {
    return values[r * width + c];
  }
};

// Binary ground-truth mask; 1 marks an anomalous pixel.
struct GroundTruthMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  GroundTruthMask() = default;
  GroundTruthMask(std::size_t h, std::size_t w)
      : height(h), width(w), pixels(h * w, 0) {}

  std::uint8_t at(std::size_t r, std::size_t c) const {
    return pixels[r * width + c];
  }
  std::uint8_t& at(std::size_t r, std::size_t c) {
    return pixels[r * width + c];
  }

  bool operator==(const GroundTruthMask&) const = default;
};

}  // namespace pcad

#endif  // PCAD_GRID_H_
