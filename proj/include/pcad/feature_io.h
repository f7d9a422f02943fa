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

// Binary file formats shared with the feature extractor and the CLI.
//
// SFM1 feature map, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "SFM1"
//   4       4     version (u32, = 1)
//   8       4     grid_h (u32)
//   12      4     grid_w (u32)
//   16      4     dim (u32)
//   20      4     tag_len (u32)
//   24      *     tag bytes, zero-padded to a multiple of 4
//   ...     *     grid_h * grid_w * dim IEEE-754 f32, row-major over
//                 (row, col, channel)
//
// RAWF raw score map: "RAWF" | h u32 | w u32 | h*w f32, row-major.
//
// Masks and exported maps are binary PGM (P5, maxval <= 255).

#ifndef PCAD_FEATURE_IO_H_
#define PCAD_FEATURE_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pcad/grid.h"

namespace pcad {

// Largest accepted grid_h / grid_w / dim / tag_len in an SFM1 header.
inline constexpr std::uint32_t kMaxSfmDimension = 1u << 20;

struct FeatureMap {
  std::uint32_t grid_h = 0;
  std::uint32_t grid_w = 0;
  std::uint32_t dim = 0;
  std::vector<float> data;
  std::string source_tag;

  std::size_t patch_count() const {
    return static_cast<std::size_t>(grid_h) * grid_w;
  }
  std::span<const float> patch(std::size_t index) const {
    return {data.data() + index * dim, dim};
  }

  bool operator==(const FeatureMap&) const = default;
};

// Throws kDimensionMismatch / kNonFiniteValue / kInvalidHeader when the
// FeatureMap invariants are violated.
void ValidateFeatureMap(const FeatureMap& map);

std::vector<std::uint8_t> EncodeFeatureMap(const FeatureMap& map);
FeatureMap DecodeFeatureMap(std::span<const std::uint8_t> bytes);

// Returns the number of bytes written.
std::size_t WriteFeatureMap(const FeatureMap& map, std::ostream& out);
FeatureMap ReadFeatureMap(std::istream& in);

void WriteFeatureMapFile(const FeatureMap& map,
                         const std::filesystem::path& path);
FeatureMap ReadFeatureMapFile(const std::filesystem::path& path);

GroundTruthMask DecodeMaskPgm(std::span<const std::uint8_t> bytes);
GroundTruthMask ReadMaskPgm(std::istream& in);
GroundTruthMask ReadMaskPgmFile(const std::filesystem::path& path);
// Writes anomalous pixels as 255.
std::size_t WriteMaskPgm(const GroundTruthMask& mask, std::ostream& out);
void WriteMaskPgmFile(const GroundTruthMask& mask,
                      const std::filesystem::path& path);

// Pixel value is floor(v * 255 + 0.5); requires every value in [0, 1].
std::size_t WriteMapPgm(const PixelMap& map, std::ostream& out);
void WriteMapPgmFile(const PixelMap& map, const std::filesystem::path& path);

std::size_t WriteRawMap(const Grid& grid, std::ostream& out);
Grid ReadRawMap(std::istream& in);
void WriteRawMapFile(const Grid& grid, const std::filesystem::path& path);
Grid ReadRawMapFile(const std::filesystem::path& path);

// Whole-file helpers; throw kIoFailure on open/read/write failure.
std::vector<std::uint8_t> ReadAllBytes(std::istream& in);
std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

}  // namespace pcad

#endif  // PCAD_FEATURE_IO_H_
