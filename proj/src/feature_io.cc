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

#include "pcad/feature_io.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "byte_io.h"
#include "pcad/error.h"

namespace pcad {
namespace {

constexpr std::string_view kSfmMagic = "SFM1";
constexpr std::uint32_t kSfmVersion = 1;
constexpr std::string_view kRawMagic = "RAWF";

void CheckMagic(internal::ByteReader& reader, std::string_view magic) {
  const std::string got = reader.Bytes(magic.size(), "magic");
  if (got != magic) {
    throw Error(ErrorCode::kBadMagic, "expected magic " + std::string(magic));
  }
}

std::size_t WriteBytes(std::ostream& out, std::span<const std::uint8_t> bytes) {
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed");
  return bytes.size();
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  }
  return out;
}

// Minimal P5 header tokenizer: skips whitespace and '#' comments.
class PgmHeader {
 public:
  explicit PgmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  unsigned long NextNumber(const char* what) {
    SkipSpaceAndComments();
    if (pos_ >= bytes_.size()) {
      throw Error(ErrorCode::kTruncated,
                  std::string("truncated PGM header at ") + what);
    }
    if (!std::isdigit(bytes_[pos_])) {
      throw Error(ErrorCode::kInvalidHeader,
                  std::string("malformed PGM header at ") + what);
    }
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1ul << 31)) {
        throw Error(ErrorCode::kInvalidHeader, "PGM header value too large");
      }
      ++pos_;
    }
    return v;
  }

  // Consumes the single whitespace byte that terminates the header.
  std::size_t DataOffset() {
    if (pos_ >= bytes_.size()) {
      throw Error(ErrorCode::kTruncated, "truncated PGM header");
    }
    if (!std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::kInvalidHeader, "missing PGM header terminator");
    }
    return pos_ + 1;
  }

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

std::vector<std::uint8_t> EncodePgm(std::size_t height, std::size_t width,
                                    std::span<const std::uint8_t> pixels) {
  const std::string header = "P5\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

}  // namespace

void ValidateFeatureMap(const FeatureMap& map) {
  if (map.grid_h == 0 || map.grid_w == 0 || map.dim == 0) {
    throw Error(ErrorCode::kInvalidHeader, "feature map dimensions must be >= 1");
  }
  if (map.grid_h > kMaxSfmDimension || map.grid_w > kMaxSfmDimension ||
      map.dim > kMaxSfmDimension || map.source_tag.size() > kMaxSfmDimension) {
    throw Error(ErrorCode::kDimensionOverflow, "feature map dimension > 2^20");
  }
  const std::size_t expected = map.patch_count() * map.dim;
  if (map.data.size() != expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature data length " + std::to_string(map.data.size()) +
                    " != " + std::to_string(expected));
  }
  for (float v : map.data) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite feature value in " + map.source_tag);
    }
  }
}

std::vector<std::uint8_t> EncodeFeatureMap(const FeatureMap& map) {
  ValidateFeatureMap(map);
  internal::ByteWriter w;
  w.Bytes(kSfmMagic);
  w.U32(kSfmVersion);
  w.U32(map.grid_h);
  w.U32(map.grid_w);
  w.U32(map.dim);
  w.U32(static_cast<std::uint32_t>(map.source_tag.size()));
  w.Bytes(map.source_tag);
  w.PadTo4();
  for (float v : map.data) w.F32(v);
  return w.Take();
}

FeatureMap DecodeFeatureMap(std::span<const std::uint8_t> bytes) {
  internal::ByteReader r(bytes);
  CheckMagic(r, kSfmMagic);
  const std::uint32_t version = r.U32("version");
  if (version != kSfmVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported SFM version " + std::to_string(version));
  }
  FeatureMap map;
  map.grid_h = r.U32("grid_h");
  map.grid_w = r.U32("grid_w");
  map.dim = r.U32("dim");
  const std::uint32_t tag_len = r.U32("tag_len");
  if (map.grid_h > kMaxSfmDimension || map.grid_w > kMaxSfmDimension ||
      map.dim > kMaxSfmDimension || tag_len > kMaxSfmDimension) {
    throw Error(ErrorCode::kDimensionOverflow, "SFM header dimension > 2^20");
  }
  if (map.grid_h == 0 || map.grid_w == 0 || map.dim == 0) {
    throw Error(ErrorCode::kInvalidHeader, "SFM header has a zero dimension");
  }
  map.source_tag = r.Bytes(tag_len, "tag");
  r.Skip((4 - tag_len % 4) % 4, "tag padding");
  // Sizes are bounded by 2^60, so this cannot overflow.
  const std::uint64_t count =
      std::uint64_t{map.grid_h} * map.grid_w * map.dim;
  if (r.remaining() / 4 < count) {
    throw Error(ErrorCode::kTruncated,
                "SFM data holds fewer than " + std::to_string(count) +
                    " floats");
  }
  map.data.resize(count);
  for (float& v : map.data) {
    v = r.F32("data");
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite value in SFM data");
    }
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kInvalidHeader,
                "SFM file has bytes past the declared data");
  }
  return map;
}

std::size_t WriteFeatureMap(const FeatureMap& map, std::ostream& out) {
  return WriteBytes(out, EncodeFeatureMap(map));
}

FeatureMap ReadFeatureMap(std::istream& in) {
  return DecodeFeatureMap(ReadAllBytes(in));
}

void WriteFeatureMapFile(const FeatureMap& map,
                         const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeFeatureMap(map));
}

FeatureMap ReadFeatureMapFile(const std::filesystem::path& path) {
  return DecodeFeatureMap(ReadFileBytes(path));
}

GroundTruthMask DecodeMaskPgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) {
    throw Error(ErrorCode::kTruncated, "PGM shorter than its magic");
  }
  if (bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::kBadMagic, "expected binary PGM magic P5");
  }
  PgmHeader header(bytes);
  const unsigned long width = header.NextNumber("width");
  const unsigned long height = header.NextNumber("height");
  const unsigned long maxval = header.NextNumber("maxval");
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidHeader, "PGM has a zero dimension");
  }
  if (maxval == 0 || maxval > 255) {
    throw Error(ErrorCode::kInvalidHeader,
                "PGM maxval must be in [1, 255], got " + std::to_string(maxval));
  }
  const std::size_t offset = header.DataOffset();
  const std::size_t count = std::size_t{width} * height;
  if (bytes.size() - offset < count) {
    throw Error(ErrorCode::kTruncated, "PGM pixel data is truncated");
  }
  GroundTruthMask mask(height, width);
  for (std::size_t i = 0; i < count; ++i) {
    mask.pixels[i] = bytes[offset + i] > 0 ? 1 : 0;
  }
  return mask;
}

GroundTruthMask ReadMaskPgm(std::istream& in) {
  return DecodeMaskPgm(ReadAllBytes(in));
}

GroundTruthMask ReadMaskPgmFile(const std::filesystem::path& path) {
  return DecodeMaskPgm(ReadFileBytes(path));
}

std::size_t WriteMaskPgm(const GroundTruthMask& mask, std::ostream& out) {
  std::vector<std::uint8_t> pixels(mask.pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = mask.pixels[i] ? 255 : 0;
  }
  return WriteBytes(out, EncodePgm(mask.height, mask.width, pixels));
}

void WriteMaskPgmFile(const GroundTruthMask& mask,
                      const std::filesystem::path& path) {
  auto out = OpenForWrite(path);
  WriteMaskPgm(mask, out);
}

std::size_t WriteMapPgm(const PixelMap& map, std::ostream& out) {
  std::vector<std::uint8_t> pixels(map.values.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = map.values[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pixel map value outside [0, 1]");
    }
    pixels[i] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
  }
  return WriteBytes(out, EncodePgm(map.height, map.width, pixels));
}

void WriteMapPgmFile(const PixelMap& map, const std::filesystem::path& path) {
  auto out = OpenForWrite(path);
  WriteMapPgm(map, out);
}

std::size_t WriteRawMap(const Grid& grid, std::ostream& out) {
  internal::ByteWriter w;
  w.Bytes(kRawMagic);
  w.U32(static_cast<std::uint32_t>(grid.height));
  w.U32(static_cast<std::uint32_t>(grid.width));
  for (double v : grid.values) w.F32(static_cast<float>(v));
  return WriteBytes(out, w.Take());
}

Grid ReadRawMap(std::istream& in) {
  const auto bytes = ReadAllBytes(in);
  internal::ByteReader r(bytes);
  CheckMagic(r, kRawMagic);
  const std::uint32_t h = r.U32("height");
  const std::uint32_t w = r.U32("width");
  if (h > kMaxSfmDimension || w > kMaxSfmDimension) {
    throw Error(ErrorCode::kDimensionOverflow, "raw map dimension > 2^20");
  }
  const std::uint64_t count = std::uint64_t{h} * w;
  if (r.remaining() / 4 < count) {
    throw Error(ErrorCode::kTruncated, "raw map data is truncated");
  }
  Grid grid(h, w);
  for (double& v : grid.values) v = r.F32("data");
  return grid;
}

void WriteRawMapFile(const Grid& grid, const std::filesystem::path& path) {
  auto out = OpenForWrite(path);
  WriteRawMap(grid, out);
}

Grid ReadRawMapFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return ReadRawMap(in);
}

std::vector<std::uint8_t> ReadAllBytes(std::istream& in) {
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "read failed");
  return bytes;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return ReadAllBytes(in);
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes) {
  auto out = OpenForWrite(path);
  WriteBytes(out, bytes);
}

}  // namespace pcad
