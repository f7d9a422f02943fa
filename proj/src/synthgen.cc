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

#include "pcad/synthgen.h"

#include <cmath>
#include <cstdio>

#include "pcad/error.h"
#include "pcad/rng.h"

namespace pcad {
namespace {

constexpr std::uint64_t kMeanStream = 1;
constexpr std::uint64_t kBasisStream = 2;
constexpr std::uint64_t kDirectionStream = 3;

std::string Numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%03zu", prefix, i);
  return buf;
}

// Removes the components of v along the columns of `basis`, twice, so the
// residual is orthogonal to working precision.
void OrthogonalizeAgainst(std::vector<double>& v, const DenseMatrix& basis,
                          std::size_t columns) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < columns; ++c) {
      double dot = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += basis(i, c) * v[i];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * basis(i, c);
    }
  }
}

void Normalize(std::vector<double>& v) {
  double len = 0.0;
  for (double x : v) len += x * x;
  len = std::sqrt(len);
  if (!(len > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "degenerate random direction");
  }
  for (double& x : v) x /= len;
}

FeatureMap GenerateMap(const SynthCategory& cat, std::uint64_t image_index,
                       bool anomalous, const std::string& tag) {
  const SynthSpec& spec = cat.spec;
  FeatureMap map;
  map.grid_h = spec.grid_h;
  map.grid_w = spec.grid_w;
  map.dim = spec.dim;
  map.source_tag = tag;
  map.data.resize(map.patch_count() * spec.dim);
  const PatchBlock& block = spec.anomaly_block;
  std::vector<double> z(spec.normal_rank);
  std::vector<double> x(spec.dim);
  for (std::uint32_t r = 0; r < spec.grid_h; ++r) {
    for (std::uint32_t c = 0; c < spec.grid_w; ++c) {
      const std::uint64_t p = std::uint64_t{r} * spec.grid_w + c;
      CounterRng rng(spec.seed, ((image_index + 1) << 32) | p);
      for (double& v : z) v = rng.NextNormal();
      for (std::uint32_t i = 0; i < spec.dim; ++i) {
        double v = cat.mean[i];
        for (std::uint32_t k = 0; k < spec.normal_rank; ++k) {
          v += cat.basis(i, k) * z[k];
        }
        x[i] = v + spec.noise_std * rng.NextNormal();
      }
      const bool in_block = r >= block.row && r < block.row + block.height &&
                            c >= block.col && c < block.col + block.width;
      if (anomalous && in_block) {
        for (std::uint32_t i = 0; i < spec.dim; ++i) {
          x[i] += spec.anomaly_magnitude * cat.anomaly_direction[i];
        }
      }
      float* dst = map.data.data() + p * spec.dim;
      for (std::uint32_t i = 0; i < spec.dim; ++i) {
        dst[i] = static_cast<float>(x[i]);
      }
    }
  }
  return map;
}

GroundTruthMask BlockMask(const SynthSpec& spec, bool anomalous) {
  GroundTruthMask mask(std::size_t{spec.grid_h} * spec.patch_size,
                       std::size_t{spec.grid_w} * spec.patch_size);
  if (!anomalous) return mask;
  const PatchBlock& b = spec.anomaly_block;
  for (std::size_t r = std::size_t{b.row} * spec.patch_size;
       r < std::size_t{b.row + b.height} * spec.patch_size; ++r) {
    for (std::size_t c = std::size_t{b.col} * spec.patch_size;
         c < std::size_t{b.col + b.width} * spec.patch_size; ++c) {
      mask.at(r, c) = 1;
    }
  }
  return mask;
}

}  // namespace

void ValidateSynthSpec(const SynthSpec& spec) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidSpec, msg);
  };
  if (spec.dim == 0) fail("dim must be >= 1");
  if (spec.normal_rank >= spec.dim) fail("normal_rank must be < dim");
  if (spec.grid_h == 0 || spec.grid_w == 0) fail("grid must be non-empty");
  if (spec.patch_size == 0) fail("patch_size must be >= 1");
  if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std)) {
    fail("noise_std must be finite and >= 0");
  }
  if (!std::isfinite(spec.anomaly_magnitude)) {
    fail("anomaly_magnitude must be finite");
  }
  const PatchBlock& b = spec.anomaly_block;
  if (b.height == 0 || b.width == 0 || b.row + b.height > spec.grid_h ||
      b.col + b.width > spec.grid_w) {
    fail("anomaly_block must lie within the grid");
  }
  if (spec.n_train == 0) fail("n_train must be >= 1");
}

SynthSpec SynthSpecFromJson(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.category = j.value("category", s.category);
    s.dim = j.value("dim", s.dim);
    s.normal_rank = j.value("normal_rank", s.normal_rank);
    s.grid_h = j.value("grid_h", s.grid_h);
    s.grid_w = j.value("grid_w", s.grid_w);
    s.patch_size = j.value("patch_size", s.patch_size);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.anomaly_magnitude = j.value("anomaly_magnitude", s.anomaly_magnitude);
    if (j.contains("anomaly_block")) {
      const auto& b = j.at("anomaly_block");
      s.anomaly_block = PatchBlock{b.at("row").get<std::uint32_t>(),
                                   b.at("col").get<std::uint32_t>(),
                                   b.at("h").get<std::uint32_t>(),
                                   b.at("w").get<std::uint32_t>()};
    }
    s.n_train = j.value("n_train", s.n_train);
    s.augmentations = j.value("augmentations", s.augmentations);
    s.n_test_normal = j.value("n_test_normal", s.n_test_normal);
    s.n_test_anomalous = j.value("n_test_anomalous", s.n_test_anomalous);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidSpec, ex.what());
  }
  ValidateSynthSpec(s);
  return s;
}

nlohmann::json SynthSpecToJson(const SynthSpec& s) {
  return {{"category", s.category},
          {"dim", s.dim},
          {"normal_rank", s.normal_rank},
          {"grid_h", s.grid_h},
          {"grid_w", s.grid_w},
          {"patch_size", s.patch_size},
          {"noise_std", s.noise_std},
          {"anomaly_magnitude", s.anomaly_magnitude},
          {"anomaly_block",
           {{"row", s.anomaly_block.row},
            {"col", s.anomaly_block.col},
            {"h", s.anomaly_block.height},
            {"w", s.anomaly_block.width}}},
          {"n_train", s.n_train},
          {"augmentations", s.augmentations},
          {"n_test_normal", s.n_test_normal},
          {"n_test_anomalous", s.n_test_anomalous},
          {"seed", s.seed}};
}

std::vector<FeatureMap> SynthCategory::TrainFeatures() const {
  std::vector<FeatureMap> out;
  for (const auto& img : train) out.push_back(img.features);
  return out;
}

std::vector<FeatureMap> SynthCategory::TestFeatures() const {
  std::vector<FeatureMap> out;
  for (const auto& img : test) out.push_back(img.features);
  return out;
}

SynthCategory GenerateSynthetic(const SynthSpec& spec) {
  ValidateSynthSpec(spec);
  SynthCategory cat{spec, std::vector<double>(spec.dim),
                    DenseMatrix(spec.dim, std::max(spec.normal_rank, 1u)),
                    std::vector<double>(spec.dim), {}, {}};

  CounterRng mean_rng(spec.seed, kMeanStream);
  for (double& m : cat.mean) m = mean_rng.NextNormal();

  CounterRng basis_rng(spec.seed, kBasisStream);
  for (std::uint32_t k = 0; k < spec.normal_rank; ++k) {
    std::vector<double> col(spec.dim);
    for (double& v : col) v = basis_rng.NextNormal();
    OrthogonalizeAgainst(col, cat.basis, k);
    Normalize(col);
    for (std::uint32_t i = 0; i < spec.dim; ++i) cat.basis(i, k) = col[i];
  }
  if (spec.normal_rank == 0) {
    // A rank-0 normal subspace is represented by a single zero column.
    for (std::uint32_t i = 0; i < spec.dim; ++i) cat.basis(i, 0) = 0.0;
  }

  CounterRng dir_rng(spec.seed, kDirectionStream);
  for (double& v : cat.anomaly_direction) v = dir_rng.NextNormal();
  OrthogonalizeAgainst(cat.anomaly_direction, cat.basis, spec.normal_rank);
  Normalize(cat.anomaly_direction);
  OrthogonalizeAgainst(cat.anomaly_direction, cat.basis, spec.normal_rank);
  Normalize(cat.anomaly_direction);

  std::uint64_t image_index = 0;
  const std::uint32_t views = 1 + spec.augmentations;
  for (std::uint32_t t = 0; t < spec.n_train; ++t) {
    const std::string id = Numbered("train", t);
    for (std::uint32_t v = 0; v < views; ++v, ++image_index) {
      SynthImage img;
      img.image_id = id;
      img.features = GenerateMap(cat, image_index, false,
                                 id + "/view" + std::to_string(v));
      img.mask = BlockMask(spec, false);
      cat.train.push_back(std::move(img));
    }
  }
  const std::uint32_t n_test = spec.n_test_normal + spec.n_test_anomalous;
  for (std::uint32_t t = 0; t < n_test; ++t, ++image_index) {
    const bool anomalous = t >= spec.n_test_normal;
    SynthImage img;
    img.image_id = Numbered("test", t);
    img.label = anomalous ? 1 : 0;
    img.features = GenerateMap(cat, image_index, anomalous, img.image_id);
    img.mask = BlockMask(spec, anomalous);
    cat.test.push_back(std::move(img));
  }
  return cat;
}

Manifest WriteSynthCategory(const SynthCategory& category,
                            const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "features");
  fs::create_directories(dir / "masks");
  Manifest manifest;
  manifest.category = category.spec.category;
  manifest.base_dir = dir;
  const auto height = category.spec.grid_h * category.spec.patch_size;
  const auto width = category.spec.grid_w * category.spec.patch_size;

  for (std::size_t i = 0; i < category.train.size(); ++i) {
    const SynthImage& img = category.train[i];
    const std::string file = "features/" + Numbered("trainview", i) + ".sfm";
    WriteFeatureMapFile(img.features, dir / file);
    manifest.items.push_back(
        ManifestItem{Role::kTrain, img.image_id, file, std::nullopt, 0,
                     height, width});
  }
  for (const SynthImage& img : category.test) {
    const std::string file = "features/" + img.image_id + ".sfm";
    WriteFeatureMapFile(img.features, dir / file);
    ManifestItem item{Role::kTest, img.image_id, file, std::nullopt,
                      img.label, height, width};
    if (img.label == 1) {
      const std::string mask_file = "masks/" + img.image_id + ".pgm";
      WriteMaskPgmFile(img.mask, dir / mask_file);
      item.mask_file = mask_file;
    }
    manifest.items.push_back(std::move(item));
  }
  SaveManifest(manifest, dir / "manifest.json");
  return manifest;
}

}  // namespace pcad
