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

// Per-category manifest:
//
//   {
//     "category": "bottle",
//     "items": [
//       {"role": "train", "image_id": "000", "feature_file": "f/000_a0.sfm",
//        "image_label": 0, "original_height": 672, "original_width": 672},
//       {"role": "test", "image_id": "t003", "feature_file": "f/t003.sfm",
//        "mask_file": "m/t003.pgm", "image_label": 1, ...}
//     ]
//   }
//
// Relative paths resolve against the manifest's directory. Augmented views
// of one support image are separate "train" items sharing an image_id.

#ifndef PCAD_MANIFEST_H_
#define PCAD_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace pcad {

enum class Role { kTrain, kTest };

struct ManifestItem {
  Role role = Role::kTest;
  std::string image_id;
  std::string feature_file;
  std::optional<std::string> mask_file;
  int image_label = 0;
  std::uint32_t original_height = 0;
  std::uint32_t original_width = 0;
};

// All train views that belong to one support image.
struct SupportImage {
  std::string image_id;
  std::vector<const ManifestItem*> views;
};

struct Manifest {
  std::string category;
  std::vector<ManifestItem> items;
  std::filesystem::path base_dir;

  std::filesystem::path Resolve(const std::string& file) const;
  std::vector<const ManifestItem*> Items(Role role) const;
  // Train items grouped by image_id in order of first appearance.
  std::vector<SupportImage> SupportImages() const;
};

Manifest ParseManifest(const nlohmann::json& j,
                       const std::filesystem::path& base_dir);
nlohmann::json ManifestToJson(const Manifest& manifest);

Manifest LoadManifest(const std::filesystem::path& path);
void SaveManifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace pcad

#endif  // PCAD_MANIFEST_H_
