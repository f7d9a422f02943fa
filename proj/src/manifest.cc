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

#include "pcad/manifest.h"

#include <fstream>
#include <map>

#include "pcad/error.h"

namespace pcad {
namespace {

Role ParseRole(const std::string& s) {
  if (s == "train") return Role::kTrain;
  if (s == "test") return Role::kTest;
  throw Error(ErrorCode::kInvalidManifest, "unknown role '" + s + "'");
}

}  // namespace

std::filesystem::path Manifest::Resolve(const std::string& file) const {
  const std::filesystem::path p(file);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<const ManifestItem*> Manifest::Items(Role role) const {
  std::vector<const ManifestItem*> out;
  for (const auto& item : items) {
    if (item.role == role) out.push_back(&item);
  }
  return out;
}

std::vector<SupportImage> Manifest::SupportImages() const {
  std::vector<SupportImage> out;
  std::map<std::string, std::size_t> index;
  for (const auto& item : items) {
    if (item.role != Role::kTrain) continue;
    auto [it, inserted] = index.emplace(item.image_id, out.size());
    if (inserted) out.push_back(SupportImage{item.image_id, {}});
    out[it->second].views.push_back(&item);
  }
  return out;
}

Manifest ParseManifest(const nlohmann::json& j,
                       const std::filesystem::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  try {
    m.category = j.value("category", std::string());
    if (!j.contains("items") || !j.at("items").is_array()) {
      throw Error(ErrorCode::kInvalidManifest, "manifest needs an items array");
    }
    for (const auto& e : j.at("items")) {
      ManifestItem item;
      item.role = ParseRole(e.at("role").get<std::string>());
      item.image_id = e.at("image_id").get<std::string>();
      item.feature_file = e.at("feature_file").get<std::string>();
      if (e.contains("mask_file") && !e.at("mask_file").is_null()) {
        item.mask_file = e.at("mask_file").get<std::string>();
      }
      item.image_label = e.at("image_label").get<int>();
      if (item.image_label != 0 && item.image_label != 1) {
        throw Error(ErrorCode::kInvalidManifest,
                    "image_label must be 0 or 1 for " + item.image_id);
      }
      item.original_height = e.at("original_height").get<std::uint32_t>();
      item.original_width = e.at("original_width").get<std::uint32_t>();
      m.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidManifest, ex.what());
  }
  return m;
}

nlohmann::json ManifestToJson(const Manifest& manifest) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : manifest.items) {
    nlohmann::json e = {
        {"role", item.role == Role::kTrain ? "train" : "test"},
        {"image_id", item.image_id},
        {"feature_file", item.feature_file},
        {"image_label", item.image_label},
        {"original_height", item.original_height},
        {"original_width", item.original_width},
    };
    if (item.mask_file) e["mask_file"] = *item.mask_file;
    items.push_back(std::move(e));
  }
  return {{"category", manifest.category}, {"items", std::move(items)}};
}

Manifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidManifest, ex.what());
  }
  return ParseManifest(j, path.parent_path());
}

void SaveManifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  out << ManifestToJson(manifest).dump(2) << "\n";
}

}  // namespace pcad
