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

#include "pcad/subspace_model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "byte_io.h"
#include "pcad/error.h"

namespace pcad {
namespace {

constexpr std::string_view kModelMagic = "SSM1";
constexpr std::uint32_t kVersionF64 = 1;
constexpr std::uint32_t kVersionF32 = 2;
constexpr std::size_t kModelHeaderBytes = 4 + 4 + 4 + 4 + 8 + 8;

bool AllPatchesIdentical(std::span<const FeatureMap> maps) {
  const auto first = maps.front().patch(0);
  for (const auto& map : maps) {
    for (std::size_t p = 0; p < map.patch_count(); ++p) {
      const auto row = map.patch(p);
      if (!std::equal(row.begin(), row.end(), first.begin())) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<double> SubspaceModel::ExplainedVarianceCurve() const {
  double total = 0.0;
  for (double l : eigenvalues) total += l;
  std::vector<double> curve;
  curve.reserve(eigenvalues.size());
  double running = 0.0;
  for (double l : eigenvalues) {
    running += l;
    curve.push_back(total > 0.0 ? running / total : 0.0);
  }
  return curve;
}

std::uint32_t SelectRank(std::span<const double> eigenvalues, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "tau must be in (0, 1], got " + std::to_string(tau));
  }
  double total = 0.0;
  for (double l : eigenvalues) total += std::max(l, 0.0);
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kAllZeroSpectrum, "spectrum has no positive value");
  }
  const double target = tau * total;
  double running = 0.0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    running += std::max(eigenvalues[i], 0.0);
    if (running >= target) return static_cast<std::uint32_t>(i + 1);
  }
  // Unreachable for tau <= 1: the final running sum equals total.
  return static_cast<std::uint32_t>(eigenvalues.size());
}

SubspaceModel Fit(std::span<const FeatureMap> features, double tau,
                  const JacobiOptions& options) {
  if (features.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no feature maps to fit");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "tau must be in (0, 1], got " + std::to_string(tau));
  }
  const std::uint32_t dim = features.front().dim;
  std::size_t n = 0;
  for (const auto& map : features) {
    if (map.dim != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "feature dim " + std::to_string(map.dim) + " in '" +
                      map.source_tag + "' != " + std::to_string(dim));
    }
    if (map.data.size() != map.patch_count() * map.dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "malformed feature map '" + map.source_tag + "'");
    }
    n += map.patch_count();
  }
  if (n == 0 || dim == 0) throw Error(ErrorCode::kEmptyInput, "no patches");
  if (AllPatchesIdentical(features)) {
    throw Error(ErrorCode::kDegenerateData,
                "all patches are identical; total variance is zero");
  }

  std::vector<double> mean(dim, 0.0);
  for (const auto& map : features) {
    for (std::size_t p = 0; p < map.patch_count(); ++p) {
      const auto row = map.patch(p);
      for (std::uint32_t c = 0; c < dim; ++c) mean[c] += row[c];
    }
  }
  for (double& m : mean) m /= static_cast<double>(n);

  PrincipalAxes axes = [&]() {
    if (n >= dim) {
      CovarianceAccumulator acc(mean);
      std::vector<double> buffer;
      for (const auto& map : features) {
        buffer.assign(map.data.begin(), map.data.end());
        acc.AddRows(buffer);
      }
      return PrincipalAxesFromCovariance(acc.Finish(), options);
    }
    DenseMatrix rows(n, dim);
    std::size_t r = 0;
    for (const auto& map : features) {
      for (std::size_t p = 0; p < map.patch_count(); ++p, ++r) {
        const auto src = map.patch(p);
        std::copy(src.begin(), src.end(), rows.row(r).begin());
      }
    }
    return ComputePrincipalAxes(rows, mean, options);
  }();

  double total = 0.0;
  for (double l : axes.eigenvalues) total += l;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kDegenerateData, "total variance is zero");
  }
  const std::uint32_t rank =
      std::min<std::uint32_t>(SelectRank(axes.eigenvalues, tau),
                              static_cast<std::uint32_t>(axes.vectors.cols()));

  DenseMatrix basis(dim, rank);
  for (std::uint32_t i = 0; i < dim; ++i) {
    for (std::uint32_t j = 0; j < rank; ++j) basis(i, j) = axes.vectors(i, j);
  }
  return SubspaceModel{dim,
                       std::move(mean),
                       std::move(basis),
                       std::move(axes.eigenvalues),
                       rank,
                       tau,
                       static_cast<std::uint64_t>(n)};
}

SubspaceModel FitBatched(std::span<const FeatureMap> test_features, double tau,
                         const JacobiOptions& options) {
  return Fit(test_features, tau, options);
}

std::size_t SerializedModelSize(std::uint32_t dim, std::uint32_t rank,
                                ModelPrecision precision) {
  const std::size_t width = precision == ModelPrecision::kFloat64 ? 8 : 4;
  return kModelHeaderBytes +
         width * (std::size_t{dim} + std::size_t{dim} * rank + dim);
}

std::vector<std::uint8_t> SerializeModel(const SubspaceModel& model,
                                         ModelPrecision precision) {
  const bool f64 = precision == ModelPrecision::kFloat64;
  internal::ByteWriter w;
  w.Bytes(kModelMagic);
  w.U32(f64 ? kVersionF64 : kVersionF32);
  w.U32(model.dim);
  w.U32(model.rank);
  w.F64(model.tau);
  w.U64(model.fit_row_count);
  auto put = [&](double v) {
    if (f64) {
      w.F64(v);
    } else {
      w.F32(static_cast<float>(v));
    }
  };
  for (double v : model.mean) put(v);
  for (std::uint32_t c = 0; c < model.rank; ++c) {
    for (std::uint32_t r = 0; r < model.dim; ++r) put(model.basis(r, c));
  }
  for (double v : model.eigenvalues) put(v);
  return w.Take();
}

SubspaceModel DeserializeModel(std::span<const std::uint8_t> bytes) {
  internal::ByteReader r(bytes);
  if (r.Bytes(kModelMagic.size(), "magic") != kModelMagic) {
    throw Error(ErrorCode::kBadMagic, "expected model magic SSM1");
  }
  const std::uint32_t version = r.U32("version");
  if (version != kVersionF64 && version != kVersionF32) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported model version " + std::to_string(version));
  }
  const bool f64 = version == kVersionF64;
  const std::uint32_t dim = r.U32("dim");
  const std::uint32_t rank = r.U32("rank");
  const double tau = r.F64("tau");
  const std::uint64_t rows = r.U64("fit_row_count");
  if (dim == 0 || dim > kMaxSfmDimension || rank == 0 || rank > dim) {
    throw Error(ErrorCode::kInvalidHeader,
                "invalid model shape dim=" + std::to_string(dim) +
                    " rank=" + std::to_string(rank));
  }
  const std::size_t payload =
      SerializedModelSize(dim, rank,
                          f64 ? ModelPrecision::kFloat64
                              : ModelPrecision::kFloat32) -
      kModelHeaderBytes;
  r.Require(payload, "model payload");
  auto get = [&]() -> double {
    return f64 ? r.F64("payload") : static_cast<double>(r.F32("payload"));
  };
  std::vector<double> mean(dim);
  for (double& v : mean) v = get();
  DenseMatrix basis(dim, rank);
  for (std::uint32_t c = 0; c < rank; ++c) {
    for (std::uint32_t i = 0; i < dim; ++i) basis(i, c) = get();
  }
  std::vector<double> eigenvalues(dim);
  for (double& v : eigenvalues) v = get();
  return SubspaceModel{dim,  std::move(mean), std::move(basis),
                       std::move(eigenvalues), rank, tau, rows};
}

void SaveModel(const SubspaceModel& model, const std::filesystem::path& path,
               ModelPrecision precision) {
  WriteFileBytes(path, SerializeModel(model, precision));
}

SubspaceModel LoadModel(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kModelNotFound,
                "model file not found: " + path.string());
  }
  return DeserializeModel(ReadFileBytes(path));
}

}  // namespace pcad
