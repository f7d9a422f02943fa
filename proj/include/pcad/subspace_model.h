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

// PCA normality subspace.
//
// Normal patch features are modeled as x = mu + C z + noise, where C holds
// the leading r eigenvectors of the patch covariance. r is the smallest rank
// whose eigenvalues cover a fraction tau of the total variance. Only mu, C
// and the spectrum are stored; the noise variance is never estimated.
//
// SSM1 model file, little-endian:
//
//   "SSM1" | version u32 | dim u32 | rank u32 | tau f64 | fit_row_count u64
//   | mean[dim] | basis[dim * rank] (column-major) | eigenvalues[dim]
//
// Version 1 stores mean/basis/eigenvalues as f64 and round-trips bitwise.
// Version 2 stores them as f32 for a smaller footprint and widens on load.

#ifndef PCAD_SUBSPACE_MODEL_H_
#define PCAD_SUBSPACE_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pcad/feature_io.h"
#include "pcad/linalg.h"

namespace pcad {

struct SubspaceModel {
  std::uint32_t dim;
  std::vector<double> mean;
  // dim x rank, orthonormal columns.
  DenseMatrix basis;
  // Full descending spectrum, length dim, all >= 0.
  std::vector<double> eigenvalues;
  std::uint32_t rank;
  double tau;
  std::uint64_t fit_row_count;

  // Cumulative explained-variance ratio after each component.
  std::vector<double> ExplainedVarianceCurve() const;

  bool operator==(const SubspaceModel&) const = default;
};

enum class ModelPrecision { kFloat64, kFloat32 };

// Minimal r >= 1 with sum(lambda[0..r)) >= tau * sum(lambda). Negative
// entries are treated as zero. Throws kAllZeroSpectrum and, for tau outside
// (0, 1], kInvalidArgument.
std::uint32_t SelectRank(std::span<const double> eigenvalues, double tau);

// Fits mean, covariance and eigenbasis on every patch of every map.
//
// Throws kEmptyInput for an empty list, kDimensionMismatch when maps
// disagree on dim, and kDegenerateData when all patches are identical.
SubspaceModel Fit(std::span<const FeatureMap> features, double tau,
                  const JacobiOptions& options = {});

// Batched zero-shot fit: same estimator, applied to the unlabeled test set.
SubspaceModel FitBatched(std::span<const FeatureMap> test_features,
                         double tau, const JacobiOptions& options = {});

std::vector<std::uint8_t> SerializeModel(
    const SubspaceModel& model,
    ModelPrecision precision = ModelPrecision::kFloat64);
SubspaceModel DeserializeModel(std::span<const std::uint8_t> bytes);

// Serialized size in bytes for the given shape.
std::size_t SerializedModelSize(std::uint32_t dim, std::uint32_t rank,
                                ModelPrecision precision);

void SaveModel(const SubspaceModel& model, const std::filesystem::path& path,
               ModelPrecision precision = ModelPrecision::kFloat64);
// Throws kModelNotFound when the file does not exist.
SubspaceModel LoadModel(const std::filesystem::path& path);

}  // namespace pcad

#endif  // PCAD_SUBSPACE_MODEL_H_
