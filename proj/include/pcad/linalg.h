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

// Dense row-major matrices, covariance estimation and a cyclic Jacobi
// symmetric eigensolver. All computation is in double precision.

#ifndef PCAD_LINALG_H_
#define PCAD_LINALG_H_

#include <cstddef>
#include <span>
#include <vector>

namespace pcad {

class DenseMatrix {
 public:
  // Zero-filled rows x cols matrix. Both dimensions must be >= 1.
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix Identity(std::size_t n);
  static DenseMatrix FromRows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }

  // Largest absolute entry.
  double MaxAbs() const;

  DenseMatrix Transposed() const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

DenseMatrix Multiply(const DenseMatrix& a, const DenseMatrix& b);

// Eigenpairs of a symmetric matrix. Column i of `eigenvectors` pairs with
// eigenvalues[i]; eigenvalues are sorted descending.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  DenseMatrix eigenvectors;
};

struct JacobiOptions {
  int max_sweeps = 30;
  // Converged once ||offdiag||_F <= tolerance * ||diag||_2.
  double tolerance = 1e-10;
};

// Column means of an n x D matrix. Throws kEmptyInput when n == 0.
std::vector<double> MeanVector(const DenseMatrix& rows);

// Population covariance (1/n) of `rows` around `mean`. Rows are accumulated
// in fixed-size blocks in a fixed order so the result is bitwise
// reproducible.
DenseMatrix Covariance(const DenseMatrix& rows, std::span<const double> mean);

// Streaming form of Covariance(): rows may arrive in any number of batches;
// they are regrouped into fixed-size blocks so the result depends only on
// the row sequence, not on how it was batched.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::vector<double> mean);
  CovarianceAccumulator(const CovarianceAccumulator&) = delete;
  CovarianceAccumulator& operator=(const CovarianceAccumulator&) = delete;

  // `rows` holds count * dim values, row-major.
  void AddRows(std::span<const double> rows);
  std::size_t row_count() const { return row_count_; }
  // Throws kEmptyInput if no rows were added.
  DenseMatrix Finish();

 private:
  void FlushBlock();

  std::vector<double> mean_;
  std::vector<double> pending_;
  std::vector<double> acc_;  // dim x dim, lower triangle valid
  std::size_t row_count_ = 0;
};

// Cyclic Jacobi eigendecomposition.
//
// Eigenvalues in (-eps, 0) with eps = 1e-9 * max|eigenvalue| are clamped to
// zero; larger negative values are kept so indefinite inputs still satisfy
// trace preservation. Each eigenvector is sign-normalized so that its
// largest-magnitude entry (first one on ties) is positive.
//
// Throws kNotSymmetric if |S - S^T|_max > 1e-9 * |S|_max and
// kNoConvergence if the sweep budget is exhausted.
EigenDecomposition SymmetricEigen(const DenseMatrix& s,
                                  const JacobiOptions& options = {});

// Principal axes of a centered point cloud.
struct PrincipalAxes {
  // Full descending spectrum of the covariance, length D, clamped to >= 0.
  std::vector<double> eigenvalues;
  // D x m orthonormal columns for the leading m eigenvalues. m == D on the
  // covariance route; m <= n on the Gram route (only strictly positive
  // eigenvalues get a vector).
  DenseMatrix vectors;
  bool used_gram = false;
};

// Eigen-analysis of the covariance of `rows` around `mean`. When n < D the
// n x n Gram matrix of centered rows is decomposed instead and its
// eigenvectors are mapped back to feature space.
PrincipalAxes ComputePrincipalAxes(const DenseMatrix& rows,
                                   std::span<const double> mean,
                                   const JacobiOptions& options = {});

// Covariance route only: decomposes an already accumulated covariance.
PrincipalAxes PrincipalAxesFromCovariance(const DenseMatrix& covariance,
                                          const JacobiOptions& options = {});

}  // namespace pcad

#endif  // PCAD_LINALG_H_
