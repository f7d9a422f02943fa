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

#include "pcad/linalg.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pcad/error.h"

namespace pcad {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows per accumulation block in Covariance(). Fixed so the floating-point
// reduction order never depends on the input size or the machine.
constexpr std::size_t kCovarianceBlockRows = 256;

void CheckShape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kEmptyInput, "matrix dimensions must be >= 1");
  }
}

// Flips the sign of each column so its largest-magnitude entry is positive.
void NormalizeColumnSigns(DenseMatrix& v) {
  for (std::size_t c = 0; c < v.cols(); ++c) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < v.rows(); ++r) {
      if (std::abs(v(r, c)) > best) {
        best = std::abs(v(r, c));
        arg = r;
      }
    }
    if (v(arg, c) < 0.0) {
      for (std::size_t r = 0; r < v.rows(); ++r) v(r, c) = -v(r, c);
    }
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {
  CheckShape(rows, cols);
  data_.assign(rows * cols, 0.0);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  CheckShape(rows, cols);
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                "matrix data length " + std::to_string(data_.size()) +
                    " != rows*cols " + std::to_string(rows * cols));
  }
}

DenseMatrix DenseMatrix::Identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::FromRows(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "no rows");
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged rows");
    }
    data.insert(data.end(), r.begin(), r.end());
  }
  return DenseMatrix(rows.size(), cols, std::move(data));
}

double DenseMatrix::MaxAbs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

DenseMatrix DenseMatrix::Transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

DenseMatrix Multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "inner dimensions differ");
  }
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

std::vector<double> MeanVector(const DenseMatrix& rows) {
  // DenseMatrix cannot be empty, but keep the contract explicit.
  if (rows.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no rows");
  std::vector<double> mean(rows.cols(), 0.0);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto row = rows.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) mean[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(rows.rows());
  for (double& m : mean) m *= inv;
  return mean;
}

DenseMatrix Covariance(const DenseMatrix& rows, std::span<const double> mean) {
  if (mean.size() != rows.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mean length " + std::to_string(mean.size()) +
                    " != feature dim " + std::to_string(rows.cols()));
  }
  CovarianceAccumulator acc(std::vector<double>(mean.begin(), mean.end()));
  acc.AddRows(rows.data());
  return acc.Finish();
}

CovarianceAccumulator::CovarianceAccumulator(std::vector<double> mean)
    : mean_(std::move(mean)) {
  if (mean_.empty()) throw Error(ErrorCode::kEmptyInput, "empty mean");
  acc_.assign(mean_.size() * mean_.size(), 0.0);
  pending_.reserve(kCovarianceBlockRows * mean_.size());
}

void CovarianceAccumulator::AddRows(std::span<const double> rows) {
  const std::size_t d = mean_.size();
  if (rows.size() % d != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "row data is not a multiple of the feature dim");
  }
  for (std::size_t start = 0; start < rows.size(); start += d) {
    for (std::size_t c = 0; c < d; ++c) {
      pending_.push_back(rows[start + c] - mean_[c]);
    }
    ++row_count_;
    if (pending_.size() == kCovarianceBlockRows * d) FlushBlock();
  }
}

void CovarianceAccumulator::FlushBlock() {
  if (pending_.empty()) return;
  const auto d = static_cast<Eigen::Index>(mean_.size());
  const auto count = static_cast<Eigen::Index>(pending_.size()) / d;
  Eigen::Map<const RowMajorMatrix> block(pending_.data(), count, d);
  Eigen::Map<Eigen::MatrixXd> acc(acc_.data(), d, d);
  acc.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
  pending_.clear();
}

DenseMatrix CovarianceAccumulator::Finish() {
  if (row_count_ == 0) throw Error(ErrorCode::kEmptyInput, "no rows");
  FlushBlock();
  const std::size_t d = mean_.size();
  const double inv = 1.0 / static_cast<double>(row_count_);
  DenseMatrix out(d, d);
  // acc_ is column-major; (i, j) with i >= j lives at j * d + i.
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = j; i < d; ++i) {
      const double v = acc_[j * d + i] * inv;
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

namespace {

struct Rotation {
  std::size_t p;
  std::size_t q;
  double c;
  double s;
};

// Jacobi rotation that zeroes a(p, q) when applied on both sides.
Rotation MakeRotation(const DenseMatrix& a, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(1.0 + theta * theta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  return Rotation{p, q, c, t * c};
}

void RotatePair(std::span<double> xp, std::span<double> xq, double c,
                double s) {
  for (std::size_t k = 0; k < xp.size(); ++k) {
    const double x = xp[k];
    const double y = xq[k];
    xp[k] = c * x - s * y;
    xq[k] = s * x + c * y;
  }
}

}  // namespace

EigenDecomposition SymmetricEigen(const DenseMatrix& s,
                                  const JacobiOptions& options) {
  const std::size_t n = s.rows();
  if (s.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix is not square");
  }
  const double scale = s.MaxAbs();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      asym = std::max(asym, std::abs(s(i, j) - s(j, i)));
    }
  }
  if (asym > 1e-9 * scale) {
    throw Error(ErrorCode::kNotSymmetric,
                "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }

  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = s(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (s(i, j) + s(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  // Rows of vt accumulate the eigenvectors, so every update is a row pass.
  DenseMatrix vt = DenseMatrix::Identity(n);

  auto converged = [&]() {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += a(i, i) * a(i, i);
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) off += a(i, j) * a(i, j);
      }
    }
    return std::sqrt(off) <= options.tolerance * std::sqrt(diag);
  };

  // Round-robin ordering: each sweep is m - 1 rounds of disjoint pairs that
  // together visit every (p, q) once. Disjoint rotations commute, so a round
  // is applied as one pass over rows and one over columns.
  const std::size_t m = n + n % 2;
  std::vector<Rotation> round;
  round.reserve(m / 2);
  bool done = converged();
  for (int sweep = 0; sweep < options.max_sweeps && !done; ++sweep) {
    for (std::size_t r = 0; r + 1 < m; ++r) {
      round.clear();
      for (std::size_t i = 0; i < m / 2; ++i) {
        const std::size_t x = i == 0 ? 0 : 1 + (i - 1 + r) % (m - 1);
        const std::size_t y = 1 + (m - 2 - i + r) % (m - 1);
        const std::size_t p = std::min(x, y);
        const std::size_t q = std::max(x, y);
        if (q >= n || a(p, q) == 0.0) continue;
        round.push_back(MakeRotation(a, p, q));
      }
      for (const Rotation& rot : round) {
        RotatePair(a.row(rot.p), a.row(rot.q), rot.c, rot.s);
      }
      for (std::size_t k = 0; k < n; ++k) {
        const std::span<double> row = a.row(k);
        for (const Rotation& rot : round) {
          const double x = row[rot.p];
          const double y = row[rot.q];
          row[rot.p] = rot.c * x - rot.s * y;
          row[rot.q] = rot.s * x + rot.c * y;
        }
      }
      for (const Rotation& rot : round) {
        a(rot.p, rot.q) = 0.0;
        a(rot.q, rot.p) = 0.0;
        RotatePair(vt.row(rot.p), vt.row(rot.q), rot.c, rot.s);
      }
    }
    done = converged();
  }
  if (!done) {
    throw Error(ErrorCode::kNoConvergence,
                "Jacobi did not converge in " +
                    std::to_string(options.max_sweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x,
                                                   std::size_t y) {
    return a(x, x) > a(y, y);
  });

  EigenDecomposition out{std::vector<double>(n), DenseMatrix(n, n)};
  double max_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_abs = std::max(max_abs, std::abs(a(i, i)));
  const double eps = 1e-9 * max_abs;
  for (std::size_t i = 0; i < n; ++i) {
    double lambda = a(order[i], order[i]);
    if (lambda < 0.0 && lambda > -eps) lambda = 0.0;
    out.eigenvalues[i] = lambda;
    for (std::size_t r = 0; r < n; ++r) {
      out.eigenvectors(r, i) = vt(order[i], r);
    }
  }
  NormalizeColumnSigns(out.eigenvectors);
  return out;
}

PrincipalAxes ComputePrincipalAxes(const DenseMatrix& rows,
                                   std::span<const double> mean,
                                   const JacobiOptions& options) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  if (mean.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "mean length != feature dim");
  }

  if (n >= d) {
    return PrincipalAxesFromCovariance(Covariance(rows, mean), options);
  }

  // Gram route: eigenpairs of (1/n) Xc Xc^T share nonzero eigenvalues with
  // the covariance, and v = Xc^T u / sqrt(n * lambda) recovers its vectors.
  DenseMatrix centered(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) centered(r, c) = rows(r, c) - mean[c];
  }
  DenseMatrix gram(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double dot = 0.0;
      const auto ri = centered.row(i);
      const auto rj = centered.row(j);
      for (std::size_t c = 0; c < d; ++c) dot += ri[c] * rj[c];
      gram(i, j) = dot * inv_n;
      gram(j, i) = dot * inv_n;
    }
  }
  const EigenDecomposition eig = SymmetricEigen(gram, options);
  const double top = std::max(eig.eigenvalues.front(), 0.0);
  const double keep_floor = 1e-9 * top;
  std::size_t kept = 0;
  while (kept < n && eig.eigenvalues[kept] > keep_floor) ++kept;
  if (kept == 0) {
    throw Error(ErrorCode::kDegenerateData, "all centered rows are zero");
  }

  std::vector<double> spectrum(d, 0.0);
  DenseMatrix vectors(d, kept);
  for (std::size_t k = 0; k < kept; ++k) {
    const double lambda = eig.eigenvalues[k];
    spectrum[k] = lambda;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n) * lambda);
    std::vector<double> col(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double u = eig.eigenvectors(r, k);
      const auto xr = centered.row(r);
      for (std::size_t c = 0; c < d; ++c) col[c] += u * xr[c];
    }
    for (double& x : col) x *= norm;
    // One modified Gram-Schmidt pass against earlier columns removes the
    // round-off the mapping introduces for small eigenvalues.
    for (std::size_t prev = 0; prev < k; ++prev) {
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += vectors(c, prev) * col[c];
      for (std::size_t c = 0; c < d; ++c) col[c] -= dot * vectors(c, prev);
    }
    double len = 0.0;
    for (double x : col) len += x * x;
    len = std::sqrt(len);
    for (std::size_t c = 0; c < d; ++c) vectors(c, k) = col[c] / len;
  }
  NormalizeColumnSigns(vectors);
  return PrincipalAxes{std::move(spectrum), std::move(vectors), true};
}

PrincipalAxes PrincipalAxesFromCovariance(const DenseMatrix& covariance,
                                          const JacobiOptions& options) {
  EigenDecomposition eig = SymmetricEigen(covariance, options);
  for (double& l : eig.eigenvalues) l = std::max(l, 0.0);
  return PrincipalAxes{std::move(eig.eigenvalues), std::move(eig.eigenvectors),
                       false};
}

}  // namespace pcad
