// Copyright (c) 2026 The lwgibbs authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0.txt
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lwgibbs/sym_matrix.hpp"

#include "lwgibbs/errors.hpp"

#include <string>

namespace lw {

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols())
    throw DimensionMismatch("SymMatrix: expected a non-empty square matrix, got " +
                            std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  for (Eigen::Index i = 0; i < m_.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m_.cols(); ++j)
      if (m_(i, j) != m_(j, i))
        throw NotSymmetric("SymMatrix: entry (" + std::to_string(i) + "," + std::to_string(j) +
                           ") differs from its transpose");
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n)
      throw DimensionMismatch("SymMatrix: ragged initializer");
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  *this = SymMatrix(std::move(m));
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() < 1 || m.rows() != m.cols()) throw DimensionMismatch("symmetrized: not square");
  Matrix s = 0.5 * (m + m.transpose());
  // the average above is symmetric only up to rounding of the two sums
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = i + 1; j < s.cols(); ++j) s(j, i) = s(i, j);
  return SymMatrix(std::move(s), Trusted{});
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }
SymMatrix SymMatrix::zero(int n) { return SymMatrix(Matrix::Zero(n, n)); }

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return SymMatrix(std::move(m));
}

double SymMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool SymMatrix::is_positive_definite(double floor) const { return min_eigenvalue() > floor; }

SymMatrix SymMatrix::inverse() const {
  Eigen::LDLT<Matrix> ldlt(m_);
  if (ldlt.info() != Eigen::Success) throw NotPositiveDefinite("inverse: factorization failed");
  return symmetrized(ldlt.solve(Matrix::Identity(m_.rows(), m_.cols())));
}

double SymMatrix::log_det() const {
  Eigen::LLT<Matrix> llt(m_);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("log_det: matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

SymMatrix SymMatrix::leading_block(int p) const {
  if (p < 1 || p > dim()) throw DimensionMismatch("leading_block: bad block size");
  return SymMatrix(m_.topLeftCorner(p, p), Trusted{});
}

SymMatrix SymMatrix::congruence(const Matrix& t) const {
  if (t.cols() != m_.rows()) throw DimensionMismatch("congruence: T has wrong column count");
  return symmetrized(t * m_ * t.transpose());
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("SymMatrix +: dimension mismatch");
  return SymMatrix(m_ + o.m_, Trusted{});
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("SymMatrix -: dimension mismatch");
  return SymMatrix(m_ - o.m_, Trusted{});
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(m_ * s, Trusted{}); }

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("max_abs_diff: dimension mismatch");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace lw
