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

#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <vector>

namespace lw {

/// General square matrix (transformations T, projections P).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense real symmetric N x N matrix.
///
/// Construction from explicit data requires exact symmetry; results computed
/// in floating point go through `symmetrized`, which averages the two
/// triangles so the invariant holds bit-for-bit.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(int n);
  static SymMatrix zero(int n);
  static SymMatrix diagonal(const std::vector<double>& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

  /// Smallest eigenvalue.
  double min_eigenvalue() const;
  bool is_positive_definite(double floor = 0.0) const;

  SymMatrix inverse() const;
  double log_det() const;  // requires positive definite
  double trace() const { return m_.trace(); }
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

  /// Leading p x p block.
  SymMatrix leading_block(int p) const;
  /// Congruence T * this * T^T.
  SymMatrix congruence(const Matrix& t) const;

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;

  bool operator==(const SymMatrix& o) const { return m_ == o.m_; }

 private:
  struct Trusted {};
  SymMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

inline SymMatrix operator*(double s, const SymMatrix& m) { return m * s; }

/// Max-norm of the entrywise difference.
double max_abs_diff(const SymMatrix& a, const SymMatrix& b);

}  // namespace lw
