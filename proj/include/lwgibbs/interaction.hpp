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

#include "lwgibbs/sym_matrix.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lw {

/// Growth information for an interaction U.
///
/// `weak_constant` is a C_U with U(x) + C_U (1 + |x|^2) >= 0 everywhere.
/// `strong` claims that for every alpha there is b with U(x) + b >= alpha |x|^2.
struct GrowthMeta {
  std::optional<double> weak_constant;
  bool strong = false;
};

enum class InteractionKind { Zero, GeneralizedCoulomb, Quartic1D, Counterexample, Custom };

const char* to_string(InteractionKind kind);

/// Interaction term U of a Gibbs model; immutable, cheap to copy.
///
/// Coulomb-type interactions U(x) = 1/8 sum_ab v_ab y_a^2 y_b^2 act on the
/// fragment coordinates y = x[fragment]; without a fragment they act on all
/// of x. The coupling matrix v is always positive definite on the fragment.
class Interaction {
 public:
  using Function = std::function<double(std::span<const double>)>;

  static Interaction zero(int dim);
  static Interaction generalized_coulomb(const SymMatrix& v);
  /// Impurity form: `v` couples the listed `fragment` sites of an N = `dim` system.
  static Interaction generalized_coulomb(const SymMatrix& v, std::vector<int> fragment, int dim);
  static Interaction quartic_1d(double lambda);
  /// lambda/8 x_site^4 inside an N = `dim` system.
  static Interaction quartic_1d(double lambda, int site, int dim);
  static Interaction counterexample();
  /// User-supplied interaction. Growth must be declared; a declared weak
  /// constant and a declared fragment are spot-checked on random points.
  static Interaction custom(int dim, Function f, GrowthMeta growth,
                            std::optional<std::vector<int>> fragment = std::nullopt,
                            std::optional<int> homogeneous_degree = std::nullopt);

  InteractionKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const GrowthMeta& growth() const { return growth_; }
  const std::optional<std::vector<int>>& fragment() const { return fragment_; }
  /// Degree of homogeneity when U is a homogeneous polynomial (4 for
  /// Coulomb-type interactions and the zero interaction).
  std::optional<int> homogeneous_degree() const { return degree_; }
  bool is_coulomb_type() const {
    return kind_ == InteractionKind::GeneralizedCoulomb || kind_ == InteractionKind::Quartic1D;
  }
  bool is_zero() const { return kind_ == InteractionKind::Zero; }
  /// Coupling matrix on the fragment (Coulomb-type only).
  const SymMatrix& coupling() const;
  /// Indices U depends on: the fragment if set, otherwise 0..N-1.
  std::vector<int> support() const;

  double operator()(std::span<const double> x) const;
  double evaluate(const Vector& x) const { return (*this)({x.data(), static_cast<std::size_t>(x.size())}); }

  std::string describe() const;

 private:
  Interaction() = default;

  InteractionKind kind_ = InteractionKind::Zero;
  int dim_ = 1;
  GrowthMeta growth_;
  std::optional<std::vector<int>> fragment_;
  std::optional<int> degree_;
  std::shared_ptr<const SymMatrix> v_;
  std::vector<int> sites_;
  std::shared_ptr<const Function> fn_;
};

/// Returns x -> U(T x).
Interaction transform_interaction(const Interaction& u, const Matrix& t);

/// Constant c with U(x) >= c |y|^4 on the fragment coordinates y of a
/// Coulomb-type U: with z_a = y_a^2, U = z^T v z / 8 >= lambda_min(v) |z|^2 / 8
/// and |z|^2 >= |y|^4 / p, so c = lambda_min(v) / (8 p).
double coulomb_quartic_lower_bound(const Interaction& u);

}  // namespace lw
