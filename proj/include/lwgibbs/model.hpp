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

#include "lwgibbs/interaction.hpp"
#include "lwgibbs/sym_matrix.hpp"

namespace lw {

/// Quadratic form A, interaction U and coupling epsilon of the Hamiltonian
/// h(x) = 1/2 x^T A x + epsilon U(x).
class GibbsModel {
 public:
  GibbsModel(SymMatrix a, Interaction u, double epsilon = 1.0);

  int dim() const { return a_.dim(); }
  const SymMatrix& A() const { return a_; }
  const Interaction& interaction() const { return u_; }
  double epsilon() const { return eps_; }

  GibbsModel with_A(SymMatrix a) const { return {std::move(a), u_, eps_}; }
  GibbsModel with_epsilon(double eps) const { return {a_, u_, eps}; }

 private:
  SymMatrix a_;
  Interaction u_;
  double eps_;
};

double hamiltonian(const GibbsModel& model, std::span<const double> x);
double hamiltonian(const GibbsModel& model, const Vector& x);

enum class DomainVerdict { Inside, Outside, Unknown };

const char* to_string(DomainVerdict v);

/// Decides whether Z[A, epsilon U] is finite, using growth metadata first
/// and falling back to a numerical divergence certificate.
DomainVerdict check_domain_membership(const GibbsModel& model);

}  // namespace lw
