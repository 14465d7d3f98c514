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

#include "lwgibbs/duality.hpp"
#include "lwgibbs/rules.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lw {

enum class SigmaKind { Exact, Bold1, Bold2 };

const char* to_string(SigmaKind k);

/// Self-energy approximation Sigma_model(G) used in G^{-1} = A - Sigma_model(G).
class SigmaModel {
 public:
  /// Sigma[G] of eps U through duality.
  static SigmaModel exact(Interaction u, double eps, DualityOptions options = precise_duality_options());
  /// eps Sigma^(1)[G] in the closed Hartree-exchange form.
  static SigmaModel bold1(Interaction u, double eps);
  /// eps Sigma^(1) + eps^2 Sigma^(2); closed form for N = 1, fitted otherwise.
  static SigmaModel bold2(Interaction u, double eps, DualityOptions options = precise_duality_options());

  SigmaKind kind() const { return kind_; }
  const Interaction& interaction() const { return u_; }
  double epsilon() const { return eps_; }
  int dim() const { return u_.dim(); }

  SymMatrix operator()(const SymMatrix& g) const;

  /// lambda * eps for a one-dimensional Coulomb-type interaction.
  double coupling_1d() const;

 private:
  SigmaModel(SigmaKind kind, Interaction u, double eps, DualityOptions options);

  SigmaKind kind_;
  Interaction u_;
  double eps_;
  DualityOptions options_;
  SymMatrix v_;  // Coulomb coupling on all N sites (zero rows off the fragment)
};

enum class DysonStatus { Converged, NoPhysicalSolution, NotFound, MaxIterExceeded };

const char* to_string(DysonStatus s);

struct DysonSolution {
  DysonStatus status = DysonStatus::NotFound;
  std::optional<SymMatrix> G;
  int iterations = 0;
  /// max |G^{-1} - A + Sigma_model(G)|
  double residual = 0.0;
  std::string branch_info;
  /// Smallest lower bound of g f(g) over the scan cells; positive certifies
  /// the absence of a positive root (one-dimensional order-2 model).
  std::optional<double> certificate_lower_bound;
};

struct DysonOptions {
  double tol = 1e-10;
  int max_iter = 2000;
};

/// One-dimensional models are solved through closed-form root analysis and a
/// geometric sign scan; larger ones by multi-start damped fixed-point iteration.
DysonSolution solve_dyson(const SymMatrix& a, const SigmaModel& sigma, const DysonOptions& options = {});

/// Damped fixed-point iteration G <- (1 - alpha) G + alpha (A - Sigma(G))^{-1}
/// from the given start.
DysonSolution solve_dyson_iterative(const SymMatrix& a, const SigmaModel& sigma, const SymMatrix& start,
                                    const DysonOptions& options = {});

/// Positive root of 3/2 c g^2 + a g - 1 = 0 (c = lambda eps), the order-1 solution in 1D.
std::optional<double> bold1_root_1d(double a, double c);

struct AsymptoticRow {
  double lambda = 0.0;
  double lambda_g_exact = 0.0;
  double lambda_g_exact_error = 0.0;
  double lambda_g_bold1 = 0.0;
};

struct AsymptoticTable {
  std::vector<AsymptoticRow> rows;
  bool exact_pass = false;  // lambda G_exact within 5% of 2 at the smallest lambda
  bool bold1_pass = false;  // lambda G^(1) within 1% of 2/3 at the smallest lambda
};

/// Double-well model a = -1, U = lambda x^4 / 8: exact and order-1 Green's functions.
AsymptoticTable asymptotic_comparison(const std::vector<double>& lambdas, const IntegrationSpec& spec = {});

/// max |G^{-1} - A + Sigma[G]| at G = G[A] with the exact self-energy.
RuleReport dyson_consistency(const SymMatrix& a, double eps, const Interaction& u,
                             const DualityOptions& options = precise_duality_options());

}  // namespace lw
