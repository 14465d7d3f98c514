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

#include "lwgibbs/integrate.hpp"

#include <cstdint>

namespace lw {

struct DualityOptions {
  IntegrationSpec spec;
  /// Newton stops once max |G[A] - G_target| <= newton_tol.
  double newton_tol = 1e-6;
  int max_iter = 50;
};

/// Settings for callers that difference or fit functional values.
DualityOptions precise_duality_options();

struct InversionResult {
  SymMatrix A = SymMatrix::zero(1);
  double residual_norm = 0.0;  // max |G[A] - G_target|, from a fresh integration at A
  int iterations = 0;
  bool converged = false;
  /// Omega[A] and its integration error.
  double omega = 0.0;
  double omega_error = 0.0;
  /// Estimated max-norm error of A from the residual and the integration error.
  double a_error = 0.0;
  /// Excess of 1/2 Tr[A G] - Omega[A] over its minimum, to second order.
  double newton_excess = 0.0;
  long long n_evals = 0;
  std::string provenance;
};

/// Finds A with G[A, eps U] = G_target by damped Newton from A = G_target^{-1}.
InversionResult invert_green(const SymMatrix& g_target, const Interaction& u, double eps,
                             const DualityOptions& options = {});

struct LwEvaluation {
  double phi = 0.0;
  double F = 0.0;
  SymMatrix A = SymMatrix::zero(1);
  SymMatrix sigma = SymMatrix::zero(1);
  /// Error estimate of phi.
  double error_estimate = 0.0;
  double F_error = 0.0;
  double sigma_error = 0.0;
  InversionResult inversion;
};

/// F[G] = 1/2 Tr[A G] - Omega[A] at A = A[G].
double script_F(const SymMatrix& g, const Interaction& u, double eps, const DualityOptions& options = {});

/// Phi[G] = 2 F[G] - log det G - N log(2 pi e) and Sigma[G] = A[G] - G^{-1}.
LwEvaluation lw_functional(const SymMatrix& g, const Interaction& u, double eps, const DualityOptions& options = {});

SymMatrix self_energy(const SymMatrix& g, const Interaction& u, double eps, const DualityOptions& options = {});

/// Upper bound 1/2 log((2 pi e)^N det G) + C_U (1 + Tr G) on F[G] (eps folded into C_U).
double script_F_upper_bound(const SymMatrix& g, const Interaction& u, double eps);

struct VariationalReport {
  double omega = 0.0;
  double objective_at_minimizer = 0.0;  // 1/2 Tr[A G*] - F[G*]
  double equality_gap = 0.0;
  double min_probe_margin = 0.0;  // min over probes of objective(G') - Omega[A]
  double tolerance = 0.0;
  int n_probes = 0;
  bool pass = false;
};

/// Omega[A] = inf_G (1/2 Tr[A G] - F[G]): equality at G* = G[A] and the
/// inequality at random positive definite perturbations of G*.
VariationalReport variational_check(const SymMatrix& a, const Interaction& u, double eps, int n_probes,
                                    std::uint64_t seed = 1, const DualityOptions& options = {});

/// Jacobian of the upper-triangle entries of G[A] with respect to the
/// upper-triangle entries of A, from the fourth moments.
Matrix green_jacobian(const SymMatrix& g, const FourthMoments& m4);

/// Finite-difference gradient in the symmetric convention: entry (i, j) is
/// the derivative along E^(ij) = e_i e_j^T + e_j e_i^T.
SymMatrix symmetric_gradient(const std::function<double(const SymMatrix&)>& f, const SymMatrix& x, double h);

}  // namespace lw
