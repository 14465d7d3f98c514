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

#include <string>
#include <vector>

namespace lw {

/// One numerical comparison lhs ~ rhs; pass == (abs_gap <= tolerance).
struct RuleReport {
  std::string rule_name;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string provenance;
};

/// Builds a report with tolerance = 5 * (lhs_error + rhs_error) + a rounding floor.
RuleReport make_report(std::string name, double lhs, double lhs_error, double rhs, double rhs_error,
                       std::string provenance = {});

bool all_pass(const std::vector<RuleReport>& reports);

/// U(x) restricted to the coordinates `sites`, all other coordinates set to zero.
Interaction restrict_interaction(const Interaction& u, const std::vector<int>& sites);

/// Phi[T G T^T, U] against Phi[G, U o T].
RuleReport transformation_check(const SymMatrix& g, const Interaction& u, const Matrix& t, double eps,
                                const DualityOptions& options = precise_duality_options());

/// Phi[s G, eps U] against Phi[G, s^2 eps U] for homogeneous quartic U.
RuleReport scaling_check(const SymMatrix& g, const Interaction& u, double scale, double eps,
                         const DualityOptions& options = precise_duality_options());

/// Phi_N[G] against Phi_p[G_FF] on the fragment F, plus invariance of Phi_N
/// when the blocks outside F x F are perturbed.
std::vector<RuleReport> projection_check(const SymMatrix& g, const Interaction& u, double eps, std::uint64_t seed = 1,
                                         const DualityOptions& options = precise_duality_options());

/// Sigma vanishes outside F x F and its F x F block is the fragment self-energy.
std::vector<RuleReport> sparsity_check(const SymMatrix& g, const Interaction& u, double eps,
                                       const DualityOptions& options = precise_duality_options());

struct ExtensionReport {
  std::vector<double> deltas;
  std::vector<double> phis;
  std::vector<double> phi_errors;
  /// Fit a + b delta^c through the three smallest deltas.
  double limit = 0.0;
  double rate = 0.0;
  double amplitude = 0.0;
  double target = 0.0;  // Phi_p[G_p, U(., 0)]
  double target_error = 0.0;
  bool non_monotone = false;
  std::string warning;
  RuleReport report;
};

/// Phi_N[diag(G_p, delta I)] as delta -> 0 against Phi_p[G_p, U(., 0)].
ExtensionReport extension_limit(const SymMatrix& g_p, const Interaction& u, const std::vector<double>& deltas,
                                double eps, double limit_tolerance = 1e-2,
                                const DualityOptions& options = precise_duality_options());

struct CounterexampleRow {
  std::string label;
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  ProbeVerdict expected = ProbeVerdict::Divergent;
  double last_log_integral = 0.0;
  double last_growth_ratio = 0.0;
};

struct CounterexampleReport {
  std::vector<CounterexampleRow> rows;
  bool pass = false;
};

/// Divergence of Z[A, U o T_j] with T_j = diag(1, 1/j) and convergence of
/// Z[A, U o P] with P = diag(1, 0), at A = diag(0, 1).
CounterexampleReport counterexample_experiment(const std::vector<int>& js, const ProbeOptions& probe = {});

}  // namespace lw
