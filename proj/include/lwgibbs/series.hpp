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

#include <vector>

namespace lw {

struct SeriesOptions {
  DualityOptions duality = precise_duality_options();
  /// Largest coupling of the grid eps_m = eps0 / 2^m, m = 0..M+2.
  double eps0 = 1e-2;
  /// A coefficient is trusted when its uncertainty is at most
  /// rel_tolerance * max(|coefficient|, abs_floor).
  double rel_tolerance = 0.05;
  double abs_floor = 1e-6;
  bool throw_if_unstable = true;
};

struct SeriesCoefficients {
  int order = 0;
  std::vector<double> phi_coeffs;        // Phi^(1..M)
  std::vector<SymMatrix> sigma_coeffs;   // Sigma^(1..M)
  std::vector<double> phi_uncertainty;   // per order
  std::vector<double> sigma_uncertainty; // per order, max-norm
  double fit_residual = 0.0;             // largest uncertainty over all coefficients
  std::vector<double> eps_grid;
  bool trusted = false;
};

/// Bold coefficients at fixed G from a least-squares fit of Phi_G(eps) and
/// Sigma_G(eps) without constant term.
SeriesCoefficients extract_bold_series(const SymMatrix& g, const Interaction& u, int order,
                                       const SeriesOptions& options = {});

struct BareCoefficients {
  int order = 0;
  std::vector<SymMatrix> g_coeffs;      // g^(0..M)
  std::vector<SymMatrix> sigma_coeffs;  // sigma^(0..M); sigma^(0) = 0
  std::vector<double> g_uncertainty;
  std::vector<double> sigma_uncertainty;
  double fit_residual = 0.0;
  std::vector<double> eps_grid;
  bool trusted = false;
};

/// Bare coefficients at fixed A of G_A(eps) and sigma_A(eps) = A - G_A(eps)^{-1}.
BareCoefficients extract_bare_series(const SymMatrix& a, const Interaction& u, int order,
                                     const SeriesOptions& options = {});

/// First-order bold self-energy of U = 1/8 sum v_ij x_i^2 x_j^2:
/// Sigma_ij = -1/2 delta_ij sum_k v_ik G_kk - v_ij G_ij.
SymMatrix closed_form_sigma1(const SymMatrix& g, const SymMatrix& v);

struct CoefficientRelationReport {
  std::vector<double> phi;       // Phi^(k)
  std::vector<double> relation;  // Tr[G Sigma^(k)] / (2k)
  std::vector<double> gap;
  std::vector<double> tolerance;
  bool pass = true;
};

/// Phi^(k) = Tr[G Sigma^(k)] / (2k) for homogeneous quartic U.
CoefficientRelationReport check_coefficient_relation(const SeriesCoefficients& coeffs, const SymMatrix& g);

struct PolynomialFit {
  std::vector<double> coeffs;       // by power, starting at first_power
  std::vector<double> noise_bound;  // worst-case propagation of sample errors
};

/// Least squares for y(x) = sum_{k=first_power}^{first_power+terms-1} c_k x^k.
PolynomialFit fit_polynomial(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& y_error, int first_power, int terms);

}  // namespace lw
