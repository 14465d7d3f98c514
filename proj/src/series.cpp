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

#include "lwgibbs/series.hpp"

#include "lwgibbs/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lw {

namespace {

constexpr double kSmallestEps = 1e-4;

std::vector<double> eps_grid(double eps0, int order) {
  std::vector<double> grid;
  for (int m = 0; m <= order + 2; ++m) grid.push_back(std::ldexp(eps0, -m));
  if (grid.back() < kSmallestEps) throw InvalidArgument("eps grid reaches below 1e-4; raise eps0 or lower the order");
  return grid;
}

void check_order(int order, int lowest) {
  if (order < lowest || order > 3) throw InvalidArgument("series order must be between " + std::to_string(lowest) + " and 3");
}

// Coefficients of a fit with one term beyond `terms`; the uncertainty is the
// change against the fit with exactly `terms` terms plus propagated noise.
struct FitWithUncertainty {
  std::vector<double> value, uncertainty;
};

FitWithUncertainty fit_and_compare(const std::vector<double>& x, const std::vector<double>& y,
                                   const std::vector<double>& err, int first_power, int terms) {
  const PolynomialFit lo = fit_polynomial(x, y, err, first_power, terms);
  const PolynomialFit hi = fit_polynomial(x, y, err, first_power, terms + 1);
  FitWithUncertainty f;
  for (int k = 0; k < terms; ++k) {
    f.value.push_back(hi.coeffs[k]);
    f.uncertainty.push_back(std::abs(lo.coeffs[k] - hi.coeffs[k]) + hi.noise_bound[k]);
  }
  return f;
}

// Fits every entry of a matrix-valued sample sequence.
struct MatrixFit {
  std::vector<SymMatrix> value;
  std::vector<double> uncertainty;
};

MatrixFit fit_matrices(const std::vector<double>& x, const std::vector<SymMatrix>& ys, const std::vector<double>& err,
                       int first_power, int terms) {
  const int n = ys.front().dim();
  std::vector<Matrix> coeff(static_cast<std::size_t>(terms), Matrix::Zero(n, n));
  std::vector<double> unc(static_cast<std::size_t>(terms), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::vector<double> y;
      for (const auto& m : ys) y.push_back(m(i, j));
      const FitWithUncertainty f = fit_and_compare(x, y, err, first_power, terms);
      for (int k = 0; k < terms; ++k) {
        coeff[k](i, j) = coeff[k](j, i) = f.value[k];
        unc[k] = std::max(unc[k], f.uncertainty[k]);
      }
    }
  MatrixFit mf;
  for (auto& c : coeff) mf.value.push_back(SymMatrix(c));
  mf.uncertainty = unc;
  return mf;
}

bool within(double uncertainty, double value, const SeriesOptions& o) {
  return uncertainty <= o.rel_tolerance * std::max(std::abs(value), o.abs_floor);
}

}  // namespace

PolynomialFit fit_polynomial(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& y_error, int first_power, int terms) {
  const auto m = static_cast<Eigen::Index>(x.size());
  if (y.size() != x.size() || y_error.size() != x.size()) throw DimensionMismatch("fit samples have unequal lengths");
  if (terms < 1 || m < terms) throw InvalidArgument("not enough samples for the requested number of terms");
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  // columns in the scaled variable x / scale keep the system well conditioned
  Matrix design(m, terms);
  for (Eigen::Index r = 0; r < m; ++r)
    for (int k = 0; k < terms; ++k) design(r, k) = std::pow(x[r] / scale, first_power + k);
  const Matrix pinv = design.completeOrthogonalDecomposition().pseudoInverse();
  Vector yv(m), ev(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    yv(r) = y[r];
    ev(r) = y_error[r];
  }
  const Vector c = pinv * yv;
  const Vector noise = pinv.cwiseAbs() * ev;
  PolynomialFit fit;
  for (int k = 0; k < terms; ++k) {
    const double s = std::pow(scale, first_power + k);
    fit.coeffs.push_back(c(k) / s);
    fit.noise_bound.push_back(noise(k) / s);
  }
  return fit;
}

SeriesCoefficients extract_bold_series(const SymMatrix& g, const Interaction& u, int order,
                                       const SeriesOptions& options) {
  check_order(order, 1);
  SeriesCoefficients sc;
  sc.order = order;
  sc.eps_grid = eps_grid(options.eps0, order);

  std::vector<double> phi, phi_err, sig_err;
  std::vector<SymMatrix> sig;
  for (double eps : sc.eps_grid) {
    const LwEvaluation ev = lw_functional(g, u, eps, options.duality);
    phi.push_back(ev.phi);
    phi_err.push_back(ev.error_estimate);
    sig.push_back(ev.sigma);
    sig_err.push_back(ev.sigma_error);
  }

  const FitWithUncertainty pf = fit_and_compare(sc.eps_grid, phi, phi_err, 1, order + 1);
  const MatrixFit sf = fit_matrices(sc.eps_grid, sig, sig_err, 1, order + 1);
  sc.trusted = true;
  for (int k = 0; k < order; ++k) {
    sc.phi_coeffs.push_back(pf.value[k]);
    sc.phi_uncertainty.push_back(pf.uncertainty[k]);
    sc.sigma_coeffs.push_back(sf.value[k]);
    sc.sigma_uncertainty.push_back(sf.uncertainty[k]);
    sc.fit_residual = std::max({sc.fit_residual, pf.uncertainty[k], sf.uncertainty[k]});
    sc.trusted = sc.trusted && within(pf.uncertainty[k], pf.value[k], options) &&
                 within(sf.uncertainty[k], sf.value[k].max_abs(), options);
  }
  if (!sc.trusted && options.throw_if_unstable)
    throw ExtractionUnstable("bold series fit uncertainty " + std::to_string(sc.fit_residual) +
                             " exceeds the relative tolerance");
  return sc;
}

BareCoefficients extract_bare_series(const SymMatrix& a, const Interaction& u, int order,
                                     const SeriesOptions& options) {
  check_order(order, 0);
  if (!a.is_positive_definite()) throw NotPositiveDefinite("bare series needs A positive definite");
  BareCoefficients bc;
  bc.order = order;
  bc.eps_grid = eps_grid(options.eps0, order);

  std::vector<SymMatrix> gs, sigmas;
  std::vector<double> g_err, s_err;
  for (double eps : bc.eps_grid) {
    const Moments mo = compute_moments(GibbsModel(a, u, eps), options.duality.spec, false);
    const SymMatrix ginv = mo.G.inverse();
    gs.push_back(mo.G);
    g_err.push_back(mo.g_error);
    sigmas.push_back(a - ginv);
    const double norm = ginv.matrix().cwiseAbs().rowwise().sum().maxCoeff();
    s_err.push_back(norm * norm * mo.g_error);
  }
  const MatrixFit gf = fit_matrices(bc.eps_grid, gs, g_err, 0, order + 2);
  const MatrixFit sf = fit_matrices(bc.eps_grid, sigmas, s_err, 1, order + 1);
  bc.trusted = true;
  for (int k = 0; k <= order; ++k) {
    bc.g_coeffs.push_back(gf.value[k]);
    bc.g_uncertainty.push_back(gf.uncertainty[k]);
    if (k == 0) {
      bc.sigma_coeffs.push_back(SymMatrix::zero(a.dim()));
      bc.sigma_uncertainty.push_back(0.0);
    } else {
      bc.sigma_coeffs.push_back(sf.value[k - 1]);
      bc.sigma_uncertainty.push_back(sf.uncertainty[k - 1]);
      bc.trusted = bc.trusted && within(sf.uncertainty[k - 1], sf.value[k - 1].max_abs(), options);
    }
    bc.fit_residual = std::max({bc.fit_residual, bc.g_uncertainty.back(), bc.sigma_uncertainty.back()});
    bc.trusted = bc.trusted && within(gf.uncertainty[k], gf.value[k].max_abs(), options);
  }
  if (!bc.trusted && options.throw_if_unstable)
    throw ExtractionUnstable("bare series fit uncertainty " + std::to_string(bc.fit_residual) +
                             " exceeds the relative tolerance");
  return bc;
}

SymMatrix closed_form_sigma1(const SymMatrix& g, const SymMatrix& v) {
  const int n = g.dim();
  if (v.dim() != n) throw DimensionMismatch("closed_form_sigma1: G and v have different dimensions");
  Matrix s(n, n);
  for (int i = 0; i < n; ++i) {
    double hartree = 0.0;
    for (int k = 0; k < n; ++k) hartree += v(i, k) * g(k, k);
    for (int j = 0; j < n; ++j) s(i, j) = -v(i, j) * g(i, j) - (i == j ? 0.5 * hartree : 0.0);
  }
  return SymMatrix::symmetrized(s);
}

CoefficientRelationReport check_coefficient_relation(const SeriesCoefficients& coeffs, const SymMatrix& g) {
  CoefficientRelationReport rep;
  const double g_l1 = g.matrix().cwiseAbs().sum();
  for (int k = 1; k <= coeffs.order; ++k) {
    const double phi = coeffs.phi_coeffs[k - 1];
    const double rel = (g.matrix().cwiseProduct(coeffs.sigma_coeffs[k - 1].matrix())).sum() / (2.0 * k);
    const double tol =
        5.0 * (coeffs.phi_uncertainty[k - 1] + g_l1 * coeffs.sigma_uncertainty[k - 1] / (2.0 * k)) +
        1e-12 * (1.0 + std::abs(phi));
    rep.phi.push_back(phi);
    rep.relation.push_back(rel);
    rep.gap.push_back(std::abs(phi - rel));
    rep.tolerance.push_back(tol);
    rep.pass = rep.pass && rep.gap.back() <= tol;
  }
  return rep;
}

}  // namespace lw
