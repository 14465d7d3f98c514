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

#include "lwgibbs/duality.hpp"

#include "lwgibbs/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace lw {

namespace {

const double kLog2PiE = std::log(2.0 * std::numbers::pi) + 1.0;

struct PairIndex {
  std::vector<std::array<int, 2>> pairs;
  explicit PairIndex(int n) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) pairs.push_back({i, j});
  }
  std::size_t size() const { return pairs.size(); }
};

Vector pack(const SymMatrix& m, const PairIndex& idx) {
  Vector v(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t p = 0; p < idx.size(); ++p) v(p) = m(idx.pairs[p][0], idx.pairs[p][1]);
  return v;
}

SymMatrix unpack(const Vector& v, int n, const PairIndex& idx) {
  Matrix m(n, n);
  for (std::size_t p = 0; p < idx.size(); ++p) {
    m(idx.pairs[p][0], idx.pairs[p][1]) = v(p);
    m(idx.pairs[p][1], idx.pairs[p][0]) = v(p);
  }
  return SymMatrix(m);
}

// Weight of a_kl in 1/2 x^T A x: 1 off the diagonal, 1/2 on it.
double pair_weight(const std::array<int, 2>& p) { return p[0] == p[1] ? 0.5 : 1.0; }

void check_target(const SymMatrix& g, const Interaction& u, double eps) {
  if (g.dim() != u.dim()) throw DimensionMismatch("G and U have different dimensions");
  if (!(eps >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  if (!g.is_positive_definite()) throw NotPositiveDefinite("G must be positive definite");
}

bool is_domain_failure(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const DivergenceDetected&) {
    return true;
  } catch (const BudgetExceeded&) {
    return true;
  } catch (const NotPositiveDefinite&) {
    return true;
  } catch (const NoConvergence&) {
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace

DualityOptions precise_duality_options() {
  DualityOptions o;
  o.spec.target_rel_error = 1e-12;
  o.newton_tol = 1e-10;
  o.max_iter = 50;
  return o;
}

Matrix green_jacobian(const SymMatrix& g, const FourthMoments& m4) {
  const PairIndex idx(g.dim());
  const auto np = static_cast<Eigen::Index>(idx.size());
  Matrix j(np, np);
  for (Eigen::Index r = 0; r < np; ++r) {
    const auto [a, b] = idx.pairs[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < np; ++c) {
      const auto& kl = idx.pairs[static_cast<std::size_t>(c)];
      j(r, c) = -pair_weight(kl) * (m4(a, b, kl[0], kl[1]) - g(a, b) * g(kl[0], kl[1]));
    }
  }
  return j;
}

InversionResult invert_green(const SymMatrix& g_target, const Interaction& u, double eps,
                             const DualityOptions& options) {
  check_target(g_target, u, eps);
  const int n = g_target.dim();
  const PairIndex idx(n);
  IntegrationSpec spec = options.spec;
  if (!spec.covariance_hint) spec.covariance_hint = g_target;

  InversionResult res;
  SymMatrix a = g_target.inverse();
  Moments mo = compute_moments(GibbsModel(a, u, eps), spec, true);
  res.n_evals += mo.n_evals;
  const Vector target = pack(g_target, idx);

  Vector r = pack(mo.G, idx) - target;
  double rnorm = r.cwiseAbs().maxCoeff();
  int it = 0;
  while (rnorm > options.newton_tol) {
    if (it >= options.max_iter)
      throw NoConvergence("Newton inversion did not reach residual " + std::to_string(options.newton_tol) +
                          " within " + std::to_string(options.max_iter) + " iterations (residual " +
                          std::to_string(rnorm) + ")");
    ++it;
    const Matrix jac = green_jacobian(mo.G, *mo.m4);
    const Vector step = jac.colPivHouseholderQr().solve(-r);
    double t = 1.0;
    bool accepted = false, left_domain = false;
    for (int ls = 0; ls < 40 && !accepted; ++ls, t *= 0.5) {
      const SymMatrix trial = a + unpack(t * step, n, idx);
      try {
        Moments mt = compute_moments(GibbsModel(trial, u, eps), spec, true);
        res.n_evals += mt.n_evals;
        const Vector rt = pack(mt.G, idx) - target;
        const double rtn = rt.cwiseAbs().maxCoeff();
        if (rtn < rnorm) {
          a = trial;
          mo = std::move(mt);
          r = rt;
          rnorm = rtn;
          accepted = true;
        }
      } catch (...) {
        if (!is_domain_failure(std::current_exception())) throw;
        left_domain = true;
      }
    }
    if (!accepted) {
      if (left_domain) throw LeftDomain("line search could not keep A inside the domain of Omega");
      throw NoConvergence("Newton line search stalled at residual " + std::to_string(rnorm) +
                          "; integration error too large for the requested tolerance");
    }
  }

  const Matrix jac = green_jacobian(mo.G, *mo.m4);
  const Matrix jinv = jac.inverse();
  const Vector step = jinv * (-r);
  double excess = 0.0;
  for (std::size_t p = 0; p < idx.size(); ++p) excess += pair_weight(idx.pairs[p]) * r(p) * step(p);
  res.A = a;
  res.residual_norm = rnorm;
  res.iterations = it;
  res.converged = true;
  res.omega = -mo.log_z;
  res.omega_error = mo.log_z_error;
  res.a_error = jinv.cwiseAbs().rowwise().sum().maxCoeff() * (rnorm + mo.g_error);
  res.newton_excess = 0.5 * std::abs(excess);
  res.provenance = mo.provenance;
  return res;
}

LwEvaluation lw_functional(const SymMatrix& g, const Interaction& u, double eps, const DualityOptions& options) {
  LwEvaluation ev;
  ev.inversion = invert_green(g, u, eps, options);
  const InversionResult& inv = ev.inversion;
  const int n = g.dim();
  const double half_trace = 0.5 * (inv.A.matrix().cwiseProduct(g.matrix())).sum();
  const double log_det = g.log_det();
  ev.A = inv.A;
  ev.F = half_trace - inv.omega;
  const double rounding = 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(half_trace) + std::abs(inv.omega));
  ev.F_error = inv.omega_error + inv.newton_excess + rounding;
  ev.phi = 2.0 * ev.F - log_det - n * kLog2PiE;
  ev.error_estimate = 2.0 * ev.F_error +
                      8.0 * std::numeric_limits<double>::epsilon() * (std::abs(log_det) + n * kLog2PiE);
  ev.sigma = inv.A - g.inverse();
  ev.sigma_error = inv.a_error;
  return ev;
}

double script_F(const SymMatrix& g, const Interaction& u, double eps, const DualityOptions& options) {
  return lw_functional(g, u, eps, options).F;
}

SymMatrix self_energy(const SymMatrix& g, const Interaction& u, double eps, const DualityOptions& options) {
  return lw_functional(g, u, eps, options).sigma;
}

double script_F_upper_bound(const SymMatrix& g, const Interaction& u, double eps) {
  double c = 0.0;
  if (eps > 0.0 && !u.is_zero()) {
    if (!u.growth().weak_constant) return std::numeric_limits<double>::infinity();
    c = eps * *u.growth().weak_constant;
  }
  return 0.5 * (g.dim() * kLog2PiE + g.log_det()) + c * (1.0 + g.trace());
}

VariationalReport variational_check(const SymMatrix& a, const Interaction& u, double eps, int n_probes,
                                    std::uint64_t seed, const DualityOptions& options) {
  const int n = a.dim();
  VariationalReport rep;
  rep.n_probes = n_probes;
  const Moments mo = compute_moments(GibbsModel(a, u, eps), options.spec, false);
  rep.omega = -mo.log_z;

  auto objective = [&](const SymMatrix& g, double* err) {
    const LwEvaluation ev = lw_functional(g, u, eps, options);
    *err = ev.F_error;
    return 0.5 * (a.matrix().cwiseProduct(g.matrix())).sum() - ev.F;
  };

  double err_star = 0.0;
  rep.objective_at_minimizer = objective(mo.G, &err_star);
  rep.equality_gap = std::abs(rep.objective_at_minimizer - rep.omega);
  // Newton at G* also absorbs the G integration error into F to first order.
  const double g_term = 0.5 * a.matrix().cwiseAbs().sum() * mo.g_error;
  rep.tolerance = 5.0 * (err_star + mo.log_z_error + g_term) + 1e-12 * (1.0 + std::abs(rep.omega));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double lmin = mo.G.min_eigenvalue();
  rep.min_probe_margin = std::numeric_limits<double>::infinity();
  bool ok = rep.equality_gap <= rep.tolerance;
  for (int p = 0; p < n_probes; ++p) {
    SymMatrix gp = mo.G + SymMatrix::identity(n) * 0.1;
    if (p > 0) {
      Matrix s(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(i, j) = normal(rng);
      const SymMatrix sym = SymMatrix::symmetrized(s);
      const double norm = Eigen::SelfAdjointEigenSolver<Matrix>(sym.matrix()).eigenvalues().cwiseAbs().maxCoeff();
      gp = mo.G + sym * (0.5 * lmin / norm);
    }
    double err = 0.0;
    const double margin = objective(gp, &err) - rep.omega;
    rep.min_probe_margin = std::min(rep.min_probe_margin, margin);
    if (margin < -(5.0 * (err + mo.log_z_error) + 1e-12 * (1.0 + std::abs(rep.omega)))) ok = false;
  }
  rep.pass = ok;
  return rep;
}

SymMatrix symmetric_gradient(const std::function<double(const SymMatrix&)>& f, const SymMatrix& x, double h) {
  const int n = x.dim();
  Matrix grad(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) += 1.0;
      e(j, i) += 1.0;
      const SymMatrix ep(e);
      grad(i, j) = grad(j, i) = (f(x + ep * h) - f(x - ep * h)) / (2.0 * h);
    }
  return SymMatrix(grad);
}

}  // namespace lw
