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

#include "lwgibbs/rules.hpp"

#include "lwgibbs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace lw {

namespace {

SymMatrix sub_matrix(const SymMatrix& m, const std::vector<int>& idx) {
  const auto p = static_cast<Eigen::Index>(idx.size());
  Matrix s(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) s(i, j) = m(idx[i], idx[j]);
  return SymMatrix(s);
}

std::vector<int> complement(const std::vector<int>& idx, int n) {
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) rest.push_back(i);
  return rest;
}

std::vector<int> fragment_of(const Interaction& u) {
  if (u.is_zero()) return {0};
  if (!u.fragment()) throw InvalidArgument("interaction has no fragment");
  return *u.fragment();
}

// Root of (d1^c - d2^c) / (d2^c - d3^c) = ratio for d1 > d2 > d3 > 0.
double solve_rate(double d1, double d2, double d3, double ratio) {
  auto q = [&](double c) { return (std::pow(d1, c) - std::pow(d2, c)) / (std::pow(d2, c) - std::pow(d3, c)); };
  double lo = 1e-3, hi = 10.0;
  if (ratio <= q(lo)) return lo;
  if (ratio >= q(hi)) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (q(mid) < ratio ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

RuleReport make_report(std::string name, double lhs, double lhs_error, double rhs, double rhs_error,
                       std::string provenance) {
  RuleReport r;
  r.rule_name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_gap = std::abs(lhs - rhs);
  r.tolerance = 5.0 * (lhs_error + rhs_error) +
                16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lhs), std::abs(rhs));
  r.pass = r.abs_gap <= r.tolerance;
  r.provenance = std::move(provenance);
  return r;
}

bool all_pass(const std::vector<RuleReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const RuleReport& r) { return r.pass; });
}

Interaction restrict_interaction(const Interaction& u, const std::vector<int>& sites) {
  const int p = static_cast<int>(sites.size());
  if (p < 1) throw InvalidArgument("restriction needs at least one site");
  for (int s : sites)
    if (s < 0 || s >= u.dim()) throw DimensionMismatch("restriction site out of range");
  if (u.is_zero()) return Interaction::zero(p);

  if (u.is_coulomb_type()) {
    const std::vector<int> support = u.support();
    std::vector<int> kept_pos, kept_support;
    for (int k = 0; k < p; ++k) {
      const auto it = std::find(support.begin(), support.end(), sites[k]);
      if (it != support.end()) {
        kept_pos.push_back(k);
        kept_support.push_back(static_cast<int>(it - support.begin()));
      }
    }
    if (kept_pos.empty()) return Interaction::zero(p);
    const SymMatrix v = sub_matrix(u.coupling(), kept_support);
    if (static_cast<int>(kept_pos.size()) == p) {
      if (p == 1) return Interaction::quartic_1d(v(0, 0));
      return Interaction::generalized_coulomb(v);
    }
    return Interaction::generalized_coulomb(v, kept_pos, p);
  }

  const int n = u.dim();
  Interaction::Function f = [u, sites, n](std::span<const double> y) {
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (std::size_t k = 0; k < sites.size(); ++k) x[static_cast<std::size_t>(sites[k])] = y[k];
    return u(x);
  };
  return Interaction::custom(p, std::move(f), u.growth(), std::nullopt, u.homogeneous_degree());
}

RuleReport transformation_check(const SymMatrix& g, const Interaction& u, const Matrix& t, double eps,
                                const DualityOptions& options) {
  if (t.rows() != g.dim() || t.cols() != g.dim()) throw DimensionMismatch("T must be N x N");
  if (!(std::abs(t.determinant()) > 1e-10)) throw InvalidArgument("T must be invertible (|det T| > 1e-10)");
  const LwEvaluation lhs = lw_functional(g.congruence(t), u, eps, options);
  const LwEvaluation rhs = lw_functional(g, transform_interaction(u, t), eps, options);
  return make_report("transform", lhs.phi, lhs.error_estimate, rhs.phi, rhs.error_estimate,
                     "lhs Phi[T G T^T, U]; rhs Phi[G, U o T]; " + rhs.inversion.provenance);
}

RuleReport scaling_check(const SymMatrix& g, const Interaction& u, double scale, double eps,
                         const DualityOptions& options) {
  if (u.homogeneous_degree().value_or(0) != 4) throw InvalidArgument("scaling rule needs a homogeneous quartic U");
  if (!(scale > 0.0)) throw InvalidArgument("scale must be > 0");
  const LwEvaluation lhs = lw_functional(g * scale, u, eps, options);
  const LwEvaluation rhs = lw_functional(g, u, scale * scale * eps, options);
  return make_report("scale", lhs.phi, lhs.error_estimate, rhs.phi, rhs.error_estimate,
                     "lhs Phi[s G, eps U]; rhs Phi[G, s^2 eps U]; " + rhs.inversion.provenance);
}

std::vector<RuleReport> projection_check(const SymMatrix& g, const Interaction& u, double eps, std::uint64_t seed,
                                         const DualityOptions& options) {
  const int n = g.dim();
  const std::vector<int> frag = fragment_of(u);
  const std::vector<int> rest = complement(frag, n);
  const LwEvaluation full = lw_functional(g, u, eps, options);
  const LwEvaluation part = lw_functional(sub_matrix(g, frag), restrict_interaction(u, frag), eps, options);
  std::vector<RuleReport> out;
  out.push_back(make_report("project", full.phi, full.error_estimate, part.phi, part.error_estimate,
                            "lhs Phi_N[G]; rhs Phi_p[G_FF]; " + full.inversion.provenance));

  // New off-fragment blocks with the same G_FF; shrink until positive definite.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix perturbed = g.matrix();
  for (int a : frag)
    for (int b : rest) perturbed(a, b) = perturbed(b, a) = g(a, b) * 0.5 + 0.2 * unif(rng);
  for (std::size_t i = 0; i < rest.size(); ++i)
    for (std::size_t j = i; j < rest.size(); ++j) {
      const double d = i == j ? 0.5 + 0.5 * std::abs(unif(rng)) : 0.1 * unif(rng);
      perturbed(rest[i], rest[j]) += d;
      if (i != j) perturbed(rest[j], rest[i]) += d;
    }
  SymMatrix gp = SymMatrix::symmetrized(perturbed);
  for (int k = 0; k < 60 && !gp.is_positive_definite(1e-3 * g.min_eigenvalue()); ++k) {
    Matrix m = gp.matrix();
    for (int a : frag)
      for (int b : rest) m(a, b) = m(b, a) = 0.5 * m(a, b);
    gp = SymMatrix::symmetrized(m);
  }
  if (rest.empty()) return out;
  const LwEvaluation moved = lw_functional(gp, u, eps, options);
  out.push_back(make_report("project-invariance", moved.phi, moved.error_estimate, full.phi, full.error_estimate,
                            "lhs Phi_N with perturbed off-fragment blocks; rhs Phi_N[G]"));
  return out;
}

std::vector<RuleReport> sparsity_check(const SymMatrix& g, const Interaction& u, double eps,
                                       const DualityOptions& options) {
  const int n = g.dim();
  const std::vector<int> frag = fragment_of(u);
  const LwEvaluation full = lw_functional(g, u, eps, options);
  const LwEvaluation part = lw_functional(sub_matrix(g, frag), restrict_interaction(u, frag), eps, options);

  auto in_frag = [&](int i) { return std::find(frag.begin(), frag.end(), i) != frag.end(); };
  double off = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(in_frag(i) && in_frag(j))) off = std::max(off, std::abs(full.sigma(i, j)));
  const SymMatrix block = sub_matrix(full.sigma, frag);
  const double block_gap = max_abs_diff(block, part.sigma);

  std::vector<RuleReport> out;
  out.push_back(make_report("sparse-offblock", off, full.sigma_error, 0.0, 0.0,
                            "max |Sigma_ij| outside the fragment block; " + full.inversion.provenance));
  RuleReport r = make_report("sparse-block", block_gap, full.sigma_error, 0.0, part.sigma_error,
                             "max |Sigma_N[G]_FF - Sigma_p[G_FF]|");
  r.lhs = block.max_abs();
  r.rhs = part.sigma.max_abs();
  out.push_back(r);
  return out;
}

ExtensionReport extension_limit(const SymMatrix& g_p, const Interaction& u, const std::vector<double>& deltas,
                                double eps, double limit_tolerance, const DualityOptions& options) {
  const int n = u.dim(), p = g_p.dim();
  if (p >= n) throw DimensionMismatch("G_p must be smaller than the full dimension");
  if (deltas.size() < 3) throw InvalidArgument("extension limit needs at least three deltas");
  for (std::size_t k = 0; k < deltas.size(); ++k)
    if (!(deltas[k] > 0.0) || (k > 0 && !(deltas[k] < deltas[k - 1])))
      throw InvalidArgument("delta schedule must be positive and strictly decreasing");
  if (!u.is_zero() && !u.growth().strong) throw InvalidArgument("extension limit needs strong growth");

  ExtensionReport rep;
  rep.deltas = deltas;
  for (double d : deltas) {
    Matrix g = Matrix::Zero(n, n);
    g.topLeftCorner(p, p) = g_p.matrix();
    g.bottomRightCorner(n - p, n - p) = d * Matrix::Identity(n - p, n - p);
    const LwEvaluation ev = lw_functional(SymMatrix(g), u, eps, options);
    rep.phis.push_back(ev.phi);
    rep.phi_errors.push_back(ev.error_estimate);
  }
  std::vector<int> lead(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) lead[static_cast<std::size_t>(i)] = i;
  const LwEvaluation target = lw_functional(g_p, restrict_interaction(u, lead), eps, options);
  rep.target = target.phi;
  rep.target_error = target.error_estimate;

  const std::size_t m = deltas.size();
  const double d1 = deltas[m - 3], d2 = deltas[m - 2], d3 = deltas[m - 1];
  const double f1 = rep.phis[m - 3], f2 = rep.phis[m - 2], f3 = rep.phis[m - 1];
  const double diff1 = f1 - f2, diff2 = f2 - f3;
  double fit_error = 0.0;
  if (diff1 * diff2 > 0.0 && std::abs(diff2) < std::abs(diff1)) {
    rep.rate = solve_rate(d1, d2, d3, diff1 / diff2);
    rep.amplitude = diff2 / (std::pow(d2, rep.rate) - std::pow(d3, rep.rate));
    rep.limit = f3 - rep.amplitude * std::pow(d3, rep.rate);
  } else {
    rep.non_monotone = true;
    rep.warning = "NonMonotoneWarning: sequence is not Cauchy-like at the smallest deltas";
    rep.rate = std::numeric_limits<double>::quiet_NaN();
    rep.limit = f3;
    fit_error = std::abs(diff2);
  }
  const double noise = *std::max_element(rep.phi_errors.end() - 3, rep.phi_errors.end());
  rep.report = make_report("extend", rep.limit, noise + fit_error, rep.target, rep.target_error,
                           "limit of a + b delta^c through the three smallest deltas");
  rep.report.tolerance += limit_tolerance;
  rep.report.pass = rep.report.abs_gap <= rep.report.tolerance;
  return rep;
}

CounterexampleReport counterexample_experiment(const std::vector<int>& js, const ProbeOptions& probe) {
  const SymMatrix a{{0.0, 0.0}, {0.0, 1.0}};
  const Interaction u = Interaction::counterexample();
  CounterexampleReport rep;
  rep.pass = true;
  auto run = [&](const std::string& label, const Matrix& t, ProbeVerdict expected) {
    const ProbeResult pr = divergence_probe(GibbsModel(a, transform_interaction(u, t), 1.0), probe);
    CounterexampleRow row;
    row.label = label;
    row.verdict = pr.verdict;
    row.expected = expected;
    const auto& li = pr.log_integrals;
    row.last_log_integral = li.empty() ? 0.0 : li.back();
    row.last_growth_ratio = li.size() < 2 ? 0.0 : std::exp(li.back() - li[li.size() - 2]);
    rep.pass = rep.pass && pr.verdict == expected;
    rep.rows.push_back(row);
  };
  for (int j : js) {
    if (j < 1) throw InvalidArgument("j must be >= 1");
    Matrix t(2, 2);
    t << 1.0, 0.0, 0.0, 1.0 / j;
    run("T_" + std::to_string(j), t, ProbeVerdict::Divergent);
  }
  Matrix proj(2, 2);
  proj << 1.0, 0.0, 0.0, 0.0;
  run("P", proj, ProbeVerdict::Convergent);
  return rep;
}

}  // namespace lw
