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

#include "lwgibbs/dyson.hpp"

#include "lwgibbs/errors.hpp"
#include "lwgibbs/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SymMatrix full_coupling(const Interaction& u) {
  const int n = u.dim();
  Matrix v = Matrix::Zero(n, n);
  if (u.is_zero()) return SymMatrix(v);
  if (!u.is_coulomb_type()) throw InvalidArgument("truncated bold self-energies need a Coulomb-type interaction");
  const std::vector<int> s = u.support();
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) v(s[i], s[j]) = u.coupling()(static_cast<int>(i), static_cast<int>(j));
  return SymMatrix(v);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

double dyson_residual(const SymMatrix& a, const SigmaModel& sigma, const SymMatrix& g) {
  return (g.inverse() - a + sigma(g)).max_abs();
}

// Minimum of y^4 - y^2 over [y0, y1], y0 >= 0.
double quartic_well_min(double y0, double y1) {
  const double ystar = std::sqrt(0.5);
  if (y0 <= ystar && ystar <= y1) return -0.25;
  auto w = [](double y) { return y * y * y * y - y * y; };
  return std::min(w(y0), w(y1));
}

std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
  std::vector<double> g;
  const int steps = static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade));
  for (int k = 0; k <= steps; ++k) g.push_back(lo * std::pow(10.0, static_cast<double>(k) / per_decade));
  return g;
}

// Illinois variant of regula falsi on a bracketing interval.
double refine_root(const std::function<double(double)>& f, double lo, double hi, double flo, double fhi) {
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double x = (lo * fhi - hi * flo) / (fhi - flo);
    const double fx = f(x);
    if (!std::isfinite(fx)) return 0.5 * (lo + hi);
    if (fx == 0.0 || std::abs(hi - lo) <= 1e-15 * std::abs(x)) return x;
    if ((fx > 0.0) == (fhi > 0.0)) {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    } else {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    }
  }
  return (lo * fhi - hi * flo) / (fhi - flo);
}

DysonSolution one_d_solution(const SymMatrix& a, const SigmaModel& sigma, double g, std::string branch) {
  DysonSolution sol;
  const SymMatrix gm{{g}};
  sol.G = gm;
  sol.status = DysonStatus::Converged;
  sol.residual = dyson_residual(a, sigma, gm);
  sol.branch_info = std::move(branch);
  return sol;
}

DysonSolution solve_bold2_1d(const SymMatrix& am, const SigmaModel& sigma) {
  const double a = am(0, 0), c = sigma.coupling_1d();
  // g f(g) = 3/2 c^2 g^4 - 3/2 c g^2 - a g + 1
  auto p = [&](double g) { return 1.5 * c * c * g * g * g * g - 1.5 * c * g * g - a * g + 1.0; };
  auto dp = [&](double g) { return 6.0 * c * c * g * g * g - 3.0 * c * g - a; };

  std::vector<double> roots;
  if (c > 0.0) {
    Matrix comp = Matrix::Zero(4, 4);
    const double lead = 1.5 * c * c;
    const double coeff[4] = {0.0, -1.5 * c, -a, 1.0};  // g^3 .. g^0
    for (int k = 0; k < 4; ++k) comp(0, k) = -coeff[k] / lead;
    for (int k = 1; k < 4; ++k) comp(k, k - 1) = 1.0;
    const Eigen::VectorXcd ev = comp.eigenvalues();
    for (const auto& z : ev)
      if (z.real() > 0.0 && std::abs(z.imag()) <= 1e-9 * std::abs(z)) {
        double g = z.real();
        for (int it = 0; it < 50; ++it) {
          const double step = p(g) / dp(g);
          g -= step;
          if (std::abs(step) <= 1e-16 * g) break;
        }
        if (g > 0.0) roots.push_back(g);
      }
  } else if (a > 0.0) {
    roots.push_back(1.0 / a);
  }

  // sign scan and interval lower bound of g f(g)
  const std::vector<double> grid = geometric_grid(1e-8, 1e8, 20);
  double lower = 1.0 - 0.375 - std::max(0.0, a * grid.front());  // g below the grid
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double g0 = grid[k], g1 = grid[k + 1];
    const double pv0 = p(g0), pv1 = p(g1);
    if ((pv0 > 0.0) != (pv1 > 0.0)) {
      const double r = refine_root(p, g0, g1, pv0, pv1);
      const bool known = std::any_of(roots.begin(), roots.end(),
                                     [&](double x) { return std::abs(x - r) <= 1e-8 * r; });
      if (!known) roots.push_back(r);
    }
    const double sc = std::sqrt(c);
    const double cell = 1.5 * quartic_well_min(sc * g0, sc * g1) + 1.0 - std::max(a * g0, a * g1);
    lower = std::min(lower, cell);
  }
  const double gmax = grid.back();
  if (a <= 0.0)
    lower = std::min(lower, 0.625);
  else if (!(dp(gmax) > 0.0 && 18.0 * c * c * gmax * gmax - 3.0 * c > 0.0))
    lower = -std::numeric_limits<double>::infinity();
  else
    lower = std::min(lower, p(gmax));

  std::sort(roots.begin(), roots.end());
  if (!roots.empty()) {
    std::string info = "smallest positive root of 3/2 c^2 g^4 - 3/2 c g^2 - a g + 1; positive roots:";
    for (double r : roots) info += " " + fmt(r);
    return one_d_solution(am, sigma, roots.front(), info);
  }
  DysonSolution sol;
  sol.certificate_lower_bound = lower;
  if (lower > 0.0) {
    sol.status = DysonStatus::NoPhysicalSolution;
    sol.branch_info = "g f(g) >= " + fmt(lower) + " > 0 on (0, inf): y^4 - y^2 >= -1/4 with y = sqrt(lambda eps) g";
  } else {
    sol.status = DysonStatus::NotFound;
    sol.branch_info = "no positive root located; interval bound inconclusive";
  }
  return sol;
}

DysonSolution solve_exact_1d(const SymMatrix& am, const SigmaModel& sigma) {
  const double a = am(0, 0);
  auto q = [&](double g) {
    try {
      return 1.0 - a * g + g * sigma(SymMatrix{{g}})(0, 0);
    } catch (const Error&) {
      return kNaN;
    }
  };
  const std::vector<double> grid = geometric_grid(1e-3, 1e3, 12);
  std::vector<double> vals;
  for (double g : grid) vals.push_back(q(g));
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (!std::isfinite(vals[k]) || !std::isfinite(vals[k + 1])) continue;
    if ((vals[k] > 0.0) != (vals[k + 1] > 0.0)) {
      const double r = refine_root(q, grid[k], grid[k + 1], vals[k], vals[k + 1]);
      return one_d_solution(am, sigma, r, "sign change of g f(g) on [" + fmt(grid[k]) + ", " + fmt(grid[k + 1]) + "]");
    }
  }
  DysonSolution sol;
  sol.status = DysonStatus::NotFound;
  sol.branch_info = "no sign change of g f(g) on [1e-3, 1e3]";
  return sol;
}

SymMatrix projected_inverse(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  Vector d(a.dim());
  for (int i = 0; i < a.dim(); ++i) d(i) = 1.0 / std::max(std::abs(es.eigenvalues()(i)), 1e-8 * scale);
  return SymMatrix::symmetrized(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace

const char* to_string(SigmaKind k) {
  switch (k) {
    case SigmaKind::Exact: return "exact";
    case SigmaKind::Bold1: return "bold1";
    case SigmaKind::Bold2: return "bold2";
  }
  return "exact";
}

const char* to_string(DysonStatus s) {
  switch (s) {
    case DysonStatus::Converged: return "Converged";
    case DysonStatus::NoPhysicalSolution: return "NoPhysicalSolution";
    case DysonStatus::NotFound: return "NotFound";
    case DysonStatus::MaxIterExceeded: return "MaxIterExceeded";
  }
  return "NotFound";
}

SigmaModel::SigmaModel(SigmaKind kind, Interaction u, double eps, DualityOptions options)
    : kind_(kind), u_(std::move(u)), eps_(eps), options_(std::move(options)), v_(SymMatrix::zero(u_.dim())) {
  if (!(eps >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  if (kind_ != SigmaKind::Exact) v_ = full_coupling(u_);
}

SigmaModel SigmaModel::exact(Interaction u, double eps, DualityOptions options) {
  return {SigmaKind::Exact, std::move(u), eps, std::move(options)};
}

SigmaModel SigmaModel::bold1(Interaction u, double eps) { return {SigmaKind::Bold1, std::move(u), eps, {}}; }

SigmaModel SigmaModel::bold2(Interaction u, double eps, DualityOptions options) {
  return {SigmaKind::Bold2, std::move(u), eps, std::move(options)};
}

double SigmaModel::coupling_1d() const {
  if (dim() != 1) throw DimensionMismatch("coupling_1d needs N = 1");
  return v_(0, 0) * eps_;
}

SymMatrix SigmaModel::operator()(const SymMatrix& g) const {
  if (g.dim() != dim()) throw DimensionMismatch("G has the wrong dimension for the self-energy model");
  if (eps_ == 0.0 || u_.is_zero()) return SymMatrix::zero(dim());
  switch (kind_) {
    case SigmaKind::Exact: return self_energy(g, u_, eps_, options_);
    case SigmaKind::Bold1: return closed_form_sigma1(g, v_) * eps_;
    case SigmaKind::Bold2: {
      const SymMatrix first = closed_form_sigma1(g, v_) * eps_;
      if (dim() == 1) {
        const double c = coupling_1d(), x = g(0, 0);
        return first + SymMatrix{{1.5 * c * c * x * x * x}};
      }
      SeriesOptions so;
      so.duality = options_;
      so.throw_if_unstable = false;
      const SeriesCoefficients sc = extract_bold_series(g, u_, 2, so);
      return first + sc.sigma_coeffs[1] * (eps_ * eps_);
    }
  }
  return SymMatrix::zero(dim());
}

std::optional<double> bold1_root_1d(double a, double c) {
  if (c == 0.0) return a > 0.0 ? std::optional<double>(1.0 / a) : std::nullopt;
  // 2 / (a + sqrt(a^2 + 6c)) avoids cancellation for a > 0
  const double s = std::sqrt(a * a + 6.0 * c);
  return a >= 0.0 ? 2.0 / (a + s) : (s - a) / (3.0 * c);
}

DysonSolution solve_dyson_iterative(const SymMatrix& a, const SigmaModel& sigma, const SymMatrix& start,
                                    const DysonOptions& options) {
  DysonSolution sol;
  SymMatrix g = start;
  double res = dyson_residual(a, sigma, g);
  double alpha = 0.5;
  for (int it = 0; it < options.max_iter; ++it) {
    if (res <= options.tol) {
      sol.status = DysonStatus::Converged;
      sol.G = g;
      sol.residual = res;
      sol.iterations = it;
      sol.branch_info = "damped fixed point";
      return sol;
    }
    const Matrix m = (a - sigma(g)).matrix();
    const Matrix t = m.fullPivLu().inverse();
    if (!t.allFinite()) break;
    bool accepted = false;
    for (; alpha >= 1e-12; alpha *= 0.5) {
      const SymMatrix trial = SymMatrix::symmetrized((1.0 - alpha) * g.matrix() + alpha * t);
      if (!trial.is_positive_definite()) continue;
      const double rt = dyson_residual(a, sigma, trial);
      if (rt < res) {
        g = trial;
        res = rt;
        accepted = true;
        alpha = std::min(1.0, 1.5 * alpha);
        break;
      }
    }
    sol.iterations = it + 1;
    if (!accepted) {
      sol.status = DysonStatus::NotFound;
      sol.residual = res;
      sol.branch_info = "damped fixed point stalled at residual " + fmt(res);
      return sol;
    }
  }
  if (res <= options.tol) {
    sol.status = DysonStatus::Converged;
    sol.G = g;
  } else {
    sol.status = DysonStatus::MaxIterExceeded;
  }
  sol.residual = res;
  return sol;
}

DysonSolution solve_dyson(const SymMatrix& a, const SigmaModel& sigma, const DysonOptions& options) {
  if (a.dim() != sigma.dim()) throw DimensionMismatch("A and the self-energy model have different dimensions");
  if (a.dim() == 1) {
    if (sigma.kind() == SigmaKind::Exact) return solve_exact_1d(a, sigma);
    if (sigma.kind() == SigmaKind::Bold2) return solve_bold2_1d(a, sigma);
    const auto root = bold1_root_1d(a(0, 0), sigma.coupling_1d());
    if (root) return one_d_solution(a, sigma, *root, "positive root of 3/2 c g^2 + a g - 1 (the other root is negative)");
    DysonSolution sol;
    sol.status = DysonStatus::NoPhysicalSolution;
    sol.certificate_lower_bound = 1.0;
    sol.branch_info = "no interaction and a <= 0: g f(g) = 1 - a g >= 1";
    return sol;
  }

  const int n = a.dim();
  const std::vector<SymMatrix> starts{projected_inverse(a), SymMatrix::identity(n), SymMatrix::identity(n) * 0.1,
                                      SymMatrix::identity(n) * 10.0};
  std::vector<DysonSolution> runs;
  for (const auto& s : starts) runs.push_back(solve_dyson_iterative(a, sigma, s, options));
  const DysonSolution* first = nullptr;
  int converged = 0;
  double spread = 0.0;
  bool hit_max = false;
  int total_iter = 0;
  for (const auto& r : runs) {
    total_iter += r.iterations;
    hit_max = hit_max || r.status == DysonStatus::MaxIterExceeded;
    if (r.status != DysonStatus::Converged) continue;
    ++converged;
    if (!first)
      first = &r;
    else
      spread = std::max(spread, max_abs_diff(*first->G, *r.G));
  }
  if (first) {
    DysonSolution sol = *first;
    sol.iterations = total_iter;
    sol.branch_info = std::to_string(converged) + " of 4 starts converged; max spread " + fmt(spread);
    return sol;
  }
  DysonSolution sol;
  sol.status = hit_max ? DysonStatus::MaxIterExceeded : DysonStatus::NotFound;
  sol.iterations = total_iter;
  sol.residual = runs.front().residual;
  sol.branch_info = "no start converged (A^-1 projected, I, 0.1 I, 10 I)";
  return sol;
}

AsymptoticTable asymptotic_comparison(const std::vector<double>& lambdas, const IntegrationSpec& spec) {
  if (lambdas.empty()) throw InvalidArgument("empty lambda schedule");
  AsymptoticTable t;
  for (double lam : lambdas) {
    if (!(lam > 0.0 && lam <= 1.0)) throw InvalidArgument("lambda must lie in (0, 1]");
    const Moments mo = compute_moments(GibbsModel(SymMatrix{{-1.0}}, Interaction::quartic_1d(lam), 1.0), spec);
    AsymptoticRow row;
    row.lambda = lam;
    row.lambda_g_exact = lam * mo.G(0, 0);
    row.lambda_g_exact_error = lam * mo.g_error;
    row.lambda_g_bold1 = lam * *bold1_root_1d(-1.0, lam);
    t.rows.push_back(row);
  }
  const auto smallest = std::min_element(t.rows.begin(), t.rows.end(),
                                         [](const AsymptoticRow& x, const AsymptoticRow& y) { return x.lambda < y.lambda; });
  t.exact_pass = std::abs(smallest->lambda_g_exact - 2.0) <= 0.05 * 2.0;
  t.bold1_pass = std::abs(smallest->lambda_g_bold1 - 2.0 / 3.0) <= 0.01 * (2.0 / 3.0);
  return t;
}

RuleReport dyson_consistency(const SymMatrix& a, double eps, const Interaction& u, const DualityOptions& options) {
  const Moments mo = compute_moments(GibbsModel(a, u, eps), options.spec, true);
  const LwEvaluation ev = lw_functional(mo.G, u, eps, options);
  const double residual = (mo.G.inverse() - a + ev.sigma).max_abs();
  const Matrix jinv = green_jacobian(mo.G, *mo.m4).inverse();
  const double g_term = jinv.cwiseAbs().rowwise().sum().maxCoeff() * mo.g_error;
  RuleReport r = make_report("dyson-consistency", residual, ev.sigma_error + g_term, 0.0, 0.0,
                             "max |G^-1 - A + Sigma[G]| at G = G[A]; " + mo.provenance);
  r.tolerance += 1e-14 * a.max_abs();
  r.pass = r.abs_gap <= r.tolerance;
  return r;
}

}  // namespace lw
