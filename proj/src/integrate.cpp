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

#include "lwgibbs/integrate.hpp"

#include "lwgibbs/errors.hpp"
#include "lwgibbs/parallel.hpp"
#include "lwgibbs/quadrature_rules.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace lw {

namespace {

constexpr int kMaxDim = 6;
constexpr int kMaxQuadratureDim = 3;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative error floor attributed to floating-point summation.
constexpr double kRoundoff = 1e-14;
// Box boundary must sit this many e-folds below the integrand maximum (1e-15).
constexpr double kBoxDecay = 34.5;
constexpr double kMaxBoxHalfwidth = 1e5;

// Unique index tuples of the second and fourth moments.
struct MomentLayout {
  int n = 0;
  std::vector<std::array<int, 2>> pairs;
  std::vector<std::array<int, 4>> quads;

  explicit MomentLayout(int dim) : n(dim) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) pairs.push_back({i, j});
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k)
          for (int l = k; l < n; ++l) quads.push_back({i, j, k, l});
  }
};

// Weighted sums kept relative to a floating log offset so that integrands
// spanning hundreds of e-folds neither overflow nor underflow.
struct Accumulator {
  double offset = -kInf;
  double s0 = 0.0;
  std::vector<double> s2, s4;
  long long count = 0;

  Accumulator(const MomentLayout& lay, bool fourth)
      : s2(lay.pairs.size(), 0.0), s4(fourth ? lay.quads.size() : 0, 0.0) {}

  void rescale(double new_offset) {
    const double f = offset == -kInf ? 0.0 : std::exp(offset - new_offset);
    s0 *= f;
    for (double& v : s2) v *= f;
    for (double& v : s4) v *= f;
    offset = new_offset;
  }

  void add(double logw, const double* x, const MomentLayout& lay) {
    ++count;
    if (!(logw > -kInf)) return;
    if (logw > offset + 30.0) rescale(logw);
    const double w = std::exp(logw - offset);
    s0 += w;
    for (std::size_t p = 0; p < lay.pairs.size(); ++p) s2[p] += w * x[lay.pairs[p][0]] * x[lay.pairs[p][1]];
    for (std::size_t p = 0; p < s4.size(); ++p) {
      const auto& q = lay.quads[p];
      s4[p] += w * x[q[0]] * x[q[1]] * x[q[2]] * x[q[3]];
    }
  }

  void merge(const Accumulator& o) {
    count += o.count;
    if (o.offset == -kInf) return;
    if (o.offset > offset) rescale(o.offset);
    const double f = std::exp(o.offset - offset);
    s0 += f * o.s0;
    for (std::size_t p = 0; p < s2.size(); ++p) s2[p] += f * o.s2[p];
    for (std::size_t p = 0; p < s4.size(); ++p) s4[p] += f * o.s4[p];
  }
};

struct LogRule {
  std::vector<double> nodes;
  std::vector<double> log_weights;
};

LogRule to_log_rule(const Rule1D& r) {
  LogRule lr;
  lr.nodes = r.nodes;
  lr.log_weights.reserve(r.weights.size());
  for (double w : r.weights) lr.log_weights.push_back(w > 0.0 ? std::log(w) : -kInf);
  return lr;
}

// Sum over the tensor grid rule^N of exp(logw(y) + f(C y)) with moments in x = C y.
template <class LogIntegrand>
Accumulator tensor_accumulate(const LogRule& rule, const Matrix& c, const LogIntegrand& f, const MomentLayout& lay,
                              bool fourth) {
  const int n = lay.n;
  const std::size_t m = rule.nodes.size();
  std::vector<Accumulator> partial(m, Accumulator(lay, fourth));
  parallel_for(m, [&](std::size_t i0) {
    Accumulator& acc = partial[i0];
    std::array<std::size_t, kMaxDim> idx{};
    idx[0] = i0;
    std::array<double, kMaxDim> y{}, x{};
    while (true) {
      double logw = 0.0;
      for (int d = 0; d < n; ++d) {
        y[d] = rule.nodes[idx[d]];
        logw += rule.log_weights[idx[d]];
      }
      for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += c(r, d) * y[d];
        x[r] = s;
      }
      logw += f(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
      acc.add(logw, x.data(), lay);
      int d = n - 1;
      while (d >= 1 && ++idx[d] == m) idx[d--] = 0;
      if (d < 1) break;
    }
  });
  Accumulator total(lay, fourth);
  for (const auto& p : partial) total.merge(p);
  return total;
}

Moments to_moments(const Accumulator& acc, const MomentLayout& lay, double log_det_c, bool fourth) {
  if (!(acc.s0 > 0.0) || !std::isfinite(acc.s0) || !std::isfinite(acc.offset))
    throw NoConvergence("integrand vanished or overflowed on the quadrature grid");
  Moments mo;
  mo.log_z = log_det_c + acc.offset + std::log(acc.s0);
  Matrix g(lay.n, lay.n);
  for (std::size_t p = 0; p < lay.pairs.size(); ++p) {
    const double v = acc.s2[p] / acc.s0;
    g(lay.pairs[p][0], lay.pairs[p][1]) = g(lay.pairs[p][1], lay.pairs[p][0]) = v;
  }
  mo.G = SymMatrix::symmetrized(g);
  if (fourth) {
    FourthMoments t(lay.n);
    for (std::size_t p = 0; p < lay.quads.size(); ++p) {
      const auto& q = lay.quads[p];
      const double v = acc.s4[p] / acc.s0;
      std::array<int, 4> perm = q;
      std::sort(perm.begin(), perm.end());
      do {
        t.at(perm[0], perm[1], perm[2], perm[3]) = v;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    mo.m4 = std::move(t);
  }
  mo.n_evals = acc.count;
  return mo;
}

double max_abs_fourth_diff(const FourthMoments& a, const FourthMoments& b, double* scale) {
  const int n = a.dim();
  double d = 0.0, s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          d = std::max(d, std::abs(a(i, j, k, l) - b(i, j, k, l)));
          s = std::max(s, std::abs(a(i, j, k, l)));
        }
  if (scale) *scale = s;
  return d;
}

// Error estimates from two successive refinement levels (coarse -> fine).
struct LevelDiff {
  double log_z, g, m4;
};

LevelDiff level_diff(const Moments& fine, const Moments& coarse, bool fourth) {
  LevelDiff d{};
  d.log_z = std::abs(fine.log_z - coarse.log_z);
  d.g = max_abs_diff(fine.G, coarse.G) / std::max(fine.G.max_abs(), 1e-300);
  d.m4 = 0.0;
  if (fourth) {
    double scale = 0.0;
    d.m4 = max_abs_fourth_diff(*fine.m4, *coarse.m4, &scale) / std::max(scale, 1e-300);
  }
  return d;
}

void apply_errors(Moments& m, const LevelDiff& d, bool fourth) {
  m.log_z_error = std::max(d.log_z, kRoundoff);
  m.g_error = std::max(d.g, kRoundoff) * m.G.max_abs();
  if (fourth) {
    double scale = 0.0;
    max_abs_fourth_diff(*m.m4, *m.m4, &scale);
    m.m4_error = std::max(d.m4, kRoundoff) * scale;
  }
}

bool converged(const LevelDiff& d, double tol, bool fourth) {
  return d.log_z <= tol && d.g <= tol && (!fourth || d.m4 <= tol);
}

bool is_interacting(const GibbsModel& model) {
  return model.epsilon() > 0.0 && !model.interaction().is_zero();
}

// Cases where Z = +inf is certain from the structure alone.
void reject_certain_divergence(const GibbsModel& model) {
  const Interaction& u = model.interaction();
  if (!is_interacting(model)) {
    if (!model.A().is_positive_definite())
      throw DivergenceDetected("Gaussian integral with A not positive definite diverges");
    return;
  }
  if (u.is_coulomb_type() && u.fragment()) {
    const auto frag = u.support();
    std::vector<int> rest;
    for (int i = 0; i < model.dim(); ++i)
      if (std::find(frag.begin(), frag.end(), i) == frag.end()) rest.push_back(i);
    Matrix block(static_cast<Eigen::Index>(rest.size()), static_cast<Eigen::Index>(rest.size()));
    for (std::size_t i = 0; i < rest.size(); ++i)
      for (std::size_t j = 0; j < rest.size(); ++j) block(i, j) = model.A()(rest[i], rest[j]);
    if (!SymMatrix(block).is_positive_definite())
      throw DivergenceDetected("impurity model: A restricted to the non-interacting sites is not positive definite");
  }
}

// -h(x) for the model.
struct NegativeHamiltonian {
  const GibbsModel* model;
  double operator()(std::span<const double> x) const {
    const Matrix& a = model->A().matrix();
    const std::size_t n = x.size();
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.5 * a(i, i) * x[i];
      for (std::size_t j = i + 1; j < n; ++j) row += a(i, j) * x[j];
      q += row * x[i];
    }
    const double eps = model->epsilon();
    return eps == 0.0 ? -q : -q - eps * model->interaction()(x);
  }
};

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- Gauss-Hermite

std::optional<Moments> try_gauss_hermite(const GibbsModel& model, const IntegrationSpec& spec, bool fourth) {
  const int n = model.dim();
  Eigen::LLT<Matrix> llt(model.A().matrix());
  if (llt.info() != Eigen::Success || !model.A().is_positive_definite(1e-10 * model.A().max_abs())) return std::nullopt;
  const Matrix l = llt.matrixL();
  // A = L L^T, x = L^{-T} y  =>  x^T A x = |y|^2
  const Matrix c = l.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));
  const double log_det_c = -l.diagonal().array().log().sum();
  const MomentLayout lay(n);

  const double eps = model.epsilon();
  const Interaction& u = model.interaction();
  auto f = [&](std::span<const double> x) { return eps == 0.0 ? 0.0 : -eps * u(x); };

  if (!is_interacting(model)) {
    // exact for polynomial moments up to degree 15
    const LogRule rule = to_log_rule(gauss_hermite(8));
    Moments m = to_moments(tensor_accumulate(rule, c, f, lay, fourth), lay, log_det_c, fourth);
    apply_errors(m, LevelDiff{0.0, 0.0, 0.0}, fourth);
    m.method_used = MethodUsed::GaussHermite;
    m.provenance = "gauss-hermite n=8 (exact for Gaussian moments)";
    return m;
  }

  std::vector<int> levels;
  switch (n) {
    case 1: levels = {24, 48, 96, 192}; break;
    case 2: levels = {16, 32, 64}; break;
    default: levels = {12, 24, 40}; break;
  }
  const double tol = spec.rel_error();
  std::optional<Moments> prev;
  long long evals = 0;
  for (int level : levels) {
    if (std::pow(static_cast<double>(level), n) > static_cast<double>(spec.max_evals)) break;
    const LogRule rule = to_log_rule(gauss_hermite(level));
    Moments cur = to_moments(tensor_accumulate(rule, c, f, lay, fourth), lay, log_det_c, fourth);
    evals += cur.n_evals;
    if (prev) {
      const LevelDiff d = level_diff(cur, *prev, fourth);
      if (converged(d, tol, fourth)) {
        apply_errors(cur, d, fourth);
        cur.n_evals = evals;
        cur.method_used = MethodUsed::GaussHermite;
        cur.provenance = "gauss-hermite n=" + std::to_string(level) + " after Cholesky whitening of A";
        return cur;
      }
    }
    prev = std::move(cur);
  }
  return std::nullopt;
}

// ------------------------------------------------------------- truncated box

struct BoxChoice {
  double halfwidth;
};

// Smallest halfwidth (in y = C^{-1} x) whose boundary lies kBoxDecay e-folds
// below the maximum of the moment-weighted integrand on a coarse grid.
std::optional<BoxChoice> find_box(const GibbsModel& model, const Matrix& c) {
  const int n = model.dim();
  const int half = n == 1 ? 64 : (n == 2 ? 24 : 10);
  const int pts = 2 * half + 1;
  const NegativeHamiltonian nh{&model};
  double halfwidth = 4.0;
  while (halfwidth <= kMaxBoxHalfwidth) {
    double inner_max = -kInf, boundary_max = -kInf;
    std::array<int, kMaxDim> idx{};
    std::array<double, kMaxDim> y{}, x{};
    while (true) {
      bool on_boundary = false;
      for (int d = 0; d < n; ++d) {
        y[d] = halfwidth * (idx[d] - half) / half;
        on_boundary = on_boundary || idx[d] == 0 || idx[d] == pts - 1;
      }
      double r2 = 0.0;
      for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += c(r, d) * y[d];
        x[r] = s;
        r2 += s * s;
      }
      const double v = nh(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
      inner_max = std::max(inner_max, v);
      if (on_boundary) boundary_max = std::max(boundary_max, v + 2.0 * std::log1p(r2));
      int d = n - 1;
      while (d >= 0 && ++idx[d] == pts) idx[d--] = 0;
      if (d < 0) break;
    }
    if (std::isfinite(inner_max) && inner_max - boundary_max >= kBoxDecay) return BoxChoice{halfwidth};
    halfwidth *= 1.5;
  }
  return std::nullopt;
}

Moments adaptive_box(const GibbsModel& model, const Matrix& c, double halfwidth, const IntegrationSpec& spec,
                     bool fourth) {
  const int n = model.dim();
  const int q = 10;
  int panels = n == 3 ? 4 : 8;
  const MomentLayout lay(n);
  const double log_det_c = std::log(std::abs(c.determinant()));
  const NegativeHamiltonian nh{&model};
  const double tol = spec.rel_error();
  std::optional<Moments> prev;
  long long evals = 0;
  while (true) {
    const double pts = std::pow(static_cast<double>(panels * q), n);
    if (pts > static_cast<double>(spec.max_evals))
      throw BudgetExceeded("quadrature box did not reach relative error " + format_double(tol) + " within " +
                           std::to_string(spec.max_evals) + " evaluations");
    const LogRule rule = to_log_rule(composite_gauss_legendre(-halfwidth, halfwidth, panels, q));
    Moments cur = to_moments(tensor_accumulate(rule, c, nh, lay, fourth), lay, log_det_c, fourth);
    evals += cur.n_evals;
    if (prev) {
      const LevelDiff d = level_diff(cur, *prev, fourth);
      if (converged(d, tol, fourth)) {
        apply_errors(cur, d, fourth);
        cur.n_evals = evals;
        cur.method_used = MethodUsed::GaussLegendreBox;
        cur.provenance = "gauss-legendre box halfwidth=" + format_double(halfwidth) + " (whitened), panels=" +
                         std::to_string(panels) + "x" + std::to_string(q) +
                         ", truncation at 1e-15 of the integrand maximum";
        return cur;
      }
    }
    prev = std::move(cur);
    panels *= 2;
  }
}

[[noreturn]] void classify_failed_box(const GibbsModel& model) {
  const ProbeResult probe = divergence_probe(model);
  if (probe.verdict == ProbeVerdict::Divergent)
    throw DivergenceDetected("truncated integrals grow without bound (divergence probe)");
  throw BudgetExceeded("could not find a truncation box where the integrand decays");
}

Moments box_moments(const GibbsModel& model, const IntegrationSpec& spec, bool fourth) {
  const int n = model.dim();
  if (spec.truncation_box_halfwidth) {
    Moments m = adaptive_box(model, Matrix::Identity(n, n), *spec.truncation_box_halfwidth, spec, fourth);
    m.provenance += "; user box in x";
    return m;
  }

  Matrix cov;
  if (spec.covariance_hint && spec.covariance_hint->dim() == n && spec.covariance_hint->is_positive_definite())
    cov = spec.covariance_hint->matrix();
  else if (model.A().is_positive_definite(1e-10))
    cov = model.A().inverse().matrix();
  else
    cov = Matrix::Identity(n, n);

  for (int pass = 0;; ++pass) {
    const Matrix c = Eigen::LLT<Matrix>(cov).matrixL();
    const auto box = find_box(model, c);
    if (!box) classify_failed_box(model);
    Moments m = adaptive_box(model, c, box->halfwidth, spec, fourth);
    if (pass >= 2) return m;
    // the whitened covariance should be close to the identity
    const Matrix cinv = c.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
    const Matrix gy = cinv * m.G.matrix() * cinv.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gy + gy.transpose()), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(n - 1);
    if (lo > 1.0 / 6.0 && hi < 6.0) return m;
    if (!(lo > 0.0)) return m;
    cov = m.G.matrix();
  }
}

// --------------------------------------------------------------- Monte Carlo

Vector locate_mode(const GibbsModel& model) {
  const int n = model.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(model.A().matrix());
  const Vector vmin = es.eigenvectors().col(0);
  const NegativeHamiltonian nh{&model};
  auto h = [&](const Vector& x) { return -nh({x.data(), static_cast<std::size_t>(n)}); };

  std::vector<Vector> starts{Vector::Zero(n)};
  if (es.eigenvalues()(0) < 0.0)
    for (double s : {0.5, 2.0, 8.0}) starts.push_back(s * vmin);

  Vector best = Vector::Zero(n);
  double best_h = h(best);
  for (Vector x : starts) {
    double hx = h(x);
    double step = 1.0;
    for (int it = 0; it < 500 && step > 1e-12; ++it) {
      Vector grad(n);
      for (int i = 0; i < n; ++i) {
        const double d = 1e-6 * std::max(1.0, std::abs(x(i)));
        Vector xp = x, xm = x;
        xp(i) += d;
        xm(i) -= d;
        grad(i) = (h(xp) - h(xm)) / (2.0 * d);
      }
      if (grad.norm() < 1e-10) break;
      Vector trial = x - step * grad;
      double ht = h(trial);
      while (ht >= hx && step > 1e-12) {
        step *= 0.5;
        trial = x - step * grad;
        ht = h(trial);
      }
      if (ht < hx) {
        x = trial;
        hx = ht;
        step *= 2.0;
      }
    }
    if (hx < best_h) {
      best = x;
      best_h = hx;
    }
  }
  return best;
}

Moments monte_carlo(const GibbsModel& model, const IntegrationSpec& spec, bool fourth) {
  const int n = model.dim();
  const MomentLayout lay(n);

  const double lmin = model.A().min_eigenvalue();
  const double eta = lmin > 0.0 ? 0.0 : 2.0 * std::abs(lmin) + 0.5;
  const Matrix precision = model.A().matrix() + eta * Matrix::Identity(n, n);
  const Matrix cov = SymMatrix::symmetrized(precision).inverse().matrix();
  const Matrix lc = Eigen::LLT<Matrix>(cov).matrixL();
  const double log_norm = -0.5 * n * std::log(2.0 * std::numbers::pi) - lc.diagonal().array().log().sum();
  const Vector mode = locate_mode(model);
  const bool mixture = mode.norm() > 1e-8;

  auto log_q = [&](const Vector& x) {
    const Vector zp = lc.triangularView<Eigen::Lower>().solve(x - mode);
    if (!mixture) return log_norm - 0.5 * zp.squaredNorm();
    const Vector zm = lc.triangularView<Eigen::Lower>().solve(x + mode);
    const double a = -0.5 * zp.squaredNorm(), b = -0.5 * zm.squaredNorm();
    const double mx = std::max(a, b);
    return log_norm + mx + std::log(0.5 * std::exp(a - mx) + 0.5 * std::exp(b - mx));
  };

  const NegativeHamiltonian nh{&model};
  constexpr long long kBatch = 10'000;
  const long long batches = (spec.mc_samples + kBatch - 1) / kBatch;
  const std::size_t n2 = lay.pairs.size(), n4 = fourth ? lay.quads.size() : 0;

  // Per batch: log ratios and feature vectors, reduced relative to the batch max.
  struct BatchSums {
    double offset = -kInf;
    double r = 0.0, rr = 0.0;
    std::vector<double> rf, rrf, rrff;  // sum r f, sum r^2 f, sum r^2 f^2 per feature
  };
  const std::size_t nf = n2 + n4;
  std::vector<BatchSums> sums(static_cast<std::size_t>(batches));

  parallel_for(static_cast<std::size_t>(batches), [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint64_t>(spec.rng_seed), static_cast<std::uint64_t>(b),
                      static_cast<std::uint64_t>(0x6c77)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const long long count = std::min(kBatch, spec.mc_samples - static_cast<long long>(b) * kBatch);
    std::vector<double> logr(static_cast<std::size_t>(count));
    std::vector<double> feat(static_cast<std::size_t>(count) * nf);
    double mx = -kInf;
    for (long long s = 0; s < count; ++s) {
      Vector z(n);
      for (int i = 0; i < n; ++i) z(i) = normal(rng);
      Vector x = lc * z + ((mixture && coin(rng)) ? Vector(-mode) : mode);
      const double lr = nh({x.data(), static_cast<std::size_t>(n)}) - log_q(x);
      logr[static_cast<std::size_t>(s)] = lr;
      mx = std::max(mx, lr);
      double* f = &feat[static_cast<std::size_t>(s) * nf];
      for (std::size_t p = 0; p < n2; ++p) f[p] = x(lay.pairs[p][0]) * x(lay.pairs[p][1]);
      for (std::size_t p = 0; p < n4; ++p) {
        const auto& q = lay.quads[p];
        f[n2 + p] = x(q[0]) * x(q[1]) * x(q[2]) * x(q[3]);
      }
    }
    BatchSums bs;
    bs.offset = mx;
    bs.rf.assign(nf, 0.0);
    bs.rrf.assign(nf, 0.0);
    bs.rrff.assign(nf, 0.0);
    for (long long s = 0; s < count; ++s) {
      const double r = std::exp(logr[static_cast<std::size_t>(s)] - mx);
      bs.r += r;
      bs.rr += r * r;
      const double* f = &feat[static_cast<std::size_t>(s) * nf];
      for (std::size_t p = 0; p < nf; ++p) {
        bs.rf[p] += r * f[p];
        bs.rrf[p] += r * r * f[p];
        bs.rrff[p] += r * r * f[p] * f[p];
      }
    }
    sums[b] = std::move(bs);
  });

  double offset = -kInf;
  for (const auto& s : sums) offset = std::max(offset, s.offset);
  double r = 0.0, rr = 0.0;
  std::vector<double> rf(nf, 0.0), rrf(nf, 0.0), rrff(nf, 0.0);
  for (const auto& s : sums) {
    const double f = std::exp(s.offset - offset), f2 = f * f;
    r += f * s.r;
    rr += f2 * s.rr;
    for (std::size_t p = 0; p < nf; ++p) {
      rf[p] += f * s.rf[p];
      rrf[p] += f2 * s.rrf[p];
      rrff[p] += f2 * s.rrff[p];
    }
  }
  const double ns = static_cast<double>(spec.mc_samples);
  const double mean_r = r / ns;
  const double var_r = std::max(rr / ns - mean_r * mean_r, 0.0);

  Moments mo;
  mo.log_z = offset + std::log(mean_r);
  mo.log_z_error = std::sqrt(var_r / ns) / mean_r;
  std::vector<double> mean(nf), se(nf);
  for (std::size_t p = 0; p < nf; ++p) {
    mean[p] = rf[p] / r;
    // delta method for the ratio estimator sum r f / sum r
    const double m = mean[p];
    const double v = (rrff[p] - 2.0 * m * rrf[p] + m * m * rr) / ns;
    se[p] = std::sqrt(std::max(v, 0.0) / ns) / mean_r;
  }
  Matrix g(n, n);
  double g_err = 0.0;
  for (std::size_t p = 0; p < n2; ++p) {
    g(lay.pairs[p][0], lay.pairs[p][1]) = g(lay.pairs[p][1], lay.pairs[p][0]) = mean[p];
    g_err = std::max(g_err, se[p]);
  }
  mo.G = SymMatrix::symmetrized(g);
  mo.g_error = g_err;
  if (fourth) {
    FourthMoments t(n);
    double m4_err = 0.0;
    for (std::size_t p = 0; p < n4; ++p) {
      std::array<int, 4> perm = lay.quads[p];
      do {
        t.at(perm[0], perm[1], perm[2], perm[3]) = mean[n2 + p];
      } while (std::next_permutation(perm.begin(), perm.end()));
      m4_err = std::max(m4_err, se[n2 + p]);
    }
    mo.m4 = std::move(t);
    mo.m4_error = m4_err;
  }
  mo.n_evals = spec.mc_samples;
  mo.method_used = MethodUsed::MonteCarlo;
  mo.provenance = "importance sampling, gaussian proposal with covariance (A + " + format_double(eta) +
                  " I)^-1" + (mixture ? ", symmetric two-mode mixture" : "") + ", seed " +
                  std::to_string(spec.rng_seed);
  return mo;
}

// ------------------------------------------------------------------- probing

struct LogSum {
  double m = -kInf;
  double s = 0.0;
  void add(double v) {
    if (!(v > -kInf)) return;
    if (v > m) {
      s = s * std::exp(m - v) + 1.0;
      m = v;
    } else {
      s += std::exp(v - m);
    }
  }
  void add_scaled(const LogSum& o) {
    if (o.m == -kInf) return;
    if (o.m > m) {
      s = s * std::exp(m - o.m) + o.s;
      m = o.m;
    } else {
      s += o.s * std::exp(o.m - m);
    }
  }
  double log() const { return m == -kInf ? -kInf : m + std::log(s); }
};

}  // namespace

const char* to_string(Method m) { return m == Method::MonteCarlo ? "monte-carlo" : "auto-quadrature"; }

const char* to_string(MethodUsed m) {
  switch (m) {
    case MethodUsed::GaussHermite: return "gauss-hermite";
    case MethodUsed::GaussLegendreBox: return "gauss-legendre-box";
    case MethodUsed::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::Convergent: return "Convergent";
    case ProbeVerdict::Divergent: return "Divergent";
    case ProbeVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

double IntegrationSpec::rel_error() const {
  if (target_rel_error) return *target_rel_error;
  return method == Method::MonteCarlo ? 1e-3 : 1e-8;
}

void IntegrationSpec::validate() const {
  if (!(rel_error() > 0.0)) throw InvalidArgument("target_rel_error must be > 0");
  if (max_evals < 1) throw InvalidArgument("max_evals must be >= 1");
  if (method == Method::MonteCarlo && mc_samples < 10'000)
    throw InvalidArgument("mc_samples must be >= 1e4 for Monte Carlo");
  if (truncation_box_halfwidth && !(*truncation_box_halfwidth > 0.0))
    throw InvalidArgument("truncation box halfwidth must be > 0");
}

Moments compute_moments(const GibbsModel& model, const IntegrationSpec& spec, bool fourth) {
  spec.validate();
  const int n = model.dim();
  if (n > kMaxDim) throw InvalidArgument("integration supports N <= 6");
  reject_certain_divergence(model);

  if (spec.method == Method::MonteCarlo || n > kMaxQuadratureDim) {
    IntegrationSpec mc = spec;
    if (mc.mc_samples < 10'000) mc.mc_samples = 10'000;
    return monte_carlo(model, mc, fourth);
  }
  if (!spec.truncation_box_halfwidth)
    if (auto gh = try_gauss_hermite(model, spec, fourth)) return *gh;
  return box_moments(model, spec, fourth);
}

IntegrationResult partition_function(const GibbsModel& model, const IntegrationSpec& spec) {
  const Moments m = compute_moments(model, spec, false);
  IntegrationResult r;
  r.value = std::exp(m.log_z);
  r.abs_error = r.value * m.log_z_error;
  r.n_evals = m.n_evals;
  r.method_used = m.method_used;
  r.provenance = m.provenance;
  return r;
}

IntegrationResult free_energy(const GibbsModel& model, const IntegrationSpec& spec) {
  const Moments m = compute_moments(model, spec, false);
  return {-m.log_z, m.log_z_error, m.n_evals, m.method_used, m.provenance};
}

GreenResult green_function(const GibbsModel& model, const IntegrationSpec& spec) {
  Moments m = compute_moments(model, spec, false);
  if (!m.G.is_positive_definite())
    throw NotPositiveDefinite("Green's function estimate is not positive definite; integration error too large");
  return {std::move(m.G), m.g_error, m.n_evals, m.method_used, m.provenance};
}

FourthMomentResult fourth_moment_tensor(const GibbsModel& model, const IntegrationSpec& spec) {
  Moments m = compute_moments(model, spec, true);
  return {std::move(*m.m4), m.m4_error, m.n_evals, m.method_used, m.provenance};
}

ProbeResult divergence_probe(const GibbsModel& model, const ProbeOptions& options) {
  const int n = model.dim();
  if (n > kMaxDim) throw InvalidArgument("divergence_probe supports N <= 6");
  constexpr int q = 8;
  constexpr int panels_per_shell = 2;
  auto nodes_for = [&](int doublings) { return q * (2 * panels_per_shell + 2 * panels_per_shell * doublings); };

  int doublings = options.doublings > 0 ? options.doublings : 60;
  while (doublings > 0 &&
         std::pow(static_cast<double>(nodes_for(doublings)), n) > static_cast<double>(options.max_evals))
    --doublings;

  ProbeResult res;
  if (doublings < 4) return res;

  // graded 1D grid: level 0 = [-L0, L0], level m = L0 [2^{m-1}, 2^m] on both sides
  std::vector<double> nodes, logw;
  std::vector<int> level;
  auto append = [&](double a, double b, int panels, int lev) {
    const Rule1D r = composite_gauss_legendre(a, b, panels, q);
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      nodes.push_back(r.nodes[k]);
      logw.push_back(std::log(r.weights[k]));
      level.push_back(lev);
    }
  };
  const double l0 = options.initial_halfwidth;
  append(-l0, l0, 2 * panels_per_shell, 0);
  for (int m = 1; m <= doublings; ++m) {
    const double lo = std::ldexp(l0, m - 1), hi = std::ldexp(l0, m);
    append(-hi, -lo, panels_per_shell, m);
    append(lo, hi, panels_per_shell, m);
  }

  const std::size_t len = nodes.size();
  const NegativeHamiltonian nh{&model};
  std::vector<std::vector<LogSum>> partial(len, std::vector<LogSum>(static_cast<std::size_t>(doublings + 1)));
  parallel_for(len, [&](std::size_t i0) {
    auto& buckets = partial[i0];
    std::array<std::size_t, kMaxDim> idx{};
    idx[0] = i0;
    std::array<double, kMaxDim> x{};
    while (true) {
      double lw = 0.0;
      int lev = 0;
      for (int d = 0; d < n; ++d) {
        x[d] = nodes[idx[d]];
        lw += logw[idx[d]];
        lev = std::max(lev, level[idx[d]]);
      }
      const double v = lw + nh(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
      if (!std::isnan(v)) buckets[static_cast<std::size_t>(lev)].add(v);
      int d = n - 1;
      while (d >= 1 && ++idx[d] == len) idx[d--] = 0;
      if (d < 1) break;
    }
  });

  std::vector<LogSum> per_level(static_cast<std::size_t>(doublings + 1));
  for (const auto& p : partial)
    for (std::size_t m = 0; m < p.size(); ++m) per_level[m].add_scaled(p[m]);

  LogSum cumulative;
  for (int m = 0; m <= doublings; ++m) {
    cumulative.add_scaled(per_level[static_cast<std::size_t>(m)]);
    res.halfwidths.push_back(std::ldexp(l0, m));
    res.log_integrals.push_back(cumulative.log());
  }

  const auto& li = res.log_integrals;
  const std::size_t last = li.size() - 1;
  bool divergent = true, convergent = true;
  for (std::size_t k = last - 2; k <= last; ++k) {
    const double step = li[k] - li[k - 1];  // log of the growth ratio
    if (!(step > std::log(options.divergence_ratio))) divergent = false;
    if (!(std::isfinite(li[k]) && -std::expm1(-step) < options.target_rel_error)) convergent = false;
  }
  if (divergent)
    res.verdict = ProbeVerdict::Divergent;
  else if (convergent) {
    res.verdict = ProbeVerdict::Convergent;
    res.estimate = std::exp(li[last]);
  }
  return res;
}

}  // namespace lw
