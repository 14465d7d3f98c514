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

#include "lwgibbs/interaction.hpp"

#include "lwgibbs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lw {

namespace {

constexpr double kPositiveDefiniteFloor = 1e-12;

void check_sites(const std::vector<int>& sites, int dim) {
  if (sites.empty()) throw InvalidArgument("fragment must not be empty");
  std::vector<int> sorted = sites;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("fragment has repeated sites");
  if (sorted.front() < 0 || sorted.back() >= dim)
    throw DimensionMismatch("fragment site out of range for N=" + std::to_string(dim));
}

bool is_diagonal(const Matrix& t) {
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      if (i != j && t(i, j) != 0.0) return false;
  return true;
}

// Deterministic sample points for spot checks, spread over several scales.
std::vector<Vector> probe_points(int dim, int count) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    double scale = std::pow(10.0, -1.0 + 3.0 * (k % 7) / 6.0);
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x(i) = scale * normal(rng);
    pts.push_back(std::move(x));
  }
  return pts;
}

}  // namespace

const char* to_string(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::Zero: return "zero";
    case InteractionKind::GeneralizedCoulomb: return "coulomb";
    case InteractionKind::Quartic1D: return "quartic1d";
    case InteractionKind::Counterexample: return "counterexample";
    case InteractionKind::Custom: return "custom";
  }
  return "unknown";
}

Interaction Interaction::zero(int dim) {
  if (dim < 1) throw DimensionMismatch("interaction dimension must be >= 1");
  Interaction u;
  u.kind_ = InteractionKind::Zero;
  u.dim_ = dim;
  u.growth_ = {0.0, false};
  u.degree_ = 4;
  return u;
}

Interaction Interaction::generalized_coulomb(const SymMatrix& v) {
  std::vector<int> all(static_cast<std::size_t>(v.dim()));
  for (int i = 0; i < v.dim(); ++i) all[static_cast<std::size_t>(i)] = i;
  Interaction u = generalized_coulomb(v, all, v.dim());
  u.fragment_.reset();
  u.growth_ = {0.0, true};
  return u;
}

Interaction Interaction::generalized_coulomb(const SymMatrix& v, std::vector<int> fragment, int dim) {
  check_sites(fragment, dim);
  if (static_cast<int>(fragment.size()) != v.dim())
    throw DimensionMismatch("coupling matrix size does not match fragment size");
  if (!v.is_positive_definite(kPositiveDefiniteFloor))
    throw InvalidArgument("generalized Coulomb interaction requires v positive definite");
  Interaction u;
  u.kind_ = InteractionKind::GeneralizedCoulomb;
  u.dim_ = dim;
  u.v_ = std::make_shared<const SymMatrix>(v);
  u.sites_ = fragment;
  const bool impurity = static_cast<int>(fragment.size()) < dim;
  u.growth_ = {0.0, !impurity};
  if (impurity) u.fragment_ = std::move(fragment);
  u.degree_ = 4;
  return u;
}

Interaction Interaction::quartic_1d(double lambda) { return quartic_1d(lambda, 0, 1); }

Interaction Interaction::quartic_1d(double lambda, int site, int dim) {
  if (!(lambda > 0.0)) throw InvalidArgument("Quartic1D requires lambda > 0");
  Interaction u = generalized_coulomb(SymMatrix{{lambda}}, {site}, dim);
  if (dim == 1) u.fragment_.reset();
  u.kind_ = InteractionKind::Quartic1D;
  return u;
}

Interaction Interaction::counterexample() {
  Interaction u;
  u.kind_ = InteractionKind::Counterexample;
  u.dim_ = 2;
  u.growth_ = {0.0, false};
  return u;
}

Interaction Interaction::custom(int dim, Function f, GrowthMeta growth, std::optional<std::vector<int>> fragment,
                                std::optional<int> homogeneous_degree) {
  if (dim < 1) throw DimensionMismatch("interaction dimension must be >= 1");
  if (!f) throw InvalidArgument("custom interaction needs a callable");
  Interaction u;
  u.kind_ = InteractionKind::Custom;
  u.dim_ = dim;
  u.growth_ = growth;
  u.degree_ = homogeneous_degree;
  u.fn_ = std::make_shared<const Function>(std::move(f));
  if (fragment) {
    check_sites(*fragment, dim);
    u.fragment_ = std::move(fragment);
  }

  const auto pts = probe_points(dim, 64);
  if (growth.weak_constant) {
    const double c = *growth.weak_constant;
    for (const auto& x : pts) {
      double val = u.evaluate(x);
      if (val + c * (1.0 + x.squaredNorm()) < -1e-12 * (1.0 + std::abs(val)))
        throw InvalidArgument("custom interaction violates its declared weak growth constant");
    }
  }
  if (u.fragment_) {
    std::vector<bool> in_fragment(static_cast<std::size_t>(dim), false);
    for (int s : *u.fragment_) in_fragment[static_cast<std::size_t>(s)] = true;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      Vector y = pts[k];
      for (int i = 0; i < dim; ++i)
        if (!in_fragment[static_cast<std::size_t>(i)]) y(i) = pts[k + 1](i);
      double a = u.evaluate(pts[k]), b = u.evaluate(y);
      if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a)))
        throw InvalidArgument("custom interaction depends on coordinates outside its fragment");
    }
  }
  return u;
}

const SymMatrix& Interaction::coupling() const {
  if (!v_) throw InvalidArgument("interaction has no coupling matrix");
  return *v_;
}

std::vector<int> Interaction::support() const {
  if (fragment_) return *fragment_;
  std::vector<int> all(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) all[static_cast<std::size_t>(i)] = i;
  return all;
}

double Interaction::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw DimensionMismatch("interaction expects " + std::to_string(dim_) + " coordinates, got " +
                            std::to_string(x.size()));
  switch (kind_) {
    case InteractionKind::Zero: return 0.0;
    case InteractionKind::GeneralizedCoulomb:
    case InteractionKind::Quartic1D: {
      const Matrix& v = v_->matrix();
      const std::size_t p = sites_.size();
      double acc = 0.0;
      for (std::size_t a = 0; a < p; ++a) {
        const double ya = x[static_cast<std::size_t>(sites_[a])];
        const double za = ya * ya;
        double row = 0.5 * v(a, a) * za;
        for (std::size_t b = a + 1; b < p; ++b) {
          const double yb = x[static_cast<std::size_t>(sites_[b])];
          row += v(a, b) * yb * yb;
        }
        acc += row * za;
      }
      return 0.25 * acc;
    }
    case InteractionKind::Counterexample: {
      const double a1 = std::abs(x[0]), a2 = std::abs(x[1]);
      // |x1| <= |x2|^-1, written without dividing by x2
      if (a1 * a2 <= 1.0) {
        const double s = a1 * a1;
        return s * s;
      }
      const double s = a2 * a2;
      return 1.0 / (s * s);
    }
    case InteractionKind::Custom: return (*fn_)(x);
  }
  return 0.0;
}

std::string Interaction::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(N=" << dim_;
  if (v_) {
    os << ", v=[";
    const Matrix& v = v_->matrix();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      if (i) os << "; ";
      for (Eigen::Index j = 0; j < v.cols(); ++j) os << (j ? " " : "") << v(i, j);
    }
    os << "]";
  }
  if (fragment_) {
    os << ", fragment={";
    for (std::size_t i = 0; i < fragment_->size(); ++i) os << (i ? "," : "") << (*fragment_)[i];
    os << "}";
  }
  os << ")";
  return os.str();
}

Interaction transform_interaction(const Interaction& u, const Matrix& t) {
  const int n = u.dim();
  if (t.rows() != n || t.cols() != n)
    throw DimensionMismatch("transform_interaction: T must be " + std::to_string(n) + "x" + std::to_string(n));
  if (u.is_zero()) return u;

  const bool diag = is_diagonal(t);
  if (u.is_coulomb_type() && diag) {
    const auto sites = u.support();
    bool invertible_on_fragment = true;
    for (int s : sites) invertible_on_fragment = invertible_on_fragment && t(s, s) != 0.0;
    if (invertible_on_fragment) {
      const Matrix& v = u.coupling().matrix();
      Matrix w = v;
      for (Eigen::Index a = 0; a < w.rows(); ++a)
        for (Eigen::Index b = 0; b < w.cols(); ++b) {
          const double ta = t(sites[a], sites[a]), tb = t(sites[b], sites[b]);
          w(a, b) = v(a, b) * ta * ta * tb * tb;
        }
      if (u.kind() == InteractionKind::Quartic1D)
        return Interaction::quartic_1d(w(0, 0), sites[0], n);
      if (u.fragment()) return Interaction::generalized_coulomb(SymMatrix(w), sites, n);
      return Interaction::generalized_coulomb(SymMatrix(w));
    }
  }

  GrowthMeta growth;
  if (u.growth().weak_constant) {
    // U(Tx) >= -C (1 + |Tx|^2) >= -C max(1, |T|^2) (1 + |x|^2)
    Eigen::JacobiSVD<Matrix> svd(t);
    const double s = svd.singularValues()(0);
    growth.weak_constant = *u.growth().weak_constant * std::max(1.0, s * s);
  }
  const bool invertible = std::abs(t.determinant()) > 1e-300;
  growth.strong = u.growth().strong && invertible;

  std::optional<std::vector<int>> fragment;
  if (diag && u.fragment()) fragment = u.fragment();

  auto base = std::make_shared<const Interaction>(u);
  Matrix tm = t;
  Interaction::Function f = [base, tm](std::span<const double> x) {
    Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Vector y = tm * xv;
    return base->evaluate(y);
  };
  return Interaction::custom(n, std::move(f), growth, std::move(fragment), u.homogeneous_degree());
}

double coulomb_quartic_lower_bound(const Interaction& u) {
  const SymMatrix& v = u.coupling();
  return v.min_eigenvalue() / (8.0 * v.dim());
}

}  // namespace lw
