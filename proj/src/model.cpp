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

#include "lwgibbs/model.hpp"

#include "lwgibbs/errors.hpp"
#include "lwgibbs/integrate.hpp"

#include <algorithm>

namespace lw {

GibbsModel::GibbsModel(SymMatrix a, Interaction u, double epsilon)
    : a_(std::move(a)), u_(std::move(u)), eps_(epsilon) {
  if (a_.dim() != u_.dim())
    throw DimensionMismatch("GibbsModel: A is " + std::to_string(a_.dim()) + "x" + std::to_string(a_.dim()) +
                            " but the interaction acts on N=" + std::to_string(u_.dim()));
  if (!(epsilon >= 0.0)) throw InvalidArgument("GibbsModel: epsilon must be >= 0");
}

double hamiltonian(const GibbsModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.dim())
    throw DimensionMismatch("hamiltonian: expected " + std::to_string(model.dim()) + " coordinates");
  Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const double quad = 0.5 * xv.dot(model.A().matrix() * xv);
  if (model.epsilon() == 0.0) return quad;
  return quad + model.epsilon() * model.interaction()(x);
}

double hamiltonian(const GibbsModel& model, const Vector& x) {
  return hamiltonian(model, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

const char* to_string(DomainVerdict v) {
  switch (v) {
    case DomainVerdict::Inside: return "Inside";
    case DomainVerdict::Outside: return "Outside";
    case DomainVerdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

DomainVerdict check_domain_membership(const GibbsModel& model) {
  const Interaction& u = model.interaction();
  const SymMatrix& a = model.A();
  const int n = model.dim();
  const bool interacting = model.epsilon() > 0.0 && !u.is_zero();

  if (!interacting) return a.is_positive_definite() ? DomainVerdict::Inside : DomainVerdict::Outside;
  if (u.growth().strong) return DomainVerdict::Inside;

  // Coulomb impurity: strong growth on the fragment, Gaussian elsewhere.
  // Z is finite iff the block of A on the complementary sites is positive definite.
  if (u.is_coulomb_type() && u.fragment()) {
    const auto frag = u.support();
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
      if (std::find(frag.begin(), frag.end(), i) == frag.end()) rest.push_back(i);
    Matrix block(static_cast<Eigen::Index>(rest.size()), static_cast<Eigen::Index>(rest.size()));
    for (std::size_t i = 0; i < rest.size(); ++i)
      for (std::size_t j = 0; j < rest.size(); ++j) block(i, j) = a(rest[i], rest[j]);
    return SymMatrix(block).is_positive_definite() ? DomainVerdict::Inside : DomainVerdict::Outside;
  }

  // e^{-1/2 x^T A x - eps U} <= e^{eps C} e^{-1/2 x^T (A - 2 eps C) x}
  if (u.growth().weak_constant) {
    const double c = *u.growth().weak_constant * model.epsilon();
    if (a.min_eigenvalue() - 2.0 * c > 0.0) return DomainVerdict::Inside;
  }

  const ProbeResult probe = divergence_probe(model, ProbeOptions{});
  if (probe.verdict == ProbeVerdict::Divergent) return DomainVerdict::Outside;
  return DomainVerdict::Unknown;
}

}  // namespace lw
