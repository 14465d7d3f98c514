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

#include "lwgibbs/quadrature_rules.hpp"

#include "lwgibbs/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace lw {

namespace {

// Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix with zero
// diagonal and off-diagonal `beta`; mu0 is the total mass of the weight.
Rule1D golub_welsch(int n, double mu0, double (*beta)(int)) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = beta(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  Rule1D r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    r.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    r.weights[static_cast<std::size_t>(k)] = mu0 * v0 * v0;
  }
  // symmetric rules: enforce exact antisymmetry of the nodes
  for (int k = 0; k < n / 2; ++k) {
    const auto lo = static_cast<std::size_t>(k), hi = static_cast<std::size_t>(n - 1 - k);
    const double x = 0.5 * (r.nodes[hi] - r.nodes[lo]);
    const double w = 0.5 * (r.weights[hi] + r.weights[lo]);
    r.nodes[lo] = -x;
    r.nodes[hi] = x;
    r.weights[lo] = r.weights[hi] = w;
  }
  if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return r;
}

double hermite_beta(int k) { return std::sqrt(static_cast<double>(k)); }
double legendre_beta(int k) {
  const double kk = static_cast<double>(k);
  return kk / std::sqrt(4.0 * kk * kk - 1.0);
}

const Rule1D& cached(std::map<int, Rule1D>& cache, int n, double mu0, double (*beta)(int)) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, golub_welsch(n, mu0, beta)).first;
  return it->second;
}

}  // namespace

const Rule1D& gauss_hermite(int n) {
  if (n < 1 || n > 400) throw InvalidArgument("gauss_hermite: n out of range");
  static std::map<int, Rule1D> cache;
  return cached(cache, n, std::sqrt(2.0 * std::numbers::pi), hermite_beta);
}

const Rule1D& gauss_legendre(int n) {
  if (n < 1 || n > 400) throw InvalidArgument("gauss_legendre: n out of range");
  static std::map<int, Rule1D> cache;
  return cached(cache, n, 2.0, legendre_beta);
}

Rule1D composite_gauss_legendre(double a, double b, int panels, int q) {
  const Rule1D& base = gauss_legendre(q);
  Rule1D r;
  r.nodes.reserve(static_cast<std::size_t>(panels * q));
  r.weights.reserve(static_cast<std::size_t>(panels * q));
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (int k = 0; k < q; ++k) {
      r.nodes.push_back(mid + 0.5 * h * base.nodes[static_cast<std::size_t>(k)]);
      r.weights.push_back(0.5 * h * base.weights[static_cast<std::size_t>(k)]);
    }
  }
  return r;
}

}  // namespace lw
