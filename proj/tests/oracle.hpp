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

#include "lwgibbs/sym_matrix.hpp"

#include <cmath>
#include <functional>
#include <random>

// Independent reference integrals: composite Simpson on a wide box in the
// original coordinates, with the exponent shifted by its value at the origin.
namespace oracle {

struct Moments1D {
  double z = 0.0;
  double g = 0.0;
  double m4 = 0.0;
};

inline Moments1D simpson_1d(const std::function<double(double)>& h, double half = 14.0, int n = 20000) {
  const double dx = 2.0 * half / n;
  Moments1D m;
  for (int k = 0; k <= n; ++k) {
    const double x = -half + k * dx;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double f = w * std::exp(-h(x));
    m.z += f;
    m.g += f * x * x;
    m.m4 += f * x * x * x * x;
  }
  m.g /= m.z;
  m.m4 /= m.z;
  m.z *= dx / 3.0;
  return m;
}

struct Moments2D {
  double z = 0.0;
  double g[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

inline Moments2D simpson_2d(const std::function<double(double, double)>& h, double half = 9.0, int n = 800) {
  const double dx = 2.0 * half / n;
  Moments2D m;
  for (int a = 0; a <= n; ++a) {
    const double x = -half + a * dx;
    const double wa = (a == 0 || a == n) ? 1.0 : (a % 2 ? 4.0 : 2.0);
    for (int b = 0; b <= n; ++b) {
      const double y = -half + b * dx;
      const double wb = (b == 0 || b == n) ? 1.0 : (b % 2 ? 4.0 : 2.0);
      const double f = wa * wb * std::exp(-h(x, y));
      m.z += f;
      m.g[0][0] += f * x * x;
      m.g[0][1] += f * x * y;
      m.g[1][1] += f * y * y;
    }
  }
  m.g[0][0] /= m.z;
  m.g[0][1] /= m.z;
  m.g[1][1] /= m.z;
  m.g[1][0] = m.g[0][1];
  m.z *= dx * dx / 9.0;
  return m;
}

inline double log_2pi_e() { return std::log(2.0 * M_PI * M_E); }

}  // namespace oracle

namespace testing_util {

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline lw::SymMatrix random_pd(int n, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(lo, hi);
  lw::Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
  Eigen::HouseholderQR<lw::Matrix> qr(m);
  const lw::Matrix q = qr.householderQ();
  lw::Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = ud(rng);
  return lw::SymMatrix::symmetrized(q * d.asDiagonal() * q.transpose());
}

}  // namespace testing_util
