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
#include "lwgibbs/dyson.hpp"
#include "lwgibbs/errors.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lw;

namespace {

// Phi for U = lambda x^4 / 8 at G = g from the Simpson oracle, by bisection on a.
struct QuarticLw {
  double a;
  double phi;
};

QuarticLw oracle_lw(double g, double lambda_eps) {
  auto moments = [&](double a) {
    return oracle::simpson_1d([&](double x) { return 0.5 * a * x * x + lambda_eps * x * x * x * x / 8.0; });
  };
  double lo = -20.0, hi = 20.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (moments(mid).g > g ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  const double f = 0.5 * a * g + std::log(moments(a).z);
  return {a, 2.0 * f - std::log(g) - oracle::log_2pi_e()};
}

}  // namespace

TEST(Duality, GradientConventionOnSumOfSquares) {
  const SymMatrix x{{0.3, -1.2, 0.5}, {-1.2, 2.0, 0.7}, {0.5, 0.7, -0.4}};
  auto f = [](const SymMatrix& m) { return m.matrix().squaredNorm(); };
  const SymMatrix grad = symmetric_gradient(f, x, 1e-4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(grad(i, j), 4.0 * x(i, j), 1e-8);
}

TEST(Duality, FreeEnergyGradientIsGreenFunction) {
  const SymMatrix a{{1.2, 0.3}, {0.3, 0.9}};
  const Interaction u = Interaction::generalized_coulomb(SymMatrix{{1.0, 0.2}, {0.2, 1.0}});
  IntegrationSpec spec;
  spec.target_rel_error = 1e-12;
  auto omega = [&](const SymMatrix& m) { return free_energy(GibbsModel(m, u, 0.5), spec).value; };
  const SymMatrix grad = symmetric_gradient(omega, a, 1e-4);
  const SymMatrix g = green_function(GibbsModel(a, u, 0.5), spec).G;
  EXPECT_LT(max_abs_diff(grad, g), 1e-7);
}

TEST(Duality, QuarticAnchors) {
  const DualityOptions opt = precise_duality_options();
  const Interaction u = Interaction::quartic_1d(1.0);
  const LwEvaluation ev = lw_functional(SymMatrix{{1.0}}, u, 0.2, opt);
  EXPECT_NEAR(ev.phi, -0.139715451414082304, 1e-10);
  EXPECT_NEAR(ev.A(0, 0), 0.735704900237614493, 1e-9);
  EXPECT_NEAR(ev.F, 1.34908080749763159, 1e-10);
  const LwEvaluation small = lw_functional(SymMatrix{{2.0}}, u, 0.01, opt);
  EXPECT_NEAR(small.phi, -0.0294595644479649085, 1e-10);
  EXPECT_NEAR(small.sigma(0, 0), -0.0289690075904843459, 1e-9);
}

TEST(Duality, QuarticMatchesSimpsonOracle) {
  const DualityOptions opt = precise_duality_options();
  for (auto [g, le] : {std::pair{1.0, 0.4}, std::pair{0.5, 1.0}, std::pair{3.0, 0.05}}) {
    const QuarticLw ref = oracle_lw(g, le);
    const LwEvaluation ev = lw_functional(SymMatrix{{g}}, Interaction::quartic_1d(1.0), le, opt);
    EXPECT_NEAR(ev.phi, ref.phi, 1e-9) << g << " " << le;
    EXPECT_NEAR(ev.A(0, 0), ref.a, 1e-8) << g << " " << le;
    EXPECT_LE(std::abs(ev.phi - ref.phi), std::max(10.0 * ev.error_estimate, 1e-11));
  }
}

TEST(Duality, PhiVanishesWithoutInteraction) {
  std::mt19937_64 rng(41);
  for (int n = 1; n <= 3; ++n) {
    const SymMatrix g = testing_util::random_pd(n, rng);
    const LwEvaluation ev = lw_functional(g, Interaction::zero(n), 1.0);
    EXPECT_NEAR(ev.phi, 0.0, 1e-6);
    EXPECT_LT(ev.sigma.max_abs(), 1e-6);
  }
}

TEST(Duality, RoundTrip) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 3;
    const SymMatrix a = testing_util::random_pd(n, rng);
    const Interaction u = Interaction::generalized_coulomb(testing_util::random_pd(n, rng));
    const double eps = 0.3;
    const SymMatrix g = green_function(GibbsModel(a, u, eps)).G;
    const InversionResult inv = invert_green(g, u, eps);
    ASSERT_TRUE(inv.converged);
    EXPECT_LE(inv.residual_norm, DualityOptions{}.newton_tol);
    EXPECT_LE(max_abs_diff(inv.A, a) / a.max_abs(), 1e-5) << "n=" << n;
  }
}

TEST(Duality, RoundTripThroughIndefiniteA) {
  const SymMatrix g{{1.78692993914847325}};
  const InversionResult inv = invert_green(g, Interaction::quartic_1d(1.0), 1.0, precise_duality_options());
  EXPECT_NEAR(inv.A(0, 0), -1.0, 1e-8);
}

TEST(Duality, SelfEnergyIsExactlyAMinusInverse) {
  const SymMatrix g{{1.0, 0.3}, {0.3, 0.7}};
  const LwEvaluation ev = lw_functional(g, Interaction::generalized_coulomb(SymMatrix::identity(2)), 0.3);
  EXPECT_EQ(ev.sigma, ev.A - g.inverse());
}

TEST(Duality, SelfEnergyIsHalfGradientOfPhi) {
  std::mt19937_64 rng(47);
  const DualityOptions opt = precise_duality_options();
  for (int trial = 0; trial < 2; ++trial) {
    const SymMatrix g = testing_util::random_pd(2, rng);
    const Interaction u = Interaction::generalized_coulomb(testing_util::random_pd(2, rng));
    const LwEvaluation ev = lw_functional(g, u, 0.3, opt);
    auto phi = [&](const SymMatrix& m) { return lw_functional(m, u, 0.3, opt).phi; };
    const SymMatrix half_grad = 0.5 * symmetric_gradient(phi, g, 1e-4);
    EXPECT_LE(max_abs_diff(half_grad, ev.sigma), std::max(1e-4, 50.0 * ev.error_estimate));
  }
}

TEST(Duality, ScriptFUpperBound) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 1 + trial % 2;
    const SymMatrix g = testing_util::random_pd(n, rng);
    const Interaction u = Interaction::generalized_coulomb(testing_util::random_pd(n, rng));
    EXPECT_LE(script_F(g, u, 0.5), script_F_upper_bound(g, u, 0.5));
  }
}

TEST(Duality, VariationalPrinciple) {
  const VariationalReport r = variational_check(SymMatrix{{1.0, 0.2}, {0.2, 0.8}},
                                                Interaction::generalized_coulomb(SymMatrix::identity(2)), 0.4, 6, 3);
  EXPECT_TRUE(r.pass) << r.equality_gap << " " << r.min_probe_margin;
  EXPECT_GE(r.min_probe_margin, -r.tolerance);
}

TEST(Duality, JacobianMatchesFiniteDifferences) {
  const SymMatrix a{{1.0, 0.25}, {0.25, 1.4}};
  const Interaction u = Interaction::generalized_coulomb(SymMatrix{{1.0, 0.3}, {0.3, 0.8}});
  IntegrationSpec spec;
  spec.target_rel_error = 1e-12;
  const Moments m = compute_moments(GibbsModel(a, u, 0.5), spec, true);
  const Matrix j = green_jacobian(m.G, *m.m4);
  const double h = 1e-5;
  int col = 0;
  for (int k = 0; k < 2; ++k)
    for (int l = k; l < 2; ++l, ++col) {
      Matrix d = Matrix::Zero(2, 2);
      d(k, l) = d(l, k) = h;
      const SymMatrix gp = green_function(GibbsModel(SymMatrix(a.matrix() + d), u, 0.5), spec).G;
      const SymMatrix gm = green_function(GibbsModel(SymMatrix(a.matrix() - d), u, 0.5), spec).G;
      int row = 0;
      for (int i = 0; i < 2; ++i)
        for (int jj = i; jj < 2; ++jj, ++row)
          EXPECT_NEAR(j(row, col), (gp(i, jj) - gm(i, jj)) / (2 * h), 1e-6);
    }
}

TEST(Duality, DysonSolutionIsUniqueAcrossStarts) {
  const SymMatrix a{{0.8}};
  const Interaction u = Interaction::quartic_1d(1.0);
  const SymMatrix g = green_function(GibbsModel(a, u, 0.5), precise_duality_options().spec).G;
  const SigmaModel exact = SigmaModel::exact(u, 0.5);
  for (double start : {0.3, 1.0, 3.0}) {
    const DysonSolution s = solve_dyson_iterative(a, exact, SymMatrix{{start}}, DysonOptions{1e-9, 500});
    ASSERT_EQ(s.status, DysonStatus::Converged) << start;
    EXPECT_NEAR((*s.G)(0, 0), g(0, 0), 1e-7) << start;
  }
}

TEST(Duality, RejectsNonPositiveDefiniteTarget) {
  EXPECT_THROW(invert_green(SymMatrix{{1.0, 2.0}, {2.0, 1.0}}, Interaction::zero(2), 1.0), Error);
}
