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
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lw;

TEST(Dyson, Bold1ClosedForm) {
  const auto root = bold1_root_1d(-1.0, 1.0);
  ASSERT_TRUE(root);
  EXPECT_NEAR(*root, (1.0 + std::sqrt(7.0)) / 3.0, 1e-12);
  const double g = *root;
  EXPECT_NEAR(1.5 * g * g - g - 1.0, 0.0, 1e-12);
}

TEST(Dyson, Bold1SolverAndIterationAgree) {
  const SymMatrix a{{-1.0}};
  const SigmaModel s = SigmaModel::bold1(Interaction::quartic_1d(1.0), 1.0);
  const DysonSolution closed = solve_dyson(a, s);
  ASSERT_EQ(closed.status, DysonStatus::Converged);
  EXPECT_NEAR((*closed.G)(0, 0), (1.0 + std::sqrt(7.0)) / 3.0, 1e-9);
  const DysonSolution it = solve_dyson_iterative(a, s, SymMatrix{{1.0}});
  ASSERT_EQ(it.status, DysonStatus::Converged);
  EXPECT_NEAR((*it.G)(0, 0), (*closed.G)(0, 0), 1e-10);
  EXPECT_LE(it.residual, DysonOptions{}.tol);
}

TEST(Dyson, Bold2HasNoPhysicalSolution) {
  const SigmaModel s = SigmaModel::bold2(Interaction::quartic_1d(1.0), 1.0);
  const DysonSolution sol = solve_dyson(SymMatrix{{-1.0}}, s);
  EXPECT_EQ(sol.status, DysonStatus::NoPhysicalSolution);
  EXPECT_FALSE(sol.G.has_value());
  ASSERT_TRUE(sol.certificate_lower_bound.has_value());
  // g f(g) = 1 - a g - c g^2 (3/2) + (3/2) c^2 g^4 >= 1 - 3/8 with a = -1, c = 1.
  EXPECT_GE(*sol.certificate_lower_bound, 0.625 - 1e-12);
}

TEST(Dyson, Bold2ModelUsesClosedFormInOneDimension) {
  const SigmaModel s = SigmaModel::bold2(Interaction::quartic_1d(2.0), 0.5);
  const double g = 0.8, c = 1.0;
  EXPECT_NEAR(s(SymMatrix{{g}})(0, 0), -1.5 * c * g + 1.5 * c * c * g * g * g, 1e-14);
}

TEST(Dyson, ExactSelfEnergyReproducesGreenFunction) {
  const SigmaModel s = SigmaModel::exact(Interaction::quartic_1d(1.0), 1.0);
  const DysonSolution sol = solve_dyson(SymMatrix{{-1.0}}, s);
  ASSERT_EQ(sol.status, DysonStatus::Converged);
  EXPECT_NEAR((*sol.G)(0, 0), 1.78692993914847325, 1e-8);
}

TEST(Dyson, ConsistencyOfExactSelfEnergy) {
  const RuleReport r = dyson_consistency(SymMatrix{{1.0, 0.2}, {0.2, 0.9}}, 0.3,
                                         Interaction::generalized_coulomb(SymMatrix::identity(2)));
  EXPECT_TRUE(r.pass) << r.abs_gap << " > " << r.tolerance;
}

TEST(Dyson, TruncationErrorIsSecondOrder) {
  const SymMatrix a{{1.0}};
  const Interaction u = Interaction::quartic_1d(1.0);
  IntegrationSpec spec;
  spec.target_rel_error = 1e-13;
  std::vector<double> logs, gaps;
  for (double eps : {0.02, 0.01, 0.005}) {
    const double exact = green_function(GibbsModel(a, u, eps), spec).G(0, 0);
    const DysonSolution s = solve_dyson(a, SigmaModel::bold1(u, eps));
    ASSERT_EQ(s.status, DysonStatus::Converged);
    logs.push_back(std::log(eps));
    gaps.push_back(std::log(std::abs(exact - (*s.G)(0, 0))));
  }
  const double slope = (gaps.back() - gaps.front()) / (logs.back() - logs.front());
  EXPECT_NEAR(slope, 2.0, 0.3);
}

TEST(Dyson, MultiDimensionalBold1) {
  const SymMatrix a{{1.0, 0.3}, {0.3, 1.2}};
  const SigmaModel s = SigmaModel::bold1(Interaction::generalized_coulomb(SymMatrix{{1.0, 0.2}, {0.2, 1.0}}), 0.3);
  const DysonSolution sol = solve_dyson(a, s);
  ASSERT_EQ(sol.status, DysonStatus::Converged);
  EXPECT_TRUE(sol.G->is_positive_definite());
  EXPECT_LE(sol.residual, DysonOptions{}.tol);
  const SymMatrix lhs = sol.G->inverse();
  EXPECT_LT(max_abs_diff(lhs, a - s(*sol.G)), 1e-9);
}

TEST(Dyson, AsymptoticTable) {
  const AsymptoticTable t = asymptotic_comparison({1.0, 0.1, 0.01});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_NEAR(t.rows[0].lambda_g_exact, 1.78692994, 1e-7);
  EXPECT_NEAR(t.rows[1].lambda_g_exact, 1.87366788, 1e-7);
  EXPECT_NEAR(t.rows[2].lambda_g_exact, 1.98984359, 1e-7);
  EXPECT_NEAR(t.rows[0].lambda_g_bold1, 1.21525044, 1e-7);
  EXPECT_NEAR(t.rows[1].lambda_g_bold1, 0.75497035, 1e-7);
  EXPECT_NEAR(t.rows[2].lambda_g_bold1, 0.67652100, 1e-7);
  EXPECT_TRUE(t.exact_pass);
}
