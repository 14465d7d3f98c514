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

#include "lwgibbs/errors.hpp"
#include "lwgibbs/rules.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lw;

TEST(Rules, ReportPassIffGapWithinTolerance) {
  const RuleReport r = make_report("x", 1.0, 1e-6, 1.0 + 4e-6, 1e-6);
  EXPECT_GE(r.tolerance, 5.0 * 2e-6);
  EXPECT_EQ(r.pass, r.abs_gap <= r.tolerance);
  EXPECT_TRUE(r.pass);
  const RuleReport f = make_report("x", 1.0, 1e-9, 1.1, 1e-9);
  EXPECT_FALSE(f.pass);
  EXPECT_FALSE(all_pass({r, f}));
}

TEST(Rules, TransformationRandomCases) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 2; ++trial) {
    const SymMatrix g = testing_util::random_pd(2, rng);
    const Interaction u = Interaction::generalized_coulomb(testing_util::random_pd(2, rng));
    Matrix t = Matrix::Random(2, 2) + 1.5 * Matrix::Identity(2, 2);
    const RuleReport r = transformation_check(g, u, t, 0.3);
    EXPECT_TRUE(r.pass) << r.abs_gap << " > " << r.tolerance;
    EXPECT_EQ(r.pass, r.abs_gap <= r.tolerance);
  }
}

TEST(Rules, OrthogonalTransformOfRadialInteraction) {
  auto radial = [](std::span<const double> x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return r2 * r2 / 8.0;
  };
  const Interaction u = Interaction::custom(2, radial, GrowthMeta{0.0, true}, std::nullopt, 4);
  for (double angle : {0.3, 1.1, 2.5}) {
    Matrix t(2, 2);
    t << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    const RuleReport r = transformation_check(SymMatrix{{1.0, 0.3}, {0.3, 0.6}}, u, t, 0.5);
    EXPECT_TRUE(r.pass) << angle << ": " << r.abs_gap << " > " << r.tolerance;
  }
}

TEST(Rules, QuarticScaling) {
  const RuleReport one = scaling_check(SymMatrix{{1.0}}, Interaction::quartic_1d(1.0), 2.0, 0.4);
  EXPECT_TRUE(one.pass) << one.abs_gap;
  EXPECT_NEAR(one.rhs, -0.920265544179130681, 1e-9);
  const RuleReport two = scaling_check(SymMatrix{{1.0, 0.4}, {0.4, 0.8}},
                                       Interaction::generalized_coulomb(SymMatrix{{1.0, 0.2}, {0.2, 1.5}}), 2.0, 0.1);
  EXPECT_TRUE(two.pass) << two.abs_gap;
}

TEST(Rules, ScalingRejectsNonQuartic) {
  EXPECT_THROW(scaling_check(SymMatrix{{1.0, 0.0}, {0.0, 1.0}}, Interaction::counterexample(), 2.0, 1.0),
               InvalidArgument);
}

TEST(Rules, ProjectionAndSparsity) {
  const SymMatrix g{{1.0, 0.4}, {0.4, 0.9}};
  const Interaction u = Interaction::generalized_coulomb(SymMatrix{{1.0}}, {0}, 2);
  const auto proj = projection_check(g, u, 0.4);
  const auto sparse = sparsity_check(g, u, 0.4);
  EXPECT_TRUE(all_pass(proj));
  EXPECT_TRUE(all_pass(sparse));
  for (const auto& r : proj) EXPECT_EQ(r.pass, r.abs_gap <= r.tolerance);
  EXPECT_THROW(projection_check(g, Interaction::generalized_coulomb(SymMatrix::identity(2)), 0.4), InvalidArgument);
}

TEST(Rules, RestrictInteraction) {
  const Interaction u = Interaction::generalized_coulomb(SymMatrix{{1.0, 0.5}, {0.5, 2.0}});
  const Interaction r = restrict_interaction(u, {1});
  Vector y(1), x(2);
  y << 1.3;
  x << 0.0, 1.3;
  EXPECT_DOUBLE_EQ(r.evaluate(y), u.evaluate(x));
}

TEST(Rules, ExtensionLimit) {
  const ExtensionReport ex = extension_limit(SymMatrix{{1.0}}, Interaction::generalized_coulomb(SymMatrix::identity(2)),
                                             {0.2, 0.1, 0.05, 0.025}, 0.3);
  for (double p : ex.phis) EXPECT_TRUE(std::isfinite(p));
  EXPECT_FALSE(ex.non_monotone);
  EXPECT_TRUE(ex.report.pass) << ex.limit << " vs " << ex.target;
  EXPECT_GT(ex.rate, 0.0);
}

TEST(Rules, ExtensionLimitValidatesSchedule) {
  const Interaction u = Interaction::generalized_coulomb(SymMatrix::identity(2));
  EXPECT_THROW(extension_limit(SymMatrix{{1.0}}, u, {0.1, 0.2, 0.05}, 0.3), InvalidArgument);
  EXPECT_THROW(extension_limit(SymMatrix{{1.0}}, u, {0.2, 0.1}, 0.3), InvalidArgument);
}

TEST(Rules, Counterexample) {
  const CounterexampleReport rep = counterexample_experiment({1, 2, 4, 8});
  EXPECT_TRUE(rep.pass);
  ASSERT_EQ(rep.rows.size(), 5u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(rep.rows[k].verdict, ProbeVerdict::Divergent);
  EXPECT_EQ(rep.rows[4].verdict, ProbeVerdict::Convergent);
}
