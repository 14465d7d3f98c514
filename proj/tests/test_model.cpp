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
#include "lwgibbs/model.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lw;

namespace {

Vector random_vector(int n, std::mt19937_64& rng, double scale = 2.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = nd(rng);
  return x;
}

}  // namespace

TEST(SymMatrix, RejectsNonSymmetricData) {
  EXPECT_THROW(SymMatrix({{1.0, 2.0}, {2.0000001, 1.0}}), NotSymmetric);
  Matrix m(2, 3);
  m.setZero();
  EXPECT_THROW(SymMatrix{m}, Error);
}

TEST(SymMatrix, SymmetrizedIsExactlySymmetric) {
  std::mt19937_64 rng(3);
  Matrix m = Matrix::Random(4, 4);
  const SymMatrix s = SymMatrix::symmetrized(m * m.transpose() * 1.0000001 + 1e-9 * Matrix::Random(4, 4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(s(i, j), s(j, i));
}

TEST(SymMatrix, CongruenceAndInverse) {
  const SymMatrix a{{2.0, 0.5}, {0.5, 1.0}};
  Matrix t(2, 2);
  t << 1.0, 2.0, 0.0, 3.0;
  const SymMatrix c = a.congruence(t);
  EXPECT_LT((c.matrix() - t * a.matrix() * t.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((a.inverse().matrix() * a.matrix() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(a.log_det(), std::log(1.75), 1e-15);
  EXPECT_TRUE(a.is_positive_definite());
  EXPECT_FALSE(SymMatrix({{1.0, 2.0}, {2.0, 1.0}}).is_positive_definite());
}

TEST(Interaction, CoulombRequiresPositiveDefiniteCoupling) {
  EXPECT_THROW(Interaction::generalized_coulomb(SymMatrix{{1.0, 2.0}, {2.0, 1.0}}), Error);
  EXPECT_THROW(Interaction::quartic_1d(-1.0), Error);
}

TEST(Interaction, CoulombQuarticLowerBound) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 4; ++n) {
    const Interaction u = Interaction::generalized_coulomb(testing_util::random_pd(n, rng, 0.2, 3.0));
    const double c = coulomb_quartic_lower_bound(u);
    ASSERT_GT(c, 0.0);
    for (int k = 0; k < 200; ++k) {
      const Vector x = random_vector(n, rng);
      EXPECT_GE(u.evaluate(x), c * std::pow(x.squaredNorm(), 2) * (1.0 - 1e-12));
    }
  }
}

TEST(Interaction, CoulombFormula) {
  const SymMatrix v{{1.0, 0.5}, {0.5, 2.0}};
  const Interaction u = Interaction::generalized_coulomb(v);
  Vector x(2);
  x << 0.7, -1.3;
  const double y0 = x(0) * x(0), y1 = x(1) * x(1);
  EXPECT_NEAR(u.evaluate(x), (y0 * y0 + 2 * 0.5 * y0 * y1 + 2.0 * y1 * y1) / 8.0, 1e-15);
}

TEST(Interaction, Quartic1DEqualsCoulombWithScalarCoupling) {
  std::mt19937_64 rng(5);
  const Interaction q = Interaction::quartic_1d(1.7);
  const Interaction c = Interaction::generalized_coulomb(SymMatrix{{1.7}});
  for (int k = 0; k < 100; ++k) {
    const Vector x = random_vector(1, rng, 3.0);
    EXPECT_EQ(q.evaluate(x), c.evaluate(x));
  }
}

TEST(Interaction, CounterexamplePiecewiseFormula) {
  const Interaction u = Interaction::counterexample();
  Vector x(2);
  x << 0.5, 1.0;  // |x1| <= 1/|x2|
  EXPECT_DOUBLE_EQ(u.evaluate(x), std::pow(0.5, 4));
  x << 3.0, 2.0;  // |x1| > 1/|x2|
  EXPECT_DOUBLE_EQ(u.evaluate(x), std::pow(2.0, -4));
  x << 1e6, 0.0;  // x2 = 0 takes the first branch
  EXPECT_DOUBLE_EQ(u.evaluate(x), 1e24);
}

TEST(Interaction, TransformComposition) {
  std::mt19937_64 rng(17);
  const Interaction u = Interaction::generalized_coulomb(testing_util::random_pd(3, rng));
  const Matrix t1 = Matrix::Random(3, 3), t2 = Matrix::Random(3, 3);
  const Interaction nested = transform_interaction(transform_interaction(u, t1), t2);
  const Interaction direct = transform_interaction(u, t1 * t2);
  for (int k = 0; k < 100; ++k) {
    const Vector x = random_vector(3, rng);
    EXPECT_NEAR(nested.evaluate(x), direct.evaluate(x), 1e-12 * (1.0 + std::abs(direct.evaluate(x))));
    EXPECT_NEAR(direct.evaluate(x), u.evaluate(t1 * t2 * x), 1e-12 * (1.0 + std::abs(direct.evaluate(x))));
  }
}

TEST(Interaction, FragmentInvariance) {
  const Interaction u = Interaction::generalized_coulomb(SymMatrix{{2.0}}, {1}, 3);
  Vector x(3), y(3);
  x << 0.3, 1.1, -2.0;
  y << -5.0, 1.1, 7.0;
  EXPECT_EQ(u.evaluate(x), u.evaluate(y));
  EXPECT_EQ(u.support(), std::vector<int>{1});
}

TEST(Interaction, CustomSpotChecks) {
  GrowthMeta weak{0.0, false};
  EXPECT_THROW(Interaction::custom(1, [](std::span<const double> x) { return -x[0] * x[0]; }, weak),
               InvalidArgument);
  EXPECT_THROW(Interaction::custom(
                   2, [](std::span<const double> x) { return x[0] * x[0] + x[1]; }, GrowthMeta{}, std::vector<int>{0}),
               InvalidArgument);
  EXPECT_NO_THROW(Interaction::custom(1, [](std::span<const double> x) { return x[0] * x[0]; }, weak));
}

TEST(GibbsModel, HamiltonianMatchesDefinition) {
  std::mt19937_64 rng(23);
  const SymMatrix a = testing_util::random_pd(2, rng);
  const Interaction u = Interaction::generalized_coulomb(testing_util::random_pd(2, rng));
  const GibbsModel m(a, u, 0.3);
  for (int k = 0; k < 50; ++k) {
    const Vector x = random_vector(2, rng);
    EXPECT_DOUBLE_EQ(hamiltonian(m, x), 0.5 * x.dot(a.matrix() * x) + 0.3 * u.evaluate(x));
  }
}

TEST(GibbsModel, DimensionMismatchRejected) {
  EXPECT_THROW(GibbsModel(SymMatrix::identity(2), Interaction::quartic_1d(1.0)), DimensionMismatch);
  EXPECT_THROW(GibbsModel(SymMatrix::identity(1), Interaction::quartic_1d(1.0), -0.1), Error);
}

TEST(GibbsModel, DomainMembership) {
  const SymMatrix indefinite{{-1.0, 0.0}, {0.0, 1.0}};
  EXPECT_EQ(check_domain_membership(GibbsModel(indefinite, Interaction::zero(2))), DomainVerdict::Outside);
  EXPECT_EQ(check_domain_membership(GibbsModel(indefinite, Interaction::generalized_coulomb(SymMatrix::identity(2)))),
            DomainVerdict::Inside);
  // Impurity on site 0 cannot confine the negative direction of site 1.
  const SymMatrix bad{{1.0, 0.0}, {0.0, -1.0}};
  EXPECT_EQ(check_domain_membership(GibbsModel(bad, Interaction::generalized_coulomb(SymMatrix{{1.0}}, {0}, 2))),
            DomainVerdict::Outside);
  EXPECT_EQ(check_domain_membership(GibbsModel(indefinite, Interaction::generalized_coulomb(SymMatrix{{1.0}}, {0}, 2))),
            DomainVerdict::Inside);
}
