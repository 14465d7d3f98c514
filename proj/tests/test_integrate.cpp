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
#include "lwgibbs/integrate.hpp"
#include "lwgibbs/parallel.hpp"
#include "lwgibbs/quadrature_rules.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

using namespace lw;

TEST(QuadratureRules, GaussHermiteMoments) {
  for (int n : {8, 24, 96}) {
    const Rule1D& r = gauss_hermite(n);
    double s0 = 0, s2 = 0, s4 = 0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      const double y = r.nodes[k];
      s0 += r.weights[k];
      s2 += r.weights[k] * y * y;
      s4 += r.weights[k] * y * y * y * y;
    }
    const double root = std::sqrt(2.0 * M_PI);
    EXPECT_NEAR(s0, root, 1e-13);
    EXPECT_NEAR(s2, root, 1e-13);
    EXPECT_NEAR(s4, 3.0 * root, 1e-12);
  }
}

TEST(QuadratureRules, GaussLegendreIsExactForPolynomials) {
  const Rule1D& r = gauss_legendre(10);
  for (int p = 0; p < 20; ++p) {
    double s = 0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) s += r.weights[k] * std::pow(r.nodes[k], p);
    EXPECT_NEAR(s, p % 2 ? 0.0 : 2.0 / (p + 1), 1e-14) << p;
  }
  const Rule1D c = composite_gauss_legendre(-1.0, 3.0, 7, 5);
  double s = 0;
  for (std::size_t k = 0; k < c.nodes.size(); ++k) s += c.weights[k] * std::exp(c.nodes[k]);
  EXPECT_NEAR(s, std::exp(3.0) - std::exp(-1.0), 1e-12);
}

struct QuarticCase {
  double a;
  double lambda;
  double eps;
};

class QuarticOracle : public ::testing::TestWithParam<QuarticCase> {};

TEST_P(QuarticOracle, MatchesSimpson) {
  const auto [a, lambda, eps] = GetParam();
  const auto ref = oracle::simpson_1d([&](double x) { return 0.5 * a * x * x + eps * lambda * x * x * x * x / 8.0; });
  const GibbsModel m(SymMatrix{{a}}, Interaction::quartic_1d(lambda), eps);
  const IntegrationResult z = partition_function(m);
  const GreenResult g = green_function(m);
  const FourthMomentResult m4 = fourth_moment_tensor(m);
  EXPECT_NEAR(z.value, ref.z, 1e-8 * ref.z);
  EXPECT_LE(std::abs(z.value - ref.z), std::max(10.0 * z.abs_error, 1e-13 * ref.z));
  EXPECT_NEAR(g.G(0, 0), ref.g, 1e-8 * ref.g);
  EXPECT_NEAR(m4.tensor(0, 0, 0, 0), ref.m4, 1e-7 * ref.m4);
  EXPECT_NEAR(free_energy(m).value, -std::log(ref.z), 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Cases, QuarticOracle,
                         ::testing::Values(QuarticCase{1.0, 1.0, 0.5}, QuarticCase{-1.0, 1.0, 1.0},
                                           QuarticCase{-1.0, 0.1, 1.0}, QuarticCase{0.3, 2.0, 0.05},
                                           QuarticCase{0.0, 1.0, 1.0}, QuarticCase{-3.0, 1.0, 0.2}));

TEST(Integrate, DoubleWellAnchors) {
  const GibbsModel m(SymMatrix{{-1.0}}, Interaction::quartic_1d(1.0), 1.0);
  EXPECT_NEAR(partition_function(m).value, 5.89125741653405302, 1e-9);
  EXPECT_NEAR(green_function(m).G(0, 0), 1.78692993914847325, 1e-9);
  const GibbsModel q(SymMatrix{{1.0}}, Interaction::quartic_1d(1.0), 0.5);
  EXPECT_NEAR(fourth_moment_tensor(q).tensor(0, 0, 0, 0), 1.23896401482472105, 1e-8);
}

TEST(Integrate, TwoDimensionalCoulombMatchesSimpson) {
  const SymMatrix a{{1.0, 0.3}, {0.3, 0.8}};
  const SymMatrix v{{1.0, 0.4}, {0.4, 1.5}};
  const double eps = 0.7;
  const auto ref = oracle::simpson_2d([&](double x, double y) {
    const double x2 = x * x, y2 = y * y;
    return 0.5 * (a(0, 0) * x2 + 2 * a(0, 1) * x * y + a(1, 1) * y2) +
           eps * (v(0, 0) * x2 * x2 + 2 * v(0, 1) * x2 * y2 + v(1, 1) * y2 * y2) / 8.0;
  });
  const GibbsModel m(a, Interaction::generalized_coulomb(v), eps);
  const GreenResult g = green_function(m);
  EXPECT_NEAR(partition_function(m).value, ref.z, 1e-8 * ref.z);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(g.G(i, j), ref.g[i][j], 1e-8);
}

TEST(Integrate, GaussianClosure) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + trial % 3;
    const SymMatrix a = testing_util::random_pd(n, rng, 0.3, 3.0);
    const GreenResult g = green_function(GibbsModel(a, Interaction::zero(n)));
    const double gap = max_abs_diff(g.G, a.inverse());
    EXPECT_LE(gap, std::max(10.0 * g.abs_error, 1e-13));
    EXPECT_LE(gap, 1e-7);
    const IntegrationResult z = partition_function(GibbsModel(a, Interaction::zero(n)));
    EXPECT_NEAR(std::log(z.value), 0.5 * n * std::log(2 * M_PI) - 0.5 * a.log_det(), 1e-12);
  }
}

TEST(Integrate, WickFactorization) {
  std::mt19937_64 rng(7);
  for (int n : {2, 3}) {
    const SymMatrix a = testing_util::random_pd(n, rng);
    const FourthMomentResult r = fourth_moment_tensor(GibbsModel(a, Interaction::zero(n)));
    const SymMatrix g = a.inverse();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            EXPECT_NEAR(r.tensor(i, j, k, l), g(i, j) * g(k, l) + g(i, k) * g(j, l) + g(i, l) * g(j, k), 1e-10);
  }
}

TEST(Integrate, GreenIsExactlySymmetricAndTensorIsPermutationInvariant) {
  std::mt19937_64 rng(9);
  const GibbsModel m(testing_util::random_pd(3, rng), Interaction::generalized_coulomb(testing_util::random_pd(3, rng)),
                     0.4);
  const Moments mo = compute_moments(m, IntegrationSpec{}, true);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(mo.G(i, j), mo.G(j, i));
  const FourthMoments& t = *mo.m4;
  EXPECT_EQ(t(0, 1, 2, 2), t(2, 1, 2, 0));
  EXPECT_EQ(t(0, 0, 1, 2), t(1, 2, 0, 0));
}

TEST(Integrate, MonteCarloAgreesWithQuadrature) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const GibbsModel m(testing_util::random_pd(2, rng),
                       Interaction::generalized_coulomb(testing_util::random_pd(2, rng)), 0.5);
    IntegrationSpec mc;
    mc.method = Method::MonteCarlo;
    mc.mc_samples = 100000;
    mc.rng_seed = 1000 + trial;
    const GreenResult q = green_function(m);
    const GreenResult s = green_function(m, mc);
    EXPECT_EQ(s.method_used, MethodUsed::MonteCarlo);
    EXPECT_LE(max_abs_diff(q.G, s.G), 3.0 * (q.abs_error + s.abs_error));
    const IntegrationResult zq = partition_function(m), zs = partition_function(m, mc);
    EXPECT_LE(std::abs(zq.value - zs.value), 3.0 * (zq.abs_error + zs.abs_error));
  }
}

TEST(Integrate, MonteCarloIsSeedDeterministic) {
  const GibbsModel m(SymMatrix{{1.0, 0.2}, {0.2, 1.0}}, Interaction::generalized_coulomb(SymMatrix::identity(2)), 1.0);
  IntegrationSpec mc;
  mc.method = Method::MonteCarlo;
  mc.mc_samples = 20000;
  EXPECT_EQ(green_function(m, mc).G, green_function(m, mc).G);
  IntegrationSpec other = mc;
  other.rng_seed = mc.rng_seed + 1;
  EXPECT_FALSE(green_function(m, mc).G == green_function(m, other).G);
}

TEST(Integrate, HigherDimensionsUseMonteCarlo) {
  const int n = 5;
  const GibbsModel m(SymMatrix::identity(n), Interaction::generalized_coulomb(SymMatrix::identity(n)), 0.2);
  IntegrationSpec spec;
  spec.mc_samples = 20000;
  const GreenResult g = green_function(m, spec);
  EXPECT_EQ(g.method_used, MethodUsed::MonteCarlo);
  const auto ref = oracle::simpson_1d([](double x) { return 0.5 * x * x + 0.2 * x * x * x * x / 8.0; });
  for (int i = 0; i < n; ++i) EXPECT_NEAR(g.G(i, i), ref.g, 5.0 * g.abs_error);
}

TEST(Integrate, ResultsDoNotDependOnWorkerCount) {
  const GibbsModel m(SymMatrix{{1.0, 0.3}, {0.3, 0.9}}, Interaction::generalized_coulomb(SymMatrix::identity(2)), 0.6);
  ::setenv("LW_THREADS", "1", 1);
  const Moments one = compute_moments(m, IntegrationSpec{}, true);
  ::setenv("LW_THREADS", "4", 1);
  const Moments four = compute_moments(m, IntegrationSpec{}, true);
  ::unsetenv("LW_THREADS");
  EXPECT_EQ(one.log_z, four.log_z);
  EXPECT_EQ(one.G, four.G);
}

TEST(Integrate, FixedTruncationBox) {
  const GibbsModel m(SymMatrix{{1.0}}, Interaction::quartic_1d(1.0), 0.5);
  IntegrationSpec spec;
  spec.truncation_box_halfwidth = 10.0;
  EXPECT_EQ(green_function(m, spec).method_used, MethodUsed::GaussLegendreBox);
  EXPECT_NEAR(fourth_moment_tensor(m, spec).tensor(0, 0, 0, 0), 1.23896401482472105, 1e-8);
}

TEST(Integrate, DivergentModelsAreReported) {
  EXPECT_THROW(green_function(GibbsModel(SymMatrix{{-1.0}}, Interaction::zero(1))), DivergenceDetected);
  const GibbsModel ce(SymMatrix{{0.0, 0.0}, {0.0, 1.0}}, Interaction::counterexample(), 1.0);
  EXPECT_EQ(divergence_probe(ce).verdict, ProbeVerdict::Divergent);
  EXPECT_EQ(divergence_probe(GibbsModel(SymMatrix{{-1.0}}, Interaction::quartic_1d(1.0))).verdict,
            ProbeVerdict::Convergent);
}

TEST(Integrate, SpecValidation) {
  IntegrationSpec bad;
  bad.target_rel_error = -1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  IntegrationSpec few;
  few.method = Method::MonteCarlo;
  few.mc_samples = 100;
  EXPECT_THROW(few.validate(), InvalidArgument);
}
