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
#include "lwgibbs/series.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lw;

TEST(Series, FitPolynomialRecoversExactCoefficients) {
  std::vector<double> x{0.01, 0.005, 0.0025, 0.00125}, y, e(4, 0.0);
  for (double t : x) y.push_back(-0.75 * t + 0.375 * t * t - 0.4 * t * t * t);
  const PolynomialFit fit = fit_polynomial(x, y, e, 1, 3);
  EXPECT_NEAR(fit.coeffs[0], -0.75, 1e-10);
  EXPECT_NEAR(fit.coeffs[1], 0.375, 1e-7);
  EXPECT_NEAR(fit.coeffs[2], -0.4, 1e-4);
}

TEST(Series, ClosedFormSigma1) {
  const SymMatrix s = closed_form_sigma1(SymMatrix::diagonal({1.0, 2.0}), SymMatrix::identity(2));
  EXPECT_DOUBLE_EQ(s(0, 0), -1.5);
  EXPECT_DOUBLE_EQ(s(1, 1), -3.0);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(closed_form_sigma1(SymMatrix{{1.0}}, SymMatrix{{1.0}})(0, 0), -1.5);
}

TEST(Series, QuarticAnchor) {
  const SymMatrix g{{1.0}};
  const SeriesCoefficients c = extract_bold_series(g, Interaction::quartic_1d(1.0), 2);
  EXPECT_TRUE(c.trusted);
  EXPECT_NEAR(c.sigma_coeffs[0](0, 0), -1.5, 0.015);
  EXPECT_NEAR(c.sigma_coeffs[1](0, 0), 1.5, 0.075);
  EXPECT_NEAR(c.phi_coeffs[0], -0.75, 0.0075);
  EXPECT_NEAR(c.phi_coeffs[1], 0.375, 0.01875);
  EXPECT_TRUE(check_coefficient_relation(c, g).pass);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_LE(std::abs(c.sigma_coeffs[k](0, 0) - (k ? 1.5 : -1.5)), 5.0 * c.sigma_uncertainty[k] + 1e-9);
    EXPECT_LE(std::abs(c.phi_coeffs[k] - (k ? 0.375 : -0.75)), 5.0 * c.phi_uncertainty[k] + 1e-9);
  }
}

TEST(Series, ClosedFormMatchesExtractionInTwoDimensions) {
  std::mt19937_64 rng(61);
  const SymMatrix g = testing_util::random_pd(2, rng);
  const SymMatrix v = testing_util::random_pd(2, rng);
  const SeriesCoefficients c = extract_bold_series(g, Interaction::generalized_coulomb(v), 1);
  EXPECT_LE(max_abs_diff(c.sigma_coeffs[0], closed_form_sigma1(g, v)), 5.0 * c.sigma_uncertainty[0] + 1e-9);
}

TEST(Series, BoldAndBareAgreeAtFirstOrder) {
  const SymMatrix a{{1.2, 0.2}, {0.2, 0.9}};
  const Interaction u = Interaction::generalized_coulomb(SymMatrix{{1.0, 0.3}, {0.3, 1.0}});
  const SeriesCoefficients bold = extract_bold_series(a.inverse(), u, 1);
  const BareCoefficients bare = extract_bare_series(a, u, 1);
  EXPECT_LE(max_abs_diff(bare.g_coeffs[0], a.inverse()), 5.0 * bare.g_uncertainty[0] + 1e-9);
  EXPECT_EQ(bare.sigma_coeffs[0].max_abs(), 0.0);
  EXPECT_LE(max_abs_diff(bold.sigma_coeffs[0], bare.sigma_coeffs[1]),
            5.0 * (bold.sigma_uncertainty[0] + bare.sigma_uncertainty[1]) + 1e-9);
}

TEST(Series, StableUnderHalvingTheGrid) {
  const SymMatrix g{{1.0}};
  const Interaction u = Interaction::quartic_1d(1.0);
  SeriesOptions half;
  half.eps0 = 0.5e-2;
  const SeriesCoefficients c1 = extract_bold_series(g, u, 2);
  const SeriesCoefficients c2 = extract_bold_series(g, u, 2, half);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_LE(std::abs(c1.phi_coeffs[k] - c2.phi_coeffs[k]), std::max(c1.fit_residual, c2.fit_residual));
    EXPECT_LE(max_abs_diff(c1.sigma_coeffs[k], c2.sigma_coeffs[k]), std::max(c1.fit_residual, c2.fit_residual));
  }
}

TEST(Series, PhiCoefficientsScaleWithFourToTheK) {
  const Interaction u = Interaction::quartic_1d(1.0);
  const SeriesCoefficients c1 = extract_bold_series(SymMatrix{{0.7}}, u, 2);
  const SeriesCoefficients c2 = extract_bold_series(SymMatrix{{1.4}}, u, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const double f = std::pow(4.0, static_cast<double>(k + 1));
    EXPECT_LE(std::abs(c2.phi_coeffs[k] - f * c1.phi_coeffs[k]),
              5.0 * (c2.phi_uncertainty[k] + f * c1.phi_uncertainty[k]) + 1e-9);
  }
}

TEST(Series, SigmaCoefficientsAreSymmetric) {
  const SeriesCoefficients c = extract_bold_series(SymMatrix{{1.0, 0.2}, {0.2, 0.8}},
                                                   Interaction::generalized_coulomb(SymMatrix::identity(2)), 1);
  EXPECT_EQ(c.sigma_coeffs[0](0, 1), c.sigma_coeffs[0](1, 0));
}

TEST(Series, RejectsBadOrder) {
  EXPECT_THROW(extract_bold_series(SymMatrix{{1.0}}, Interaction::quartic_1d(1.0), 0), InvalidArgument);
}
