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

#include <vector>

namespace lw {

/// One-dimensional quadrature rule: nodes and weights.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Hermite rule for the weight exp(-y^2/2) on the real line
/// (Golub-Welsch). Weights sum to sqrt(2 pi). Cached per n.
const Rule1D& gauss_hermite(int n);

/// n-point Gauss-Legendre rule on [-1, 1]. Cached per n.
const Rule1D& gauss_legendre(int n);

/// Composite Gauss-Legendre: `panels` equal panels on [a, b], q nodes each.
Rule1D composite_gauss_legendre(double a, double b, int panels, int q);

}  // namespace lw
