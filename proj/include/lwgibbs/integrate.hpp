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

#include "lwgibbs/model.hpp"
#include "lwgibbs/sym_matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lw {

enum class Method { AutoQuadrature, MonteCarlo };
enum class MethodUsed { GaussHermite, GaussLegendreBox, MonteCarlo };

const char* to_string(Method m);
const char* to_string(MethodUsed m);

/// Knobs for the Gibbs integrals.
struct IntegrationSpec {
  Method method = Method::AutoQuadrature;
  /// Defaults to 1e-8 for quadrature and 1e-3 for Monte Carlo.
  std::optional<double> target_rel_error;
  long long max_evals = 100'000'000;
  /// Fixed truncation box [-L, L]^N in x; unset means chosen from integrand decay.
  std::optional<double> truncation_box_halfwidth;
  long long mc_samples = 200'000;
  std::uint64_t rng_seed = 20180723;
  /// Rough covariance of the Gibbs measure, used to whiten the quadrature box.
  std::optional<SymMatrix> covariance_hint;

  double rel_error() const;
  void validate() const;
};

/// Scalar integral with its error estimate. For Monte Carlo the error is the
/// standard error of the mean.
struct IntegrationResult {
  double value = 0.0;
  double abs_error = 0.0;
  long long n_evals = 0;
  MethodUsed method_used = MethodUsed::GaussHermite;
  std::string provenance;
};

/// Fully symmetric rank-4 tensor <x_i x_j x_k x_l>.
class FourthMoments {
 public:
  explicit FourthMoments(int n = 1) : n_(n), data_(static_cast<std::size_t>(n * n * n * n), 0.0) {}
  int dim() const { return n_; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
  double& at(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l);
  }
  int n_;
  std::vector<double> data_;
};

struct GreenResult {
  SymMatrix G = SymMatrix::zero(1);
  double abs_error = 0.0;  // max over entries
  long long n_evals = 0;
  MethodUsed method_used = MethodUsed::GaussHermite;
  std::string provenance;
};

struct FourthMomentResult {
  FourthMoments tensor;
  double abs_error = 0.0;
  long long n_evals = 0;
  MethodUsed method_used = MethodUsed::GaussHermite;
  std::string provenance;
};

/// Everything one pass over the integrand produces.
struct Moments {
  double log_z = 0.0;
  double log_z_error = 0.0;  // absolute error of log Z, i.e. relative error of Z
  SymMatrix G = SymMatrix::zero(1);
  double g_error = 0.0;
  std::optional<FourthMoments> m4;
  double m4_error = 0.0;
  long long n_evals = 0;
  MethodUsed method_used = MethodUsed::GaussHermite;
  std::string provenance;
};

/// Z, G and optionally the fourth moments in a single pass.
Moments compute_moments(const GibbsModel& model, const IntegrationSpec& spec, bool fourth = false);

IntegrationResult partition_function(const GibbsModel& model, const IntegrationSpec& spec = {});
/// Omega = -log Z.
IntegrationResult free_energy(const GibbsModel& model, const IntegrationSpec& spec = {});
GreenResult green_function(const GibbsModel& model, const IntegrationSpec& spec = {});
FourthMomentResult fourth_moment_tensor(const GibbsModel& model, const IntegrationSpec& spec = {});

enum class ProbeVerdict { Convergent, Divergent, Inconclusive };
const char* to_string(ProbeVerdict v);

struct ProbeOptions {
  double initial_halfwidth = 1.0;
  /// Number of doublings; 0 picks the largest the evaluation budget allows (at most 60).
  int doublings = 0;
  double divergence_ratio = 1.5;
  double target_rel_error = 1e-8;
  long long max_evals = 30'000'000;
};

struct ProbeResult {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  /// Integral over the largest box when convergent.
  double estimate = 0.0;
  std::vector<double> halfwidths;
  std::vector<double> log_integrals;  // log of the truncated integral per box
};

/// Integrates exp(-h) over the boxes [-L0 2^m, L0 2^m]^N, m = 0..M, on a
/// graded grid, and classifies the growth of the truncated integrals.
ProbeResult divergence_probe(const GibbsModel& model, const ProbeOptions& options = {});

}  // namespace lw
