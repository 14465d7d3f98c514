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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lw {

/// Outcome of one acceptance criterion.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double error = 0.0;
  std::string threshold;
  std::string detail;
  double seconds = 0.0;  // wall time; kept out of the deterministic CSV body
};

constexpr int kCriterionCount = 13;

/// Runs criterion `id` (1..13) with random cases drawn from `seed`.
CriterionResult run_criterion(int id, std::uint64_t seed);

struct Bundle {
  std::vector<CriterionResult> rows;
  std::string csv_body;
  bool complete = true;
};

/// Runs criteria 1..13 and writes acceptance.csv, summary.json and header.txt
/// (timestamps and timings) into out_dir. `on_row` is called after each criterion.
Bundle reproduce_bundle(const std::string& out_dir, std::uint64_t seed,
                       const std::function<void(const CriterionResult&)>& on_row = {});

/// CSV body of a set of results (no timings).
std::string acceptance_csv(const std::vector<CriterionResult>& rows, std::uint64_t seed);

}  // namespace lw
