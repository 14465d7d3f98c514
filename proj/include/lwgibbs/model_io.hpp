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

#include <optional>
#include <string>
#include <vector>

namespace lw {

/// Contents of a model file. One `key = value` per line, `#` starts a
/// comment; matrices are written row by row with `;` between rows.
///
///   dim = 2
///   A = 1 0.2 ; 0.2 1.5
///   interaction = coulomb        # zero | coulomb | quartic1d | counterexample
///   v = 1 0.5 ; 0.5 1
///   fragment = 0                 # optional, 0-based sites coupled by v
///   lambda = 1                   # quartic1d
///   site = 0                     # quartic1d inside dim > 1
///   epsilon = 0.3
///   G = 1 0.3 ; 0.3 0.7          # optional Green's function
///   T = 1 0 ; 0 0.5              # optional transformation
///   scale = 2                    # optional scaling factor
///   delta = 0.2 0.1 0.05 0.025   # optional extension schedule
///   Gp = 1                       # optional fragment block for the extension
///   j = 1 2 4 8                  # optional counterexample schedule
struct ModelFile {
  int dim = 1;
  SymMatrix A = SymMatrix::identity(1);
  std::string interaction = "zero";
  std::optional<SymMatrix> v;
  std::optional<std::vector<int>> fragment;
  std::optional<double> lambda;
  std::optional<int> site;
  double epsilon = 1.0;
  std::optional<SymMatrix> G;
  std::optional<Matrix> T;
  std::optional<double> scale;
  std::vector<double> delta;
  std::optional<SymMatrix> Gp;
  std::vector<int> j;

  Interaction build_interaction() const;
  GibbsModel build_model() const;
};

ModelFile parse_model(const std::string& text);
ModelFile read_model_file(const std::string& path);
/// Shortest round-trip formatting: parse_model(format_model(m)) reproduces m bit for bit.
std::string format_model(const ModelFile& m);

/// A file holding a single matrix under `key` (default G), same syntax.
SymMatrix read_matrix_file(const std::string& path, const std::string& key = "G");

/// Shortest decimal string that parses back to the same double.
std::string format_double_exact(double x);

}  // namespace lw
