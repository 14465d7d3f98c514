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

#include "lwgibbs/model_io.hpp"

#include "lwgibbs/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace lw {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  int line;
  std::string value;
};

double parse_double(const std::string& tok, int line, const std::string& field) {
  double x = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last) throw ParseError(line, field, "not a number: '" + tok + "'");
  return x;
}

int parse_int(const std::string& tok, int line, const std::string& field) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError(line, field, "not an integer: '" + tok + "'");
  return x;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

std::vector<double> parse_list(const Entry& e, const std::string& field) {
  std::vector<double> out;
  for (const auto& t : tokens(e.value)) out.push_back(parse_double(t, e.line, field));
  if (out.empty()) throw ParseError(e.line, field, "empty list");
  return out;
}

std::vector<int> parse_int_list(const Entry& e, const std::string& field) {
  std::vector<int> out;
  for (const auto& t : tokens(e.value)) out.push_back(parse_int(t, e.line, field));
  if (out.empty()) throw ParseError(e.line, field, "empty list");
  return out;
}

Matrix parse_matrix(const Entry& e, const std::string& field) {
  std::vector<std::vector<double>> rows;
  std::string row;
  std::istringstream is(e.value);
  while (std::getline(is, row, ';')) {
    std::vector<double> r;
    for (const auto& t : tokens(row)) r.push_back(parse_double(t, e.line, field));
    if (r.empty()) throw ParseError(e.line, field, "empty matrix row");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError(e.line, field, "empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ParseError(e.line, field, "rows of unequal length");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

SymMatrix parse_sym(const Entry& e, const std::string& field, int dim) {
  const Matrix m = parse_matrix(e, field);
  if (dim > 0 && (m.rows() != dim || m.cols() != dim))
    throw ParseError(e.line, field, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  try {
    return SymMatrix(m);
  } catch (const Error& err) {
    throw ParseError(e.line, field, err.what());
  }
}

std::map<std::string, Entry> read_entries(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, trim(s), "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "", "missing key");
    if (value.empty()) throw ParseError(line, key, "missing value");
    if (entries.count(key)) throw ParseError(line, key, "duplicate key");
    entries.emplace(key, Entry{line, value});
  }
  return entries;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string format_matrix(const Matrix& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) s += " ; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? " " : "") + format_double_exact(m(i, j));
  }
  return s;
}

}  // namespace

std::string format_double_exact(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

Interaction ModelFile::build_interaction() const {
  if (interaction == "zero") return Interaction::zero(dim);
  if (interaction == "counterexample") {
    if (dim != 2) throw InvalidArgument("the counterexample interaction needs dim = 2");
    return Interaction::counterexample();
  }
  if (interaction == "quartic1d") {
    if (!lambda) throw InvalidArgument("quartic1d needs lambda");
    if (dim == 1) return Interaction::quartic_1d(*lambda);
    return Interaction::quartic_1d(*lambda, site.value_or(0), dim);
  }
  if (interaction == "coulomb") {
    if (!v) throw InvalidArgument("coulomb needs v");
    if (fragment) return Interaction::generalized_coulomb(*v, *fragment, dim);
    return Interaction::generalized_coulomb(*v);
  }
  throw InvalidArgument("unknown interaction '" + interaction + "'");
}

GibbsModel ModelFile::build_model() const { return GibbsModel(A, build_interaction(), epsilon); }

ModelFile parse_model(const std::string& text) {
  auto entries = read_entries(text);
  static const char* known[] = {"dim", "A", "interaction", "v", "fragment", "lambda", "site", "epsilon",
                                "G", "T", "scale", "delta", "Gp", "j"};
  for (const auto& [key, e] : entries) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ParseError(e.line, key, "unknown key");
  }
  ModelFile m;
  auto get = [&](const char* key) -> const Entry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  if (const Entry* e = get("dim")) {
    m.dim = parse_int(trim(e->value), e->line, "dim");
    if (m.dim < 1 || m.dim > 6) throw ParseError(e->line, "dim", "must be between 1 and 6");
  } else {
    throw ParseError(0, "dim", "missing required key");
  }
  m.A = SymMatrix::identity(m.dim);
  if (const Entry* e = get("A")) m.A = parse_sym(*e, "A", m.dim);
  if (const Entry* e = get("interaction")) m.interaction = trim(e->value);
  if (const Entry* e = get("v")) m.v = parse_sym(*e, "v", 0);
  if (const Entry* e = get("fragment")) m.fragment = parse_int_list(*e, "fragment");
  if (const Entry* e = get("lambda")) m.lambda = parse_double(trim(e->value), e->line, "lambda");
  if (const Entry* e = get("site")) m.site = parse_int(trim(e->value), e->line, "site");
  if (const Entry* e = get("epsilon")) {
    m.epsilon = parse_double(trim(e->value), e->line, "epsilon");
    if (!(m.epsilon >= 0.0) || !std::isfinite(m.epsilon)) throw ParseError(e->line, "epsilon", "must be finite and >= 0");
  }
  if (const Entry* e = get("G")) m.G = parse_sym(*e, "G", m.dim);
  if (const Entry* e = get("T")) {
    m.T = parse_matrix(*e, "T");
    if (m.T->rows() != m.dim || m.T->cols() != m.dim) throw ParseError(e->line, "T", "expected a dim x dim matrix");
  }
  if (const Entry* e = get("scale")) m.scale = parse_double(trim(e->value), e->line, "scale");
  if (const Entry* e = get("delta")) m.delta = parse_list(*e, "delta");
  if (const Entry* e = get("Gp")) m.Gp = parse_sym(*e, "Gp", 0);
  if (const Entry* e = get("j")) m.j = parse_int_list(*e, "j");

  // validate the interaction now so errors point at the file
  try {
    (void)m.build_model();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& err) {
    const Entry* e = get("interaction");
    throw ParseError(e ? e->line : 0, "interaction", err.what());
  }
  return m;
}

ModelFile read_model_file(const std::string& path) { return parse_model(read_text(path)); }

std::string format_model(const ModelFile& m) {
  std::string s;
  s += "dim = " + std::to_string(m.dim) + "\n";
  s += "A = " + format_matrix(m.A.matrix()) + "\n";
  s += "interaction = " + m.interaction + "\n";
  if (m.v) s += "v = " + format_matrix(m.v->matrix()) + "\n";
  if (m.fragment) {
    s += "fragment =";
    for (int f : *m.fragment) s += " " + std::to_string(f);
    s += "\n";
  }
  if (m.lambda) s += "lambda = " + format_double_exact(*m.lambda) + "\n";
  if (m.site) s += "site = " + std::to_string(*m.site) + "\n";
  s += "epsilon = " + format_double_exact(m.epsilon) + "\n";
  if (m.G) s += "G = " + format_matrix(m.G->matrix()) + "\n";
  if (m.T) s += "T = " + format_matrix(*m.T) + "\n";
  if (m.scale) s += "scale = " + format_double_exact(*m.scale) + "\n";
  if (!m.delta.empty()) {
    s += "delta =";
    for (double d : m.delta) s += " " + format_double_exact(d);
    s += "\n";
  }
  if (m.Gp) s += "Gp = " + format_matrix(m.Gp->matrix()) + "\n";
  if (!m.j.empty()) {
    s += "j =";
    for (int x : m.j) s += " " + std::to_string(x);
    s += "\n";
  }
  return s;
}

SymMatrix read_matrix_file(const std::string& path, const std::string& key) {
  const auto entries = read_entries(read_text(path));
  const auto it = entries.find(key);
  if (it == entries.end()) throw ParseError(0, key, "missing in '" + path + "'");
  for (const auto& [k, e] : entries)
    if (k != key) throw ParseError(e.line, k, "unexpected key in a matrix file");
  return parse_sym(it->second, key, 0);
}

}  // namespace lw
