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
#include "lwgibbs/experiments.hpp"
#include "lwgibbs/model_io.hpp"
#include "lwgibbs/rules.hpp"
#include "lwgibbs/series.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace lw;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitRuleFailure = 2;

struct Options {
  std::string model_path;
  std::string g_path;
  std::string rule;
  std::string sigma = "exact";
  std::string lambda_sweep;
  std::string method = "auto";
  std::string out;
  int order = 2;
  double rel_err = 0.0;
  long long samples = 0;
  std::uint64_t seed = 20180723;
};

std::string num(double x) { return format_double_exact(x); }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        const std::string& c = cells[k];
        s += k ? "," : "";
        if (c.find_first_of(",\"\n") == std::string::npos) {
          s += c;
        } else {
          s += '"';
          for (char ch : c) s += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          s += '"';
        }
      }
      s += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s;
  }
};

// Collects one command's tables and summary and writes them out.
struct Output {
  std::string command;
  Options opt;
  std::vector<std::pair<std::string, Table>> tables;
  json summary;

  void emit() const {
    for (const auto& [name, t] : tables) {
      std::cout << "# " << name << "\n" << t.csv();
    }
    std::cout << "# summary\n" << summary.dump(2) << "\n";
    if (opt.out.empty()) return;
    std::filesystem::create_directories(opt.out);
    for (const auto& [name, t] : tables) std::ofstream(opt.out + "/" + name + ".csv") << t.csv();
    std::ofstream(opt.out + "/summary.json") << summary.dump(2) << "\n";
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    std::ofstream(opt.out + "/header.txt") << "generated " << stamp << "\ncommand " << command << "\nseed " << opt.seed
                                           << "\n";
  }
};

IntegrationSpec make_spec(const Options& o, bool precise) {
  IntegrationSpec spec = precise ? precise_duality_options().spec : IntegrationSpec{};
  if (o.method == "mc") spec.method = Method::MonteCarlo;
  if (o.rel_err > 0.0) spec.target_rel_error = o.rel_err;
  if (o.samples > 0) spec.mc_samples = o.samples;
  spec.rng_seed = o.seed;
  return spec;
}

DualityOptions make_duality(const Options& o, bool precise = true) {
  DualityOptions d = precise ? precise_duality_options() : DualityOptions{};
  d.spec = make_spec(o, precise);
  return d;
}

ModelFile load_model(const Options& o) {
  if (o.model_path.empty()) throw InvalidArgument("--model is required for this command");
  return read_model_file(o.model_path);
}

SymMatrix load_g(const Options& o, const ModelFile& m) {
  if (!o.g_path.empty()) return read_matrix_file(o.g_path);
  if (m.G) return *m.G;
  throw InvalidArgument("a Green's function is required: pass --G or set G in the model file");
}

json base_summary(const std::string& command, const Options& o, const ModelFile* m) {
  json s;
  s["command"] = command;
  s["seed"] = o.seed;
  if (m) {
    s["model_file"] = o.model_path;
    s["model"] = format_model(*m);
  }
  return s;
}

void add_matrix_rows(Table& t, const std::string& name, const SymMatrix& m, double err) {
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i; j < m.dim(); ++j)
      t.rows.push_back({name, std::to_string(i), std::to_string(j), num(m(i, j)), num(err)});
}

Table matrix_table() { return Table{{"quantity", "i", "j", "value", "abs_error"}, {}}; }

json provenance(MethodUsed m, long long n, const std::string& text, const IntegrationSpec& spec) {
  return {{"method", to_string(m)}, {"n_evals", n}, {"target_rel_error", spec.rel_error()}, {"detail", text}};
}

int cmd_z(const Options& o) {
  const ModelFile m = load_model(o);
  const IntegrationSpec spec = make_spec(o, false);
  const IntegrationResult z = partition_function(m.build_model(), spec);
  const IntegrationResult om = free_energy(m.build_model(), spec);
  Output out{"z", o, {}, base_summary("z", o, &m)};
  Table t{{"quantity", "value", "abs_error", "n_evals", "method"}, {}};
  t.rows.push_back({"Z", num(z.value), num(z.abs_error), std::to_string(z.n_evals), to_string(z.method_used)});
  t.rows.push_back({"Omega", num(om.value), num(om.abs_error), std::to_string(om.n_evals), to_string(om.method_used)});
  out.tables.push_back({"z", t});
  out.summary["Z"] = {{"value", z.value}, {"abs_error", z.abs_error}};
  out.summary["Omega"] = {{"value", om.value}, {"abs_error", om.abs_error}};
  out.summary["provenance"] = provenance(z.method_used, z.n_evals, z.provenance, spec);
  out.emit();
  return kExitPass;
}

int cmd_green(const Options& o) {
  const ModelFile m = load_model(o);
  const IntegrationSpec spec = make_spec(o, false);
  const GreenResult g = green_function(m.build_model(), spec);
  Output out{"green", o, {}, base_summary("green", o, &m)};
  Table t = matrix_table();
  add_matrix_rows(t, "G", g.G, g.abs_error);
  out.tables.push_back({"green", t});
  out.summary["abs_error"] = g.abs_error;
  out.summary["provenance"] = provenance(g.method_used, g.n_evals, g.provenance, spec);
  out.emit();
  return kExitPass;
}

int cmd_invert(const Options& o) {
  const ModelFile m = load_model(o);
  const SymMatrix g = load_g(o, m);
  const DualityOptions d = make_duality(o);
  const InversionResult inv = invert_green(g, m.build_interaction(), m.epsilon, d);
  Output out{"invert", o, {}, base_summary("invert", o, &m)};
  Table t = matrix_table();
  add_matrix_rows(t, "A", inv.A, inv.a_error);
  out.tables.push_back({"invert", t});
  out.summary["residual_norm"] = inv.residual_norm;
  out.summary["iterations"] = inv.iterations;
  out.summary["converged"] = inv.converged;
  out.summary["newton_tol"] = d.newton_tol;
  out.summary["provenance"] = provenance(MethodUsed::GaussHermite, inv.n_evals, inv.provenance, d.spec);
  out.summary["provenance"].erase("method");
  out.emit();
  return kExitPass;
}

int cmd_eval(const Options& o, const std::string& name, bool sigma_only) {
  const ModelFile m = load_model(o);
  const SymMatrix g = load_g(o, m);
  const DualityOptions d = make_duality(o);
  const LwEvaluation ev = lw_functional(g, m.build_interaction(), m.epsilon, d);
  Output out{name, o, {}, base_summary(name, o, &m)};
  Table t = matrix_table();
  if (!sigma_only) {
    t.rows.push_back({"phi", "", "", num(ev.phi), num(ev.error_estimate)});
    t.rows.push_back({"F", "", "", num(ev.F), num(ev.F_error)});
    add_matrix_rows(t, "A", ev.A, ev.sigma_error);
  }
  add_matrix_rows(t, "sigma", ev.sigma, ev.sigma_error);
  out.tables.push_back({name, t});
  out.summary["phi"] = {{"value", ev.phi}, {"abs_error", ev.error_estimate}};
  out.summary["F"] = {{"value", ev.F}, {"abs_error", ev.F_error}};
  out.summary["sigma_abs_error"] = ev.sigma_error;
  out.summary["newton"] = {{"iterations", ev.inversion.iterations}, {"residual_norm", ev.inversion.residual_norm}};
  out.summary["provenance"] = {{"detail", ev.inversion.provenance}, {"n_evals", ev.inversion.n_evals}};
  out.emit();
  return kExitPass;
}

int cmd_series(const Options& o) {
  const ModelFile m = load_model(o);
  const SymMatrix g = load_g(o, m);
  SeriesOptions so;
  so.duality = make_duality(o);
  so.throw_if_unstable = false;
  const SeriesCoefficients sc = extract_bold_series(g, m.build_interaction(), o.order, so);
  Output out{"series", o, {}, base_summary("series", o, &m)};
  Table t{{"k", "quantity", "i", "j", "value", "uncertainty"}, {}};
  for (int k = 1; k <= sc.order; ++k) {
    t.rows.push_back({std::to_string(k), "phi", "", "", num(sc.phi_coeffs[k - 1]), num(sc.phi_uncertainty[k - 1])});
    const SymMatrix& s = sc.sigma_coeffs[k - 1];
    for (int i = 0; i < s.dim(); ++i)
      for (int j = i; j < s.dim(); ++j)
        t.rows.push_back({std::to_string(k), "sigma", std::to_string(i), std::to_string(j), num(s(i, j)),
                          num(sc.sigma_uncertainty[k - 1])});
  }
  out.tables.push_back({"series", t});
  out.summary["fit_residual"] = sc.fit_residual;
  out.summary["trusted"] = sc.trusted;
  out.summary["eps_grid"] = sc.eps_grid;
  const Interaction u = m.build_interaction();
  if (u.homogeneous_degree().value_or(0) == 4) {
    const CoefficientRelationReport rel = check_coefficient_relation(sc, g);
    out.summary["coefficient_relation"] = {{"gap", rel.gap}, {"tolerance", rel.tolerance}, {"pass", rel.pass}};
  }
  out.emit();
  return sc.trusted ? kExitPass : kExitRuleFailure;
}

Table rule_table(const std::vector<RuleReport>& reps) {
  Table t{{"rule", "lhs", "rhs", "abs_gap", "tolerance", "pass", "provenance"}, {}};
  for (const auto& r : reps)
    t.rows.push_back({r.rule_name, num(r.lhs), num(r.rhs), num(r.abs_gap), num(r.tolerance), r.pass ? "pass" : "fail",
                      r.provenance});
  return t;
}

int cmd_counterexample(const Options& o) {
  std::vector<int> js{1, 2, 4, 8};
  std::unique_ptr<ModelFile> m;
  if (!o.model_path.empty()) {
    m = std::make_unique<ModelFile>(load_model(o));
    if (!m->j.empty()) js = m->j;
  }
  const CounterexampleReport rep = counterexample_experiment(js);
  Output out{"counterexample", o, {}, base_summary("counterexample", o, m.get())};
  Table t{{"map", "verdict", "expected", "last_log_integral", "last_growth_ratio"}, {}};
  for (const auto& r : rep.rows)
    t.rows.push_back({r.label, to_string(r.verdict), to_string(r.expected), num(r.last_log_integral),
                      num(r.last_growth_ratio)});
  out.tables.push_back({"counterexample", t});
  out.summary["pass"] = rep.pass;
  out.summary["probe"] = "graded boxes L0 2^m, divergence ratio 1.5 over 3 doublings";
  out.emit();
  return rep.pass ? kExitPass : kExitRuleFailure;
}

int cmd_extend(const Options& o) {
  const ModelFile m = load_model(o);
  const SymMatrix gp = m.Gp ? *m.Gp : SymMatrix::identity(1);
  const std::vector<double> deltas = m.delta.empty() ? std::vector<double>{0.2, 0.1, 0.05, 0.025} : m.delta;
  const ExtensionReport ex = extension_limit(gp, m.build_interaction(), deltas, m.epsilon, 1e-2, make_duality(o));
  Output out{"extend", o, {}, base_summary("extend", o, &m)};
  Table seq{{"delta", "phi", "abs_error"}, {}};
  for (std::size_t k = 0; k < ex.deltas.size(); ++k)
    seq.rows.push_back({num(ex.deltas[k]), num(ex.phis[k]), num(ex.phi_errors[k])});
  out.tables.push_back({"extend_sequence", seq});
  out.tables.push_back({"extend", rule_table({ex.report})});
  out.summary["limit"] = ex.limit;
  out.summary["rate"] = std::isfinite(ex.rate) ? json(ex.rate) : json(nullptr);
  out.summary["target"] = {{"value", ex.target}, {"abs_error", ex.target_error}};
  if (ex.non_monotone) out.summary["warning"] = ex.warning;
  out.summary["pass"] = ex.report.pass;
  out.emit();
  return ex.report.pass ? kExitPass : kExitRuleFailure;
}

int cmd_check(const Options& o) {
  if (o.rule == "counterexample") return cmd_counterexample(o);
  if (o.rule == "extend") return cmd_extend(o);
  const ModelFile m = load_model(o);
  const Interaction u = m.build_interaction();
  const DualityOptions d = make_duality(o, m.dim < 3);
  const SymMatrix g = load_g(o, m);
  std::vector<RuleReport> reps;
  if (o.rule == "transform") {
    if (!m.T) throw InvalidArgument("rule transform needs T in the model file");
    reps.push_back(transformation_check(g, u, *m.T, m.epsilon, d));
  } else if (o.rule == "scale") {
    reps.push_back(scaling_check(g, u, m.scale.value_or(2.0), m.epsilon, d));
  } else if (o.rule == "project") {
    reps = projection_check(g, u, m.epsilon, o.seed, d);
  } else if (o.rule == "sparse") {
    reps = sparsity_check(g, u, m.epsilon, d);
  } else {
    throw InvalidArgument("unknown rule '" + o.rule + "'");
  }
  Output out{"check", o, {}, base_summary("check", o, &m)};
  out.tables.push_back({"check_" + o.rule, rule_table(reps)});
  out.summary["rule"] = o.rule;
  out.summary["pass"] = all_pass(reps);
  out.emit();
  return all_pass(reps) ? kExitPass : kExitRuleFailure;
}

std::vector<double> parse_sweep(const std::string& s) {
  const auto c1 = s.find(':'), c2 = s.rfind(':');
  if (c1 == std::string::npos || c1 == c2) throw InvalidArgument("--lambda-sweep expects a:b:n");
  const double a = std::stod(s.substr(0, c1)), b = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
  const int n = std::stoi(s.substr(c2 + 1));
  if (n < 1 || !(a > 0.0) || !(b > 0.0)) throw InvalidArgument("--lambda-sweep needs a, b > 0 and n >= 1");
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(n == 1 ? a : a * std::pow(b / a, static_cast<double>(k) / (n - 1)));
  return out;
}

int cmd_dyson(const Options& o) {
  const ModelFile m = load_model(o);
  const Interaction u = m.build_interaction();
  SigmaModel sigma = o.sigma == "bold1"   ? SigmaModel::bold1(u, m.epsilon)
                     : o.sigma == "bold2" ? SigmaModel::bold2(u, m.epsilon, make_duality(o))
                     : o.sigma == "exact" ? SigmaModel::exact(u, m.epsilon, make_duality(o))
                                          : throw InvalidArgument("unknown --sigma '" + o.sigma + "'");
  const DysonSolution sol = solve_dyson(m.A, sigma);
  Output out{"dyson", o, {}, base_summary("dyson", o, &m)};
  Table t{{"sigma", "status", "i", "j", "G", "residual", "iterations", "branch"}, {}};
  if (sol.G) {
    for (int i = 0; i < sol.G->dim(); ++i)
      for (int j = i; j < sol.G->dim(); ++j)
        t.rows.push_back({o.sigma, to_string(sol.status), std::to_string(i), std::to_string(j), num((*sol.G)(i, j)),
                          num(sol.residual), std::to_string(sol.iterations), sol.branch_info});
  } else {
    t.rows.push_back({o.sigma, to_string(sol.status), "", "", "", num(sol.residual), std::to_string(sol.iterations),
                      sol.branch_info});
  }
  out.tables.push_back({"dyson", t});
  out.summary["status"] = to_string(sol.status);
  if (sol.certificate_lower_bound) out.summary["certificate_lower_bound"] = *sol.certificate_lower_bound;
  if (!o.lambda_sweep.empty()) {
    const AsymptoticTable at = asymptotic_comparison(parse_sweep(o.lambda_sweep), make_spec(o, false));
    Table a{{"lambda", "lambda_G_exact", "abs_error", "lambda_G1", "abs_error_G1"}, {}};
    for (const auto& r : at.rows)
      a.rows.push_back({num(r.lambda), num(r.lambda_g_exact), num(r.lambda_g_exact_error), num(r.lambda_g_bold1), "0"});
    out.tables.push_back({"asymptotic", a});
    out.summary["asymptotic"] = {{"exact_within_5pct_of_2", at.exact_pass}, {"bold1_within_1pct_of_2_3", at.bold1_pass}};
  }
  out.emit();
  return kExitPass;
}

int cmd_reproduce(const Options& o) {
  const std::string dir = o.out.empty() ? "lw-bundle" : o.out;
  const Bundle b = reproduce_bundle(dir, o.seed, [](const CriterionResult& r) {
    std::cerr << "criterion " << r.id << " " << r.name << ": " << (r.pass ? "pass" : "fail") << "\n";
  });
  std::cout << b.csv_body;
  if (!b.complete) std::cerr << "bundle incomplete: some criteria raised errors\n";
  bool all = true;
  for (const auto& r : b.rows) all = all && r.pass;
  return all && b.complete ? kExitPass : kExitRuleFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lw: Luttinger-Ward functional toolkit for finite-dimensional Gibbs models"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--rel-err", o.rel_err, "target relative integration error");
    sub->add_option("--samples", o.samples, "Monte Carlo samples");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--method", o.method, "integration method")->check(CLI::IsMember({"auto", "mc"}));
    sub->add_option("--out", o.out, "output directory");
  };
  auto with_model = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--model", o.model_path, "model file");
    if (required) opt->required();
  };

  std::vector<std::pair<std::string, std::function<int()>>> handlers;
  auto add = [&](const std::string& name, const std::string& help, std::function<int()> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    handlers.emplace_back(name, std::move(fn));
    return sub;
  };

  with_model(add("z", "partition function and free energy", [&] { return cmd_z(o); }), true);
  with_model(add("green", "Green's function", [&] { return cmd_green(o); }), true);
  auto* inv = add("invert", "A[G] by Newton inversion", [&] { return cmd_invert(o); });
  with_model(inv, true);
  inv->add_option("--G", o.g_path, "Green's function file");
  for (const char* name : {"eval", "lw"}) {
    auto* ev = add(name, "Phi, F, A and Sigma at G", [&] { return cmd_eval(o, "eval", false); });
    with_model(ev, true);
    ev->add_option("--G", o.g_path, "Green's function file");
  }
  auto* sg = add("sigma", "self-energy at G", [&] { return cmd_eval(o, "sigma", true); });
  with_model(sg, true);
  sg->add_option("--G", o.g_path, "Green's function file");
  auto* se = add("series", "bold series coefficients", [&] { return cmd_series(o); });
  with_model(se, true);
  se->add_option("--G", o.g_path, "Green's function file");
  se->add_option("--order", o.order, "series order M (1..3)")->check(CLI::Range(1, 3));
  auto* ck = add("check", "structural rule check", [&] { return cmd_check(o); });
  with_model(ck, false);
  ck->add_option("--G", o.g_path, "Green's function file");
  ck->add_option("--rule", o.rule, "rule")
      ->required()
      ->check(CLI::IsMember({"transform", "scale", "project", "sparse", "extend", "counterexample"}));
  auto* dy = add("dyson", "self-consistent Dyson solution", [&] { return cmd_dyson(o); });
  with_model(dy, true);
  dy->add_option("--sigma", o.sigma, "self-energy model")->check(CLI::IsMember({"exact", "bold1", "bold2"}));
  dy->add_option("--lambda-sweep", o.lambda_sweep, "a:b:n geometric lambda schedule for the double-well table");
  with_model(add("extend", "continuous extension limit", [&] { return cmd_extend(o); }), true);
  with_model(add("counterexample", "weak-growth counterexample probes", [&] { return cmd_counterexample(o); }), false);
  add("reproduce", "run the acceptance suite and write the bundle", [&] { return cmd_reproduce(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitError;
  }
  try {
    for (const auto& [name, fn] : handlers)
      if (app.got_subcommand(name)) return fn();
  } catch (const std::exception& e) {
    std::cerr << "lw: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
